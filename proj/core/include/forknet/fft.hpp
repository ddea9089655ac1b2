// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <vector>

namespace forknet {

/// In-place iterative radix-2 FFT. n must be a power of two.
/// inverse=true applies the 1/n normalization.
void fft_inplace(std::complex<double>* a, size_t n, bool inverse);
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

/// DFT of a real frame of length fft_size (x shorter frames are accepted and
/// zero-padded). Returns bins 0..fft_size/2.
std::vector<std::complex<double>> rfft(const double* x, size_t len, size_t fft_size);

bool is_power_of_two(size_t n);
size_t next_power_of_two(size_t n);

}  // namespace forknet
