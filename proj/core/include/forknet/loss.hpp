// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/ops.hpp"

#include <vector>

namespace forknet {

struct LossConfig {
  double c1 = 0.6;
  double c2 = 0.3;
  double lambda = 1.0;
  std::vector<double> mr_windows_ms = {5.0, 10.0, 20.0, 40.0};
  long sample_rate = 16000;

  void validate() const;
};

/// Compressed spectral distance between two {2,T,F} tensors with exponent c:
///   sum (|Y|^c - |S|^c)^2 + sum |Y^c - S^c|^2
/// where Y^c keeps Y's phase. Reduction is a plain sum over all bins.
Var spec_loss_t(Tape& t, const Var& y, const Var& s, double c);

/// Multi-resolution spectrogram loss over waveform vars of equal length:
/// the spec_loss summand with exponent c2 accumulated over one STFT per
/// window size (hop = half window, fft = next power of two, DC removed).
Var multires_loss_t(Tape& t, const Var& y, const Var& s, double c2, const std::vector<double>& windows_ms,
                    long sample_rate);

/// spec_loss + lambda * multires_loss.
Var total_loss_t(Tape& t, const Var& spec_y, const Var& spec_s, const Var& wave_y, const Var& wave_s,
                 const LossConfig& cfg);

// Convenience non-differentiating wrappers.
double spec_loss(const ComplexSpectrogram& y, const ComplexSpectrogram& s, double c);
double multires_loss(const AudioBuffer& y, const AudioBuffer& s, double c2, const std::vector<double>& windows_ms);
double total_loss(const ComplexSpectrogram& spec_y, const ComplexSpectrogram& spec_s, const AudioBuffer& wave_y,
                  const AudioBuffer& wave_s, const LossConfig& cfg);

/// Framing used for multi-resolution term i; exposed so tests can build the
/// identical grids.
detail::Framing mr_framing(double window_ms, long sample_rate);

}  // namespace forknet
