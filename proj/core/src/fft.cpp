// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace forknet {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_power_of_two(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::complex<double>* a, size_t n, bool inverse) {
  if (n <= 1) return;
  if (!is_power_of_two(n)) throw std::invalid_argument("fft size must be a power of two");

  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> tw(n / 2);
  for (size_t k = 0; k < n / 2; ++k) {
    double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(ang), std::sin(ang)};
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    size_t half = len >> 1;
    size_t step = n / len;
    for (size_t base = 0; base < n; base += len) {
      for (size_t k = 0; k < half; ++k) {
        std::complex<double> u = a[base + k];
        std::complex<double> v = a[base + k + half] * tw[k * step];
        a[base + k] = u + v;
        a[base + k + half] = u - v;
      }
    }
  }

  if (inverse) {
    double inv = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) a[i] *= inv;
  }
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  fft_inplace(a.data(), a.size(), inverse);
}

std::vector<std::complex<double>> rfft(const double* x, size_t len, size_t fft_size) {
  std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
  size_t m = len < fft_size ? len : fft_size;
  for (size_t i = 0; i < m; ++i) buf[i] = {x[i], 0.0};
  fft_inplace(buf, false);
  buf.resize(fft_size / 2 + 1);
  return buf;
}

}  // namespace forknet
