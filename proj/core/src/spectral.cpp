// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/spectral.hpp"

#include "forknet/fft.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace forknet {

namespace {
constexpr double kOlaFloor = 1e-8;
}

std::vector<double> hann_window(long n) {
  require(n >= 2, "hann_window: n must be >= 2");
  std::vector<double> w(static_cast<size_t>(n), 0.0);
  auto raised_cos = [n](long k) {
    return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  };
  if (n % 2 != 0) {
    for (long k = 0; k < n; ++k) w[static_cast<size_t>(k)] = raised_cos(k);
    return w;
  }
  // Build the first quarter directly and unfold with the exact identities
  // w(n/2 - k) = 1 - w(k) and w(n - k) = w(k); the quarter point is pinned to
  // 1/2. The overlap-add complement w(k) + w(k + n/2) = 1 then holds bit-exactly.
  for (long k = 0; k <= n / 4; ++k) {
    w[static_cast<size_t>(k)] = (4 * k == n) ? 0.5 : raised_cos(k);
  }
  for (long k = n / 4 + 1; k <= n / 2; ++k) {
    w[static_cast<size_t>(k)] = 1.0 - w[static_cast<size_t>(n / 2 - k)];
  }
  for (long k = n / 2 + 1; k < n; ++k) {
    w[static_cast<size_t>(k)] = w[static_cast<size_t>(n - k)];
  }
  return w;
}

long stft_frame_count(long n_samples, long win, long hop) {
  long tail = n_samples - win;
  if (tail < 0) tail = 0;
  return (tail + hop - 1) / hop + 1;
}

long StftConfig::win_samples() const {
  double exact = win_ms * static_cast<double>(sample_rate) / 1000.0;
  return static_cast<long>(std::lround(exact));
}

void StftConfig::validate() const {
  require(sample_rate > 0, "stft config: sample_rate must be positive");
  double exact = win_ms * static_cast<double>(sample_rate) / 1000.0;
  require(std::abs(exact - std::round(exact)) < 1e-6, "stft config: win_ms must give an integer sample count");
  require(overlap == 0.5, "stft config: overlap must be 0.5");
  long win = win_samples();
  require(win >= 2 && win % 2 == 0, "stft config: window must be even and >= 2");
  require(fft_size >= win, "stft config: fft_size must be >= window length");
  require(is_power_of_two(static_cast<size_t>(fft_size)), "stft config: fft_size must be a power of two");
}

StftConfig StftConfig::paper() { return StftConfig{}; }

StftConfig StftConfig::paper_full_band() {
  StftConfig cfg;
  cfg.remove_dc = false;
  return cfg;
}

StftConfig StftConfig::small(long win_samples_, long sample_rate_) {
  StftConfig cfg;
  cfg.sample_rate = sample_rate_;
  cfg.win_ms = 1000.0 * static_cast<double>(win_samples_) / static_cast<double>(sample_rate_);
  cfg.fft_size = static_cast<long>(next_power_of_two(static_cast<size_t>(win_samples_)));
  return cfg;
}

void ComplexSpectrogram::validate() const {
  require(real.rank() == 2 && imag.rank() == 2, "spectrogram grids must be rank 2");
  require(real.same_shape(imag), "spectrogram real/imag shapes differ");
  require(fft_size > 0 && win_size > 0 && hop_size > 0, "spectrogram framing metadata missing");
  require(hop_size * 2 == win_size, "spectrogram hop must be half the window");
  long expect_f = dc_removed ? fft_size / 2 : fft_size / 2 + 1;
  require(bins() == expect_f, "spectrogram bin count does not match framing metadata");
}

namespace detail {

Framing Framing::of(const StftConfig& cfg) {
  cfg.validate();
  return Framing{cfg.win_samples(), cfg.hop_samples(), cfg.fft_size, cfg.remove_dc};
}

Tensor stft_tensor(const double* x, long n, const Framing& fr) {
  require(n > 0, "stft: audio must be nonempty");
  const long T = stft_frame_count(n, fr.win, fr.hop);
  const long F = fr.bins();
  const std::vector<double> w = hann_window(fr.win);
  Tensor out({2, T, F});

  std::vector<double> frame(static_cast<size_t>(fr.win));
  const long k0 = fr.remove_dc ? 1 : 0;
  for (long t = 0; t < T; ++t) {
    const long start = t * fr.hop;
    for (long j = 0; j < fr.win; ++j) {
      long idx = start + j;
      double s = (idx < n) ? x[idx] : 0.0;
      frame[static_cast<size_t>(j)] = s * w[static_cast<size_t>(j)];
    }
    auto bins = rfft(frame.data(), frame.size(), static_cast<size_t>(fr.fft));
    for (long f = 0; f < F; ++f) {
      const auto& c = bins[static_cast<size_t>(k0 + f)];
      out[(0 * T + t) * F + f] = c.real();
      out[(1 * T + t) * F + f] = c.imag();
    }
  }
  return out;
}

namespace {

std::vector<double> ola_envelope(long frames, const Framing& fr, const std::vector<double>& w) {
  std::vector<double> den(static_cast<size_t>(frames * fr.hop + fr.win), 0.0);
  for (long t = 0; t < frames; ++t) {
    for (long j = 0; j < fr.win; ++j) {
      den[static_cast<size_t>(t * fr.hop + j)] += w[static_cast<size_t>(j)] * w[static_cast<size_t>(j)];
    }
  }
  // Where the window overlap fades out at the signal edges this least-squares
  // divisor heads to zero, and any spectral modification (a mask, a gradient)
  // gets amplified without bound there. Flooring at half the envelope peak
  // leaves fully overlapped samples untouched -- the 50%-overlap Hann envelope
  // never dips below that in the interior -- and turns the blowup into a taper.
  double peak = 0.0;
  for (double v : den) peak = std::max(peak, v);
  double floor_v = std::max(0.5 * peak, kOlaFloor);
  for (double& v : den) v = std::max(v, floor_v);
  return den;
}

}  // namespace

Tensor istft_tensor(const Tensor& spec, const Framing& fr, long out_len) {
  require(spec.rank() == 3 && spec.dim(0) == 2, "istft: expected a {2, T, F} tensor");
  const long T = spec.dim(1);
  const long F = spec.dim(2);
  require(F == fr.bins(), "istft: bin count does not match framing metadata");
  require(out_len > 0 && out_len <= T * fr.hop + fr.win, "istft: out_len exceeds covered range");
  const long M = fr.fft;
  const long k0 = fr.remove_dc ? 1 : 0;
  const std::vector<double> w = hann_window(fr.win);
  const std::vector<double> den = ola_envelope(T, fr, w);

  std::vector<double> num(den.size(), 0.0);
  std::vector<std::complex<double>> buf(static_cast<size_t>(M));
  for (long t = 0; t < T; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
    for (long f = 0; f < F; ++f) {
      long k = k0 + f;
      std::complex<double> c{spec[(0 * T + t) * F + f], spec[(1 * T + t) * F + f]};
      buf[static_cast<size_t>(k)] = c;
      if (k >= 1 && k < M / 2) buf[static_cast<size_t>(M - k)] = std::conj(c);
    }
    fft_inplace(buf, true);
    for (long j = 0; j < fr.win; ++j) {
      num[static_cast<size_t>(t * fr.hop + j)] += w[static_cast<size_t>(j)] * buf[static_cast<size_t>(j)].real();
    }
  }

  Tensor out({out_len});
  for (long i = 0; i < out_len; ++i) {
    out[i] = num[static_cast<size_t>(i)] / den[static_cast<size_t>(i)];
  }
  return out;
}

Tensor stft_adjoint(const Tensor& grad, long n, const Framing& fr) {
  require(grad.rank() == 3 && grad.dim(0) == 2, "stft_adjoint: expected a {2, T, F} tensor");
  const long T = grad.dim(1);
  const long F = grad.dim(2);
  const long M = fr.fft;
  const long k0 = fr.remove_dc ? 1 : 0;
  const std::vector<double> w = hann_window(fr.win);

  Tensor dx({n});
  std::vector<std::complex<double>> buf(static_cast<size_t>(M));
  for (long t = 0; t < T; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
    for (long f = 0; f < F; ++f) {
      buf[static_cast<size_t>(k0 + f)] = {grad[(0 * T + t) * F + f], grad[(1 * T + t) * F + f]};
    }
    // Unnormalized inverse transform: sum_k G_k e^{+j 2 pi k j / M}.
    fft_inplace(buf, true);
    const long start = t * fr.hop;
    for (long j = 0; j < fr.win && start + j < n; ++j) {
      dx[start + j] += w[static_cast<size_t>(j)] * buf[static_cast<size_t>(j)].real() * static_cast<double>(M);
    }
  }
  return dx;
}

Tensor istft_adjoint(const Tensor& grad, long frames, const Framing& fr, long out_len) {
  require(grad.rank() == 1, "istft_adjoint: expected a rank-1 tensor");
  const long T = frames;
  const long F = fr.bins();
  const long M = fr.fft;
  const long k0 = fr.remove_dc ? 1 : 0;
  const std::vector<double> w = hann_window(fr.win);
  const std::vector<double> den = ola_envelope(T, fr, w);

  std::vector<double> dnum(den.size(), 0.0);
  for (long i = 0; i < out_len; ++i) {
    dnum[static_cast<size_t>(i)] = grad[i] / den[static_cast<size_t>(i)];
  }

  Tensor ds({2, T, F});
  std::vector<std::complex<double>> buf(static_cast<size_t>(M));
  for (long t = 0; t < T; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
    for (long j = 0; j < fr.win; ++j) {
      buf[static_cast<size_t>(j)] = {w[static_cast<size_t>(j)] * dnum[static_cast<size_t>(t * fr.hop + j)], 0.0};
    }
    fft_inplace(buf, false);
    for (long f = 0; f < F; ++f) {
      long k = k0 + f;
      double scale = (k == 0 || k == M / 2) ? 1.0 / static_cast<double>(M) : 2.0 / static_cast<double>(M);
      ds[(0 * T + t) * F + f] = scale * buf[static_cast<size_t>(k)].real();
      ds[(1 * T + t) * F + f] = (k == 0 || k == M / 2) ? 0.0 : scale * buf[static_cast<size_t>(k)].imag();
    }
  }
  return ds;
}

}  // namespace detail

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg) {
  require(!audio.samples.empty(), "stft: audio must be nonempty");
  require(audio.sample_rate == cfg.sample_rate, "stft: audio sample rate does not match config");
  detail::Framing fr = detail::Framing::of(cfg);
  Tensor packed = detail::stft_tensor(audio.samples.data(), audio.size(), fr);
  const long T = packed.dim(1);
  const long F = packed.dim(2);

  ComplexSpectrogram spec;
  spec.real = Tensor({T, F});
  spec.imag = Tensor({T, F});
  for (long i = 0; i < T * F; ++i) {
    spec.real[i] = packed[i];
    spec.imag[i] = packed[T * F + i];
  }
  spec.fft_size = fr.fft;
  spec.win_size = fr.win;
  spec.hop_size = fr.hop;
  spec.dc_removed = fr.remove_dc;
  return spec;
}

AudioBuffer istft(const ComplexSpectrogram& spec, long out_len) {
  spec.validate();
  detail::Framing fr{spec.win_size, spec.hop_size, spec.fft_size, spec.dc_removed};
  const long T = spec.frames();
  const long F = spec.bins();
  Tensor packed({2, T, F});
  for (long i = 0; i < T * F; ++i) {
    packed[i] = spec.real[i];
    packed[T * F + i] = spec.imag[i];
  }
  Tensor wave = detail::istft_tensor(packed, fr, out_len);
  AudioBuffer out;
  out.samples.assign(wave.data(), wave.data() + out_len);
  return out;
}

Tensor magnitude(const ComplexSpectrogram& spec) {
  Tensor m({spec.frames(), spec.bins()});
  for (long i = 0; i < m.numel(); ++i) m[i] = std::hypot(spec.real[i], spec.imag[i]);
  return m;
}

Tensor phase(const ComplexSpectrogram& spec) {
  Tensor p({spec.frames(), spec.bins()});
  for (long i = 0; i < p.numel(); ++i) p[i] = std::atan2(spec.imag[i], spec.real[i]);
  return p;
}

ComplexSpectrogram compress(const ComplexSpectrogram& spec, double c) {
  require(c > 0.0 && c <= 1.0, "compress: exponent must be in (0, 1]");
  ComplexSpectrogram out = spec;
  for (long i = 0; i < out.real.numel(); ++i) {
    double m = std::hypot(spec.real[i], spec.imag[i]);
    double s = m > 0.0 ? std::pow(m, c - 1.0) : 0.0;
    out.real[i] = spec.real[i] * s;
    out.imag[i] = spec.imag[i] * s;
  }
  return out;
}

ComplexSpectrogram complex_mul(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  require(a.real.same_shape(b.real), "complex_mul: shapes differ");
  ComplexSpectrogram out = a;
  for (long i = 0; i < out.real.numel(); ++i) {
    out.real[i] = a.real[i] * b.real[i] - a.imag[i] * b.imag[i];
    out.imag[i] = a.real[i] * b.imag[i] + a.imag[i] * b.real[i];
  }
  return out;
}

}  // namespace forknet
