// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/tensor.hpp"

#include <vector>

namespace forknet {

/// Mono waveform. Samples are dimensionless amplitudes, nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  long sample_rate = 16000;

  long size() const { return static_cast<long>(samples.size()); }
};

/// Analysis/synthesis framing. The window length is win_ms at sample_rate,
/// the hop is always half the window (50% overlap), and frames shorter than
/// fft_size are zero-padded before the transform. With remove_dc the DC bin
/// is dropped and bins 1..fft_size/2 are kept (Nyquist retained), so
/// F = fft_size/2; otherwise bins 0..fft_size/2 are kept.
struct StftConfig {
  double win_ms = 32.0;
  double overlap = 0.5;
  long fft_size = 512;
  bool remove_dc = true;
  long sample_rate = 16000;

  long win_samples() const;
  long hop_samples() const { return win_samples() / 2; }
  long bins() const { return remove_dc ? fft_size / 2 : fft_size / 2 + 1; }
  void validate() const;

  /// 32 ms Hann window, 512-point FFT, DC removed, 16 kHz.
  static StftConfig paper();
  /// Same framing with all fft_size/2+1 bins kept.
  static StftConfig paper_full_band();
  /// Small power-of-two framing for fast tests (win = fft = win_samples).
  static StftConfig small(long win_samples_, long sample_rate_ = 16000);
};

/// Complex T-F grid plus the framing that produced it.
struct ComplexSpectrogram {
  Tensor real;  // {T, F}
  Tensor imag;  // {T, F}
  long fft_size = 0;
  long win_size = 0;
  long hop_size = 0;
  bool dc_removed = true;

  long frames() const { return real.rank() == 2 ? real.dim(0) : 0; }
  long bins() const { return real.rank() == 2 ? real.dim(1) : 0; }
  void validate() const;
};

/// Periodic Hann window, w[k] = 0.5 - 0.5*cos(2*pi*k/n). Satisfies
/// w[k] + w[k + n/2] = 1 for even n. Throws for n < 2.
std::vector<double> hann_window(long n);

/// Frame count for tail-padded causal framing: frame t covers samples
/// [t*hop, t*hop + win), T = ceil(max(n - win, 0)/hop) + 1.
long stft_frame_count(long n_samples, long win, long hop);

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg);
AudioBuffer istft(const ComplexSpectrogram& spec, long out_len);

Tensor magnitude(const ComplexSpectrogram& spec);  // {T, F}
Tensor phase(const ComplexSpectrogram& spec);      // {T, F}

/// |X|^c with phase preserved; c in (0, 1]. Zero-magnitude bins stay zero.
ComplexSpectrogram compress(const ComplexSpectrogram& spec, double c);

/// Bin-wise complex product.
ComplexSpectrogram complex_mul(const ComplexSpectrogram& a, const ComplexSpectrogram& b);

namespace detail {

/// Framing parameters shared by the struct-level API above and the
/// differentiable ops. All sizes in samples.
struct Framing {
  long win = 0;
  long hop = 0;
  long fft = 0;
  bool remove_dc = true;

  long bins() const { return remove_dc ? fft / 2 : fft / 2 + 1; }
  static Framing of(const StftConfig& cfg);
};

/// STFT of x as a {2, T, F} tensor (channel 0 real, channel 1 imag).
Tensor stft_tensor(const double* x, long n, const Framing& fr);
/// Overlap-add inverse of a {2, T, F} tensor, truncated to out_len samples.
Tensor istft_tensor(const Tensor& spec, const Framing& fr, long out_len);
/// Adjoint of stft_tensor: maps a {2, T, F} cotangent to a length-n one.
Tensor stft_adjoint(const Tensor& grad, long n, const Framing& fr);
/// Adjoint of istft_tensor: maps a length-out_len cotangent to {2, T, F}.
Tensor istft_adjoint(const Tensor& grad, long frames, const Framing& fr, long out_len);

}  // namespace detail
}  // namespace forknet
