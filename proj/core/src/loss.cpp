// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/loss.hpp"

#include "forknet/fft.hpp"

#include <cmath>

namespace forknet {

void LossConfig::validate() const {
  require(c1 > 0.0 && c1 <= 1.0, "loss config: c1 must be in (0, 1]");
  require(c2 > 0.0 && c2 <= 1.0, "loss config: c2 must be in (0, 1]");
  require(lambda >= 0.0, "loss config: lambda must be >= 0");
  require(!mr_windows_ms.empty(), "loss config: at least one resolution window required");
  for (double w : mr_windows_ms) mr_framing(w, sample_rate);
}

detail::Framing mr_framing(double window_ms, long sample_rate) {
  double exact = window_ms * static_cast<double>(sample_rate) / 1000.0;
  require(std::abs(exact - std::round(exact)) < 1e-6, "resolution window must give an integer sample count");
  long win = static_cast<long>(std::lround(exact));
  require(win >= 2 && win % 2 == 0, "resolution window must be even and >= 2");
  long fft = static_cast<long>(next_power_of_two(static_cast<size_t>(win)));
  return detail::Framing{win, win / 2, fft, true};
}

namespace {

Var compressed_pair_loss(Tape& t, const Var& y, const Var& s, double c) {
  require(y.t().same_shape(s.t()), "loss: estimate and target shapes differ");
  Var cy = ops::compress_complex(t, y, c);
  Var cs = ops::compress_complex(t, s, c);
  Var dmag = ops::sub(t, ops::complex_abs(t, cy), ops::complex_abs(t, cs));
  Var mag_term = ops::sum(t, ops::mul(t, dmag, dmag));
  Var dcpx = ops::sub(t, cy, cs);
  Var cpx_term = ops::sum(t, ops::mul(t, dcpx, dcpx));
  return ops::add(t, mag_term, cpx_term);
}

}  // namespace

Var spec_loss_t(Tape& t, const Var& y, const Var& s, double c) {
  require(c > 0.0 && c <= 1.0, "spec_loss: exponent must be in (0, 1]");
  return compressed_pair_loss(t, y, s, c);
}

Var multires_loss_t(Tape& t, const Var& y, const Var& s, double c2, const std::vector<double>& windows_ms,
                    long sample_rate) {
  require(y.t().rank() == 1 && s.t().rank() == 1, "multires_loss: waveform operands required");
  require(y.t().numel() == s.t().numel(), "multires_loss: lengths differ");
  require(!windows_ms.empty(), "multires_loss: no resolution windows");
  Var acc;
  bool first = true;
  for (double w : windows_ms) {
    detail::Framing fr = mr_framing(w, sample_rate);
    Var yi = ops::stft_op(t, y, fr);
    Var si = ops::stft_op(t, s, fr);
    Var term = compressed_pair_loss(t, yi, si, c2);
    acc = first ? term : ops::add(t, acc, term);
    first = false;
  }
  return acc;
}

Var total_loss_t(Tape& t, const Var& spec_y, const Var& spec_s, const Var& wave_y, const Var& wave_s,
                 const LossConfig& cfg) {
  cfg.validate();
  Var spec = spec_loss_t(t, spec_y, spec_s, cfg.c1);
  if (cfg.lambda == 0.0) return spec;
  Var mr = multires_loss_t(t, wave_y, wave_s, cfg.c2, cfg.mr_windows_ms, cfg.sample_rate);
  return ops::add(t, spec, ops::scale(t, mr, cfg.lambda));
}

namespace {

Var pack_spec(const ComplexSpectrogram& s) {
  const long T = s.frames(), F = s.bins();
  Tensor packed({2, T, F});
  for (long i = 0; i < T * F; ++i) {
    packed[i] = s.real[i];
    packed[T * F + i] = s.imag[i];
  }
  return Tape::constant(std::move(packed));
}

}  // namespace

double spec_loss(const ComplexSpectrogram& y, const ComplexSpectrogram& s, double c) {
  Tape t(false);
  return spec_loss_t(t, pack_spec(y), pack_spec(s), c).t()[0];
}

double multires_loss(const AudioBuffer& y, const AudioBuffer& s, double c2, const std::vector<double>& windows_ms) {
  require(y.sample_rate == s.sample_rate, "multires_loss: sample rates differ");
  Tape t(false);
  Var yv = Tape::constant(Tensor::from({y.size()}, y.samples));
  Var sv = Tape::constant(Tensor::from({s.size()}, s.samples));
  return multires_loss_t(t, yv, sv, c2, windows_ms, y.sample_rate).t()[0];
}

double total_loss(const ComplexSpectrogram& spec_y, const ComplexSpectrogram& spec_s, const AudioBuffer& wave_y,
                  const AudioBuffer& wave_s, const LossConfig& cfg) {
  Tape t(false);
  Var yv = Tape::constant(Tensor::from({wave_y.size()}, wave_y.samples));
  Var sv = Tape::constant(Tensor::from({wave_s.size()}, wave_s.samples));
  return total_loss_t(t, pack_spec(spec_y), pack_spec(spec_s), yv, sv, cfg).t()[0];
}

}  // namespace forknet
