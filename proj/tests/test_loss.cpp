// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "forknet/loss.hpp"
#include "test_util.hpp"

#include <complex>
#include <random>

using namespace forknet;
using testutil::naive_dft;
using testutil::random_audio;
using testutil::u01;

namespace {

ComplexSpectrogram random_spec(std::mt19937_64& rng, long T, long F) {
  ComplexSpectrogram s;
  s.real = testutil::random_tensor(rng, {T, F});
  s.imag = testutil::random_tensor(rng, {T, F});
  s.fft_size = 2 * F;
  s.win_size = 2 * F;
  s.hop_size = F;
  s.dc_removed = true;
  return s;
}

ComplexSpectrogram zero_spec(long T, long F) {
  ComplexSpectrogram s;
  s.real = Tensor({T, F});
  s.imag = Tensor({T, F});
  s.fft_size = 2 * F;
  s.win_size = 2 * F;
  s.hop_size = F;
  s.dc_removed = true;
  return s;
}

std::complex<double> compress_c(std::complex<double> v, double c) {
  double m = std::abs(v);
  if (m == 0.0) return {0.0, 0.0};
  return std::pow(m, c) * (v / m);
}

double pair_loss_oracle(const ComplexSpectrogram& y, const ComplexSpectrogram& s, double c) {
  double acc = 0.0;
  for (long i = 0; i < y.real.numel(); ++i) {
    std::complex<double> cy = compress_c({y.real[i], y.imag[i]}, c);
    std::complex<double> cs = compress_c({s.real[i], s.imag[i]}, c);
    double dm = std::abs(cy) - std::abs(cs);
    acc += dm * dm + std::norm(cy - cs);
  }
  return acc;
}

}  // namespace

TEST_CASE("matching operands give exactly zero") {
  std::mt19937_64 rng(11);
  ComplexSpectrogram y = random_spec(rng, 5, 7);
  for (double c : {0.3, 0.6, 1.0}) CHECK(spec_loss(y, y, c) == 0.0);

  AudioBuffer w = random_audio(rng, 300);
  CHECK(multires_loss(w, w, 0.3, {1.0, 2.0}) == 0.0);

  LossConfig lc;
  lc.mr_windows_ms = {1.0, 2.0};
  CHECK(total_loss(y, y, w, w, lc) == 0.0);
}

TEST_CASE("zero estimate against unit-magnitude targets sums to 2TF") {
  std::mt19937_64 rng(12);
  const long T = 4, F = 6;
  ComplexSpectrogram s = zero_spec(T, F);
  for (long i = 0; i < T * F; ++i) {
    double phi = 2.0 * 3.14159265358979323846 * u01(rng);
    s.real[i] = std::cos(phi);
    s.imag[i] = std::sin(phi);
  }
  for (double c : {0.3, 0.6, 1.0})
    CHECK(std::abs(spec_loss(zero_spec(T, F), s, c) - 2.0 * static_cast<double>(T * F)) < 1e-10);
}

TEST_CASE("single-bin uncompressed case") {
  ComplexSpectrogram y = zero_spec(1, 1), s = zero_spec(1, 1);
  y.real[0] = 1.0;
  s.real[0] = -1.0;
  // magnitudes agree, so only the complex term contributes: |1-(-1)|^2 = 4.
  CHECK(std::abs(spec_loss(y, s, 1.0) - 4.0) < 1e-12);
}

TEST_CASE("compressed distance matches a scalar-complex oracle") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    ComplexSpectrogram y = random_spec(rng, 3, 4), s = random_spec(rng, 3, 4);
    for (double c : {0.3, 0.6, 1.0})
      CHECK(std::abs(spec_loss(y, s, c) - pair_loss_oracle(y, s, c)) < 1e-10);
  }
}

TEST_CASE("loss is nonnegative and monotone under magnitude scaling") {
  std::mt19937_64 rng(14);
  ComplexSpectrogram s = random_spec(rng, 4, 5);
  double prev = 0.0;
  for (double alpha : {1.0, 1.3, 1.8, 2.5}) {
    ComplexSpectrogram y = s;
    for (long i = 0; i < y.real.numel(); ++i) {
      y.real[i] *= alpha;
      y.imag[i] *= alpha;
    }
    double l = spec_loss(y, s, 0.6);
    CHECK(l >= prev);
    if (alpha > 1.0) CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("resolution grids derive from the window size") {
  const long wins[] = {80, 160, 320, 640};
  const long ffts[] = {128, 256, 512, 1024};
  const double ms[] = {5.0, 10.0, 20.0, 40.0};
  for (int i = 0; i < 4; ++i) {
    detail::Framing fr = mr_framing(ms[i], 16000);
    CHECK(fr.win == wins[i]);
    CHECK(fr.hop == wins[i] / 2);
    CHECK(fr.fft == ffts[i]);
    CHECK(fr.remove_dc);
    CHECK(fr.bins() == ffts[i] / 2);
  }
  CHECK_THROWS(mr_framing(0.3, 16000));    // 4.8 samples
  CHECK_THROWS(mr_framing(0.0625, 16000)); // 1 sample
}

TEST_CASE("multi-resolution loss matches a naive DFT oracle") {
  std::mt19937_64 rng(15);
  const long n = 400;
  AudioBuffer y = random_audio(rng, n), s = random_audio(rng, n);
  const double c2 = 0.3;
  const std::vector<double> windows = {2.5, 5.0};

  double oracle = 0.0;
  for (double w : windows) {
    detail::Framing fr = mr_framing(w, 16000);
    std::vector<double> hann = hann_window(fr.win);
    long T = stft_frame_count(n, fr.win, fr.hop);
    ComplexSpectrogram ys = zero_spec(T, fr.fft / 2), ss = zero_spec(T, fr.fft / 2);
    for (long t = 0; t < T; ++t) {
      std::vector<double> fy(static_cast<size_t>(fr.fft), 0.0), fs(static_cast<size_t>(fr.fft), 0.0);
      for (long k = 0; k < fr.win; ++k) {
        long idx = t * fr.hop + k;
        if (idx < n) {
          fy[static_cast<size_t>(k)] = y.samples[static_cast<size_t>(idx)] * hann[static_cast<size_t>(k)];
          fs[static_cast<size_t>(k)] = s.samples[static_cast<size_t>(idx)] * hann[static_cast<size_t>(k)];
        }
      }
      auto dy = naive_dft(fy, fr.fft), ds = naive_dft(fs, fr.fft);
      for (long f = 0; f < fr.fft / 2; ++f) {
        ys.real[t * (fr.fft / 2) + f] = dy[static_cast<size_t>(f + 1)].real();
        ys.imag[t * (fr.fft / 2) + f] = dy[static_cast<size_t>(f + 1)].imag();
        ss.real[t * (fr.fft / 2) + f] = ds[static_cast<size_t>(f + 1)].real();
        ss.imag[t * (fr.fft / 2) + f] = ds[static_cast<size_t>(f + 1)].imag();
      }
    }
    oracle += pair_loss_oracle(ys, ss, c2);
  }

  double got = multires_loss(y, s, c2, windows);
  CHECK(std::abs(got - oracle) / oracle < 1e-9);
}

TEST_CASE("total loss composes the two terms with lambda") {
  std::mt19937_64 rng(16);
  ComplexSpectrogram sy = random_spec(rng, 4, 6), ss = random_spec(rng, 4, 6);
  AudioBuffer wy = random_audio(rng, 320), ws = random_audio(rng, 320);

  LossConfig lc;
  lc.mr_windows_ms = {1.0, 2.0};

  double spec = spec_loss(sy, ss, lc.c1);
  double mr = multires_loss(wy, ws, lc.c2, lc.mr_windows_ms);

  lc.lambda = 0.0;
  CHECK(std::abs(total_loss(sy, ss, wy, ws, lc) - spec) < 1e-12);
  lc.lambda = 1.0;
  CHECK(std::abs(total_loss(sy, ss, wy, ws, lc) - (spec + mr)) < 1e-10);
  lc.lambda = 0.25;
  CHECK(std::abs(total_loss(sy, ss, wy, ws, lc) - (spec + 0.25 * mr)) < 1e-10);
}

TEST_CASE("mismatched operands are rejected") {
  std::mt19937_64 rng(17);
  ComplexSpectrogram a = random_spec(rng, 3, 4), b = random_spec(rng, 4, 4);
  CHECK_THROWS_AS(spec_loss(a, b, 0.6), std::invalid_argument);
  CHECK_THROWS(spec_loss(a, a, 0.0));
  CHECK_THROWS(spec_loss(a, a, 1.5));

  AudioBuffer wy = random_audio(rng, 100), ws = random_audio(rng, 101);
  CHECK_THROWS_AS(multires_loss(wy, ws, 0.3, {1.0}), std::invalid_argument);
  CHECK_THROWS(multires_loss(wy, wy, 0.3, {}));

  LossConfig bad;
  bad.c1 = 0.0;
  CHECK_THROWS(bad.validate());
  bad = LossConfig{};
  bad.lambda = -1.0;
  CHECK_THROWS(bad.validate());
  LossConfig good;
  CHECK_NOTHROW(good.validate());
}
