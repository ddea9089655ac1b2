// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "forknet/spectral.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace forknet;
using testutil::naive_dft;
using testutil::random_audio;
using testutil::rel_l2;

TEST_CASE("hann window closed forms") {
  CHECK(hann_window(4) == std::vector<double>{0.0, 0.5, 1.0, 0.5});
  CHECK(hann_window(2) == std::vector<double>{0.0, 1.0});
  auto w = hann_window(512);
  CHECK(w[128] + w[384] == 1.0);  // complementary halves overlap to one
  CHECK_THROWS_AS(hann_window(1), std::invalid_argument);
}

TEST_CASE("hann window overlap-add identity for even n") {
  for (long n : {8L, 64L, 512L}) {
    auto w = hann_window(n);
    for (long k = 0; k < n / 2; ++k)
      CHECK(w[static_cast<size_t>(k)] + w[static_cast<size_t>(k + n / 2)] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("frame count formula") {
  CHECK(stft_frame_count(16000, 512, 256) == 62);
  CHECK(stft_frame_count(512, 512, 256) == 1);
  CHECK(stft_frame_count(513, 512, 256) == 2);
  CHECK(stft_frame_count(100, 512, 256) == 1);  // shorter than one window
}

TEST_CASE("zero input gives the zero 62x256 grid") {
  AudioBuffer x;
  x.samples.assign(16000, 0.0);
  ComplexSpectrogram s = stft(x, StftConfig::paper());
  CHECK(s.frames() == 62);
  CHECK(s.bins() == 256);
  for (long i = 0; i < s.real.numel(); ++i) {
    CHECK(s.real[i] == 0.0);
    CHECK(s.imag[i] == 0.0);
  }
}

TEST_CASE("impulse frames match a direct DFT oracle") {
  StftConfig cfg = StftConfig::paper();
  auto w = hann_window(512);

  // Impulse at sample 0 lands on w[0] = 0: frame 0 is the DFT of w * delta,
  // which is identically zero, and no later frame sees the impulse.
  AudioBuffer x;
  x.samples.assign(2048, 0.0);
  x.samples[0] = 1.0;
  ComplexSpectrogram s = stft(x, cfg);
  for (long i = 0; i < s.real.numel(); ++i) {
    CHECK(s.real[i] == 0.0);
    CHECK(s.imag[i] == 0.0);
  }

  // Impulse at sample 300: frames 0 and 1 cover it; check both against the
  // naive DFT of the windowed frame.
  x.samples[0] = 0.0;
  x.samples[300] = 1.0;
  s = stft(x, cfg);
  for (long t : {0L, 1L}) {
    std::vector<double> frame(512, 0.0);
    for (long k = 0; k < 512; ++k) {
      long n = t * 256 + k;
      frame[static_cast<size_t>(k)] = x.samples[static_cast<size_t>(n)] * w[static_cast<size_t>(k)];
    }
    auto oracle = naive_dft(frame, 512);
    for (long f = 0; f < 256; ++f) {
      CHECK(s.real[t * 256 + f] == doctest::Approx(oracle[static_cast<size_t>(f + 1)].real()).epsilon(1e-9));
      CHECK(s.imag[t * 256 + f] == doctest::Approx(oracle[static_cast<size_t>(f + 1)].imag()).epsilon(1e-9));
    }
  }
  // Frames past the impulse's coverage are zero again.
  for (long t = 2; t < s.frames(); ++t)
    for (long f = 0; f < 256; ++f) {
      CHECK(s.real[t * 256 + f] == 0.0);
      CHECK(s.imag[t * 256 + f] == 0.0);
    }
}

TEST_CASE("pure cosine peaks at its bin") {
  // Bin-10 center frequency: 10 * 16000 / 512 Hz. After DC removal bin 10
  // sits at f-index 9.
  AudioBuffer x;
  x.samples.resize(16000);
  for (size_t n = 0; n < x.samples.size(); ++n)
    x.samples[n] = std::cos(2.0 * 3.14159265358979323846 * 10.0 * static_cast<double>(n) / 512.0);
  ComplexSpectrogram s = stft(x, StftConfig::paper());
  Tensor mag = magnitude(s);
  long t = 30;  // interior frame
  long best = 0;
  for (long f = 1; f < 256; ++f)
    if (mag[t * 256 + f] > mag[t * 256 + best]) best = f;
  CHECK(best == 9);
}

TEST_CASE("round trip is exact on the interior (full band)") {
  std::mt19937_64 rng(42);
  StftConfig cfg = StftConfig::paper_full_band();
  long n = 16000;
  for (int trial = 0; trial < 5; ++trial) {
    AudioBuffer x = random_audio(rng, n);
    AudioBuffer y = istft(stft(x, cfg), n);
    CHECK(rel_l2(x.samples, y.samples, 512, n - 512) < 1e-6);
  }
}

TEST_CASE("all-zero spectrogram inverts to silence") {
  AudioBuffer x;
  x.samples.assign(4096, 0.0);
  ComplexSpectrogram s = stft(x, StftConfig::paper());
  AudioBuffer y = istft(s, 4096);
  CHECK(y.size() == 4096);
  for (double v : y.samples) CHECK(v == 0.0);
}

TEST_CASE("DC-only content is mostly lost under DC removal") {
  AudioBuffer x;
  x.samples.assign(8192, 0.5);
  AudioBuffer y = istft(stft(x, StftConfig::paper()), 8192);
  // The constant lives in the dropped bin (plus window leakage into bin 1),
  // so the synthesis can only return a small residual, never the input.
  double rx = 0.0, ry = 0.0, rd = 0.0;
  for (long i = 512; i < 8192 - 512; ++i) {
    double xv = x.samples[static_cast<size_t>(i)], yv = y.samples[static_cast<size_t>(i)];
    rx += xv * xv;
    ry += yv * yv;
    rd += (yv - xv) * (yv - xv);
  }
  CHECK(std::sqrt(ry / rx) < 0.4);
  CHECK(std::sqrt(rd / rx) > 0.5);
}

TEST_CASE("linearity of the transform") {
  std::mt19937_64 rng(7);
  StftConfig cfg = StftConfig::paper();
  AudioBuffer x = random_audio(rng, 4000), y = random_audio(rng, 4000), z = x;
  double a = 1.7, b = -0.4;
  for (size_t i = 0; i < z.samples.size(); ++i) z.samples[i] = a * x.samples[i] + b * y.samples[i];
  ComplexSpectrogram sx = stft(x, cfg), sy = stft(y, cfg), sz = stft(z, cfg);
  for (long i = 0; i < sz.real.numel(); ++i) {
    CHECK(sz.real[i] == doctest::Approx(a * sx.real[i] + b * sy.real[i]).epsilon(1e-10));
    CHECK(sz.imag[i] == doctest::Approx(a * sx.imag[i] + b * sy.imag[i]).epsilon(1e-10));
  }
}

TEST_CASE("windowed frame energy matches spectral energy (oracle supplies dropped bins)") {
  std::mt19937_64 rng(13);
  StftConfig cfg = StftConfig::paper();
  auto w = hann_window(512);
  AudioBuffer x = random_audio(rng, 4000);
  ComplexSpectrogram s = stft(x, cfg);
  for (long t = 1; t + 2 < s.frames(); ++t) {
    std::vector<double> frame(512, 0.0);
    double frame_energy = 0.0;
    for (long k = 0; k < 512; ++k) {
      long n = t * 256 + k;
      if (n < x.size()) frame[static_cast<size_t>(k)] = x.samples[static_cast<size_t>(n)] * w[static_cast<size_t>(k)];
      frame_energy += frame[static_cast<size_t>(k)] * frame[static_cast<size_t>(k)];
    }
    auto oracle = naive_dft(frame, 512);
    // Parseval over the full two-sided spectrum. Retained bins must agree
    // with the oracle; DC comes from the oracle alone.
    double spec_energy = std::norm(oracle[0]);
    for (long k = 1; k < 512; ++k) spec_energy += std::norm(oracle[static_cast<size_t>(k)]);
    spec_energy /= 512.0;
    CHECK(spec_energy == doctest::Approx(frame_energy).epsilon(1e-6));
    for (long f = 0; f < 256; ++f) {
      CHECK(s.real[t * 256 + f] == doctest::Approx(oracle[static_cast<size_t>(f + 1)].real()).epsilon(1e-8));
      CHECK(s.imag[t * 256 + f] == doctest::Approx(oracle[static_cast<size_t>(f + 1)].imag()).epsilon(1e-8));
    }
  }
}

TEST_CASE("magnitude and phase") {
  ComplexSpectrogram s;
  s.real = Tensor::from({1, 2}, {3.0, 0.0});
  s.imag = Tensor::from({1, 2}, {4.0, 0.0});
  s.fft_size = 4;
  s.win_size = 4;
  s.hop_size = 2;
  s.dc_removed = true;
  Tensor m = magnitude(s), p = phase(s);
  CHECK(m[0] == doctest::Approx(5.0));
  CHECK(p[0] == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(m[1] == 0.0);
  CHECK(p[1] == 0.0);  // zero bin gets phase 0 by convention
}

TEST_CASE("polar identity reconstructs the spectrogram") {
  std::mt19937_64 rng(5);
  AudioBuffer x = random_audio(rng, 3000);
  ComplexSpectrogram s = stft(x, StftConfig::paper());
  Tensor m = magnitude(s), p = phase(s);
  for (long i = 0; i < m.numel(); ++i) {
    CHECK(m[i] * std::cos(p[i]) == doctest::Approx(s.real[i]).epsilon(1e-12));
    CHECK(m[i] * std::sin(p[i]) == doctest::Approx(s.imag[i]).epsilon(1e-12));
  }
}

TEST_CASE("compression") {
  std::mt19937_64 rng(9);
  AudioBuffer x = random_audio(rng, 2000);
  ComplexSpectrogram s = stft(x, StftConfig::paper());

  ComplexSpectrogram id = compress(s, 1.0);
  for (long i = 0; i < s.real.numel(); ++i) {
    CHECK(id.real[i] == doctest::Approx(s.real[i]).epsilon(1e-12));
    CHECK(id.imag[i] == doctest::Approx(s.imag[i]).epsilon(1e-12));
  }

  ComplexSpectrogram one;
  one.real = Tensor::from({1, 1}, {0.0});
  one.imag = Tensor::from({1, 1}, {4.0});
  one.fft_size = 4;
  one.win_size = 4;
  one.hop_size = 2;
  ComplexSpectrogram half = compress(one, 0.5);
  CHECK(magnitude(half)[0] == doctest::Approx(2.0));
  CHECK(phase(half)[0] == doctest::Approx(phase(one)[0]));

  ComplexSpectrogram zero;
  zero.real = Tensor::from({1, 1}, {0.0});
  zero.imag = Tensor::from({1, 1}, {0.0});
  zero.fft_size = 4;
  zero.win_size = 4;
  zero.hop_size = 2;
  ComplexSpectrogram cz = compress(zero, 0.3);
  CHECK(cz.real[0] == 0.0);
  CHECK(cz.imag[0] == 0.0);

  // Composition of exponents multiplies.
  ComplexSpectrogram s12 = compress(compress(s, 0.6), 0.5);
  ComplexSpectrogram s3 = compress(s, 0.3);
  for (long i = 0; i < s.real.numel(); ++i) {
    CHECK(s12.real[i] == doctest::Approx(s3.real[i]).epsilon(1e-10));
    CHECK(s12.imag[i] == doctest::Approx(s3.imag[i]).epsilon(1e-10));
  }

  CHECK_THROWS_AS(compress(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compress(s, 1.5), std::invalid_argument);
}

TEST_CASE("complex bin-wise product") {
  std::mt19937_64 rng(21);
  AudioBuffer xa = random_audio(rng, 2000), xb = random_audio(rng, 2000);
  ComplexSpectrogram a = stft(xa, StftConfig::paper());
  ComplexSpectrogram b = stft(xb, StftConfig::paper());

  ComplexSpectrogram ones = a;
  for (long i = 0; i < ones.real.numel(); ++i) {
    ones.real[i] = 1.0;
    ones.imag[i] = 0.0;
  }
  ComplexSpectrogram same = complex_mul(a, ones);
  for (long i = 0; i < a.real.numel(); ++i) {
    CHECK(same.real[i] == a.real[i]);
    CHECK(same.imag[i] == a.imag[i]);
  }

  ComplexSpectrogram j = ones;
  for (long i = 0; i < j.real.numel(); ++i) {
    j.real[i] = 0.0;
    j.imag[i] = 1.0;
  }
  ComplexSpectrogram jj = complex_mul(j, j);
  CHECK(jj.real[0] == doctest::Approx(-1.0));
  CHECK(jj.imag[0] == doctest::Approx(0.0));

  // Polar-form oracle: |ab| = |a||b|, arg(ab) = arg(a) + arg(b).
  ComplexSpectrogram ab = complex_mul(a, b);
  Tensor ma = magnitude(a), mb = magnitude(b), mab = magnitude(ab);
  for (long i = 0; i < ma.numel(); ++i) {
    CHECK(mab[i] == doctest::Approx(ma[i] * mb[i]).epsilon(1e-9));
    double want_re = ma[i] * mb[i] * std::cos(phase(a)[i] + phase(b)[i]);
    CHECK(ab.real[i] == doctest::Approx(want_re).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("config validation") {
  StftConfig cfg = StftConfig::paper();
  CHECK(cfg.win_samples() == 512);
  CHECK(cfg.hop_samples() == 256);
  CHECK(cfg.bins() == 256);
  CHECK(StftConfig::paper_full_band().bins() == 257);

  StftConfig bad = cfg;
  bad.overlap = 0.25;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.fft_size = 300;  // not a power of two
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.win_ms = 31.0;  // 496 samples: window no longer matches the FFT... still valid
  CHECK_NOTHROW(bad.validate());
  bad.win_ms = 0.33;  // fractional sample count
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  AudioBuffer empty;
  CHECK_THROWS_AS(stft(empty, cfg), std::invalid_argument);
}
