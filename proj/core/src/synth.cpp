// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/training.hpp"

#include "forknet/fft.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace forknet {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Uniform in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform_in(std::mt19937_64& rng, double lo, double hi) { return lo + u01(rng) * (hi - lo); }

// Box-Muller; u1 is shifted into (0, 1] so the log is finite.
double gaussian(std::mt19937_64& rng, bool& have_spare, double& spare) {
  if (have_spare) {
    have_spare = false;
    return spare;
  }
  double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = u01(rng);
  double r = std::sqrt(-2.0 * std::log(u1));
  have_spare = true;
  spare = r * std::sin(2.0 * kPi * u2);
  return r * std::cos(2.0 * kPi * u2);
}

long samples_for(double dur_s, long sample_rate) {
  if (!(dur_s > 0.0)) throw std::invalid_argument("synthesis duration must be positive");
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  long n = static_cast<long>(std::lround(dur_s * static_cast<double>(sample_rate)));
  if (n <= 0) throw std::invalid_argument("synthesis duration rounds to zero samples");
  return n;
}

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace

AudioBuffer synth_clean(uint64_t seed, double dur_s, long sample_rate) {
  long n = samples_for(dur_s, sample_rate);
  std::mt19937_64 rng(seed);

  int harmonics = 3 + static_cast<int>(rng() % 4);
  double f0 = uniform_in(rng, 100.0, 300.0);
  double am_rate = uniform_in(rng, 2.0, 8.0);
  double am_phase = uniform_in(rng, 0.0, 2.0 * kPi);
  std::vector<double> amp(harmonics), phase(harmonics);
  for (int k = 0; k < harmonics; ++k) {
    amp[k] = uniform_in(rng, 0.3, 1.0) / static_cast<double>(k + 1);
    phase[k] = uniform_in(rng, 0.0, 2.0 * kPi);
  }

  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  double peak = 0.0;
  for (long i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(sample_rate);
    double env = 0.6 + 0.4 * std::sin(2.0 * kPi * am_rate * t + am_phase);
    double s = 0.0;
    for (int k = 0; k < harmonics; ++k) s += amp[k] * std::sin(2.0 * kPi * f0 * (k + 1) * t + phase[k]);
    out.samples[i] = env * s;
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 0.0) {
    double g = 0.5 / peak;
    for (double& v : out.samples) v *= g;
  }
  return out;
}

AudioBuffer synth_noise(uint64_t seed, double dur_s, NoiseKind kind, long sample_rate) {
  long n = samples_for(dur_s, sample_rate);
  std::mt19937_64 rng(seed);
  bool have_spare = false;
  double spare = 0.0;

  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);

  if (kind == NoiseKind::White) {
    for (long i = 0; i < n; ++i) out.samples[i] = gaussian(rng, have_spare, spare);
  } else {
    // Shape white noise to power ~ 1/f (-3 dB per octave): scale bin k of a
    // full-length transform by 1/sqrt(k), keeping the spectrum conjugate
    // symmetric so the inverse stays real. DC is dropped.
    size_t m = next_power_of_two(static_cast<size_t>(n));
    std::vector<std::complex<double>> buf(m);
    for (size_t i = 0; i < m; ++i) buf[i] = gaussian(rng, have_spare, spare);
    fft_inplace(buf, false);
    buf[0] = 0.0;
    for (size_t k = 1; k <= m / 2; ++k) {
      double g = 1.0 / std::sqrt(static_cast<double>(k));
      buf[k] *= g;
      if (k != m - k) buf[m - k] *= g;
    }
    fft_inplace(buf, true);
    for (long i = 0; i < n; ++i) out.samples[i] = buf[static_cast<size_t>(i)].real();
  }

  double p = mean_power(out.samples);
  if (p > 0.0) {
    double g = 1.0 / std::sqrt(p);
    for (double& v : out.samples) v *= g;
  }
  return out;
}

MixtureSample mix_at_snr(const AudioBuffer& clean, const AudioBuffer& noise, double snr_db) {
  if (clean.size() != noise.size()) throw std::invalid_argument("mix_at_snr: length mismatch");
  if (clean.sample_rate != noise.sample_rate) throw std::invalid_argument("mix_at_snr: sample rate mismatch");
  if (clean.size() == 0) throw std::invalid_argument("mix_at_snr: empty inputs");
  double pc = mean_power(clean.samples);
  double pn = mean_power(noise.samples);
  if (pc <= 0.0) throw std::invalid_argument("mix_at_snr: silent clean signal");
  if (pn <= 0.0) throw std::invalid_argument("mix_at_snr: silent noise signal");

  double g = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  MixtureSample out;
  out.clean = clean;
  out.noise = noise;
  out.mixture = clean;
  for (long i = 0; i < clean.size(); ++i) {
    out.noise.samples[i] = g * noise.samples[i];
    out.mixture.samples[i] = clean.samples[i] + out.noise.samples[i];
  }
  out.snr_db = snr_db;
  return out;
}

uint64_t hash_mix(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MixtureSample make_training_sample(uint64_t master_seed, uint64_t epoch, uint64_t idx, double dur_s, double snr_lo,
                                   double snr_hi, bool validation, long sample_rate) {
  if (!(snr_lo <= snr_hi)) throw std::invalid_argument("make_training_sample: snr_lo > snr_hi");
  // Validation mixtures are held out by tag and never depend on the epoch.
  uint64_t tag = validation ? 0x56414cULL : 0x545241ULL;
  uint64_t base = hash_mix(hash_mix(master_seed, tag), validation ? idx : hash_mix(epoch, idx));
  uint64_t clean_seed = hash_mix(base, 1);
  uint64_t noise_seed = hash_mix(base, 2);
  std::mt19937_64 rng(hash_mix(base, 3));
  double snr = uniform_in(rng, snr_lo, snr_hi);
  NoiseKind kind = (rng() & 1) ? NoiseKind::Pink : NoiseKind::White;

  AudioBuffer clean = synth_clean(clean_seed, dur_s, sample_rate);
  AudioBuffer noise = synth_noise(noise_seed, dur_s, kind, sample_rate);
  return mix_at_snr(clean, noise, snr);
}

}  // namespace forknet
