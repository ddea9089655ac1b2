// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Release gate: nine self-contained checks, one PASS/FAIL line each, nonzero
// exit if any fail. Tolerances and runtime budgets are pinned here on purpose;
// loosening them is a behavior change, not a cleanup.

#include "forknet/gradcheck.hpp"
#include "forknet/loss.hpp"
#include "forknet/metrics.hpp"
#include "forknet/model.hpp"
#include "forknet/spectral.hpp"
#include "forknet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace forknet;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double secs(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

AudioBuffer random_audio(std::mt19937_64& rng, long n) {
  AudioBuffer x;
  x.samples.resize(static_cast<size_t>(n));
  for (double& v : x.samples) v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return x;
}

// The shared small trainable setup: gradcheck-scale widths on the full
// 32 ms / 50% framing, so checks 6-7 exercise the real front end.
ForkNetConfig small_model_cfg() {
  ForkNetConfig c = ForkNetConfig::tiny();
  c.stft = StftConfig::paper();
  c.seg_chunk = c.seg_hop = c.stft.hop_samples();
  return c;
}

// --- 1: analysis/synthesis round trip ---------------------------------------

Outcome run_round_trip() {
  auto t0 = Clock::now();
  const double kTol = 1e-6, kBudget = 10.0;
  StftConfig cfg = StftConfig::paper_full_band();
  std::mt19937_64 rng(2026);
  const long n = 16000;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    AudioBuffer x = random_audio(rng, n);
    AudioBuffer y = istft(stft(x, cfg), n);
    double num = 0.0, den = 0.0;
    for (long i = 512; i < n - 512; ++i) {
      double d = y.samples[static_cast<size_t>(i)] - x.samples[static_cast<size_t>(i)];
      num += d * d;
      den += x.samples[static_cast<size_t>(i)] * x.samples[static_cast<size_t>(i)];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  double el = secs(t0);
  return {worst < kTol && el < kBudget,
          fmt("50x1s full-band round trip: worst interior rel L2 %.3g (tol %.0e), %.1fs", worst, kTol, el)};
}

// --- 2: finite-difference gradients -----------------------------------------

Outcome run_gradients() {
  auto t0 = Clock::now();
  const double kBudget = 120.0;
  std::vector<GradCheckReport> reports = gradcheck_suite(0);
  bool all = true;
  double worst = 0.0;
  std::string worst_name = "-";
  for (const auto& r : reports) {
    all = all && r.pass;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_name = r.name;
    }
  }
  double el = secs(t0);
  return {all && el < kBudget, fmt("%zu checks incl. end-to-end model: worst rel err %.3g (%s, tol 1e-4), %.1fs",
                                   reports.size(), worst, worst_name.c_str(), el)};
}

// --- 3: causal frame dependence ---------------------------------------------

Outcome run_causality() {
  auto t0 = Clock::now();
  const double kTol = 1e-9, kBudget = 60.0;
  const long n = 3072;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ForkNetConfig cfg = (trial % 3 == 0)   ? ForkNetConfig::paper()
                        : (trial % 3 == 1) ? ForkNetConfig::ref1()
                                           : ForkNetConfig::ref2();
    ForkNet model(cfg, 40 + static_cast<uint64_t>(trial));
    std::mt19937_64 rng(500 + static_cast<uint64_t>(trial));
    AudioBuffer x = random_audio(rng, n);
    long m = 1024 + static_cast<long>(rng() % static_cast<uint64_t>(n - 2048));
    AudioBuffer xz = x;
    for (long i = m; i < n; ++i) xz.samples[static_cast<size_t>(i)] = 0.0;

    ComplexSpectrogram y1 = complex_mul(model.compute_mask(x), stft(x, cfg.stft));
    ComplexSpectrogram y2 = complex_mul(model.compute_mask(xz), stft(xz, cfg.stft));
    long hop = cfg.stft.hop_samples(), win = cfg.stft.win_samples(), F = y1.bins();
    for (long t = 0; t < y1.frames(); ++t) {
      if (t * hop + win > m) break;
      for (long f = 0; f < F; ++f) {
        worst = std::max(worst, std::abs(y1.real[t * F + f] - y2.real[t * F + f]));
        worst = std::max(worst, std::abs(y1.imag[t * F + f] - y2.imag[t * F + f]));
      }
    }
  }
  double el = secs(t0);
  return {worst < kTol && el < kBudget,
          fmt("20 trials, 3 configs: max past-frame change %.3g (tol %.0e), %.1fs", worst, kTol, el)};
}

// --- 4: parameter counts ----------------------------------------------------

Outcome run_param_counts() {
  auto t0 = Clock::now();
  const double kBudget = 5.0;
  long total = ForkNet(ForkNetConfig::paper(), 0).param_count();
  long r1 = ForkNet(ForkNetConfig::ref1(), 0).param_count();
  long r2 = ForkNet(ForkNetConfig::ref2(), 0).param_count();
  bool in_band = total >= 520000 && total <= 640000;
  bool ordered = r1 > r2 && r2 > total;
  double el = secs(t0);
  return {in_band && ordered && el < kBudget,
          fmt("forknet %ld in [0.52M, 0.64M], ordering %ld > %ld > %ld, %.1fs", total, r1, r2, total, el)};
}

// --- 5: loss identities -----------------------------------------------------

Outcome run_loss_identities() {
  auto t0 = Clock::now();
  const double kTol = 1e-10, kBudget = 5.0;
  std::mt19937_64 rng(9);
  const long T = 7, F = 9;
  LossConfig lc;

  ComplexSpectrogram s;
  s.real = Tensor({T, F});
  s.imag = Tensor({T, F});
  for (long i = 0; i < T * F; ++i) {
    s.real[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    s.imag[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }
  AudioBuffer w = random_audio(rng, 4000);
  double self = std::abs(total_loss(s, s, w, w, lc));

  // All-zero estimate against unit-magnitude targets: each bin contributes
  // 1 from the magnitude term and 1 from the compressed complex term.
  double closed_worst = 0.0;
  for (double c : {0.3, 0.6, 1.0}) {
    ComplexSpectrogram unit = s, zero = s;
    for (long i = 0; i < T * F; ++i) {
      double phi = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
      unit.real[i] = std::cos(phi);
      unit.imag[i] = std::sin(phi);
      zero.real[i] = 0.0;
      zero.imag[i] = 0.0;
    }
    closed_worst = std::max(closed_worst, std::abs(spec_loss(zero, unit, c) - 2.0 * T * F));
  }

  LossConfig no_mr = lc;
  no_mr.lambda = 0.0;
  AudioBuffer w2 = random_audio(rng, 4000);
  ComplexSpectrogram s2 = s;
  for (long i = 0; i < T * F; ++i) s2.real[i] += 0.25;
  double degen = std::abs(total_loss(s2, s, w2, w, no_mr) - spec_loss(s2, s, lc.c1));

  double worst = std::max({self, closed_worst, degen});
  double el = secs(t0);
  return {worst < kTol && el < kBudget,
          fmt("self %.3g, zero-est closed form %.3g, lambda=0 %.3g (tol %.0e), %.1fs", self, closed_worst, degen,
              kTol, el)};
}

// --- 6: overfit one mixture -------------------------------------------------

struct OverfitRun {
  std::vector<double> loss_by_step;
  long done_step = -1;
  double gain = 0.0, frac = 1.0;
};

OverfitRun run_overfit_loop() {
  OverfitRun out;
  ForkNet model(small_model_cfg(), 1);
  AudioBuffer clean = synth_clean(hash_mix(1, 1), 1.0);
  AudioBuffer noise = synth_noise(hash_mix(1, 2), 1.0, NoiseKind::White);
  MixtureSample smp = mix_at_snr(clean, noise, 5.0);
  double noisy = si_sdr(smp.mixture, smp.clean);

  LossConfig lc;
  AdamState adam;
  adam_init(adam, model.params());
  double init = -1.0;
  for (int step = 0; step < 500; ++step) {
    Tape tape;
    ParamLeaves leaves(tape, model.params());
    nn::Ctx ctx{tape, leaves};
    Var loss = sample_loss_graph(model, ctx, smp, lc);
    double lv = loss.t()[0];
    out.loss_by_step.push_back(lv);
    if (init < 0) init = lv;
    tape.backward(loss);
    std::vector<Tensor> grads;
    for (const auto& name : model.params().names()) grads.push_back(leaves.grad_of(tape, name));
    clip_grad_norm(grads, 5.0);
    adam_step(model.params(), grads, adam, 2e-3);
    if (step % 25 == 24) {
      out.frac = lv / init;
      out.gain = si_sdr(model.enhance(smp.mixture), smp.clean) - noisy;
      if (out.frac <= 0.1 && out.gain >= 10.0) {
        out.done_step = step;
        break;
      }
    }
  }
  return out;
}

Outcome run_overfit(OverfitRun& run) {
  auto t0 = Clock::now();
  const double kBudget = 300.0;
  run = run_overfit_loop();
  double el = secs(t0);
  bool pass = run.done_step >= 0 && el < kBudget;
  return {pass, fmt("loss frac %.3f (<=0.1), si-sdr gain %.2f dB (>=10) at step %ld of 500, %.0fs", run.frac,
                    run.gain, run.done_step, el)};
}

// --- 7: generalization to held-out mixtures ---------------------------------

struct GeneralizeRun {
  std::vector<double> loss_by_step;
  double noisy_mean = 0.0, enhanced_mean = 0.0;
};

GeneralizeRun run_generalize_loop() {
  GeneralizeRun out;
  ForkNet model(small_model_cfg(), 2);
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.chunk_s = 0.25;
  tc.snr_low_db = 0.0;
  tc.snr_high_db = 10.0;
  tc.epochs = 10;
  tc.batch_size = 2;
  tc.seed = 3;
  DatasetSpec ds;
  ds.utts_per_epoch = 128;
  ds.val_utts = 8;
  LossConfig lc;

  std::vector<MixtureSample> held;
  for (long i = 0; i < 8; ++i)
    held.push_back(make_training_sample(tc.seed, 0, static_cast<uint64_t>(i), 1.0, 0.0, 10.0, /*validation=*/true));
  for (const auto& h : held) out.noisy_mean += si_sdr(h.mixture, h.clean) / 8.0;

  TrainResult res = train(model, tc, ds, lc, "", nullptr);
  out.loss_by_step = std::move(res.step_loss);
  for (const auto& h : held) out.enhanced_mean += si_sdr(model.enhance(h.mixture), h.clean) / 8.0;
  return out;
}

Outcome run_generalize(GeneralizeRun& run) {
  auto t0 = Clock::now();
  const double kBudget = 900.0;
  run = run_generalize_loop();
  double el = secs(t0);
  double gain = run.enhanced_mean - run.noisy_mean;
  return {gain >= 3.0 && el < kBudget,
          fmt("8 held-out: noisy %.2f -> enhanced %.2f dB, gain %.2f (>=3), %.0fs", run.noisy_mean,
              run.enhanced_mean, gain, el)};
}

// --- 8: si-sdr unit suite ---------------------------------------------------

Outcome run_si_sdr_suite() {
  auto t0 = Clock::now();
  AudioBuffer ref = synth_clean(5, 0.5);
  AudioBuffer twice = ref;
  for (double& v : twice.samples) v *= 2.0;
  bool caps = si_sdr(ref, ref) == 100.0 && si_sdr(twice, ref) == 100.0;

  // Orthogonal construction: ref flips sign every sample, the perturbation
  // every two samples; over a multiple of 4 both are zero-mean and orthogonal.
  const long L = 4000;
  AudioBuffer r, e;
  r.samples.resize(L);
  e.samples.resize(L);
  double b = 1.0 / std::sqrt(10.0);
  for (long i = 0; i < L; ++i) {
    r.samples[static_cast<size_t>(i)] = (i % 2 == 0) ? 1.0 : -1.0;
    double nz = ((i / 2) % 2 == 0) ? b : -b;
    e.samples[static_cast<size_t>(i)] = r.samples[static_cast<size_t>(i)] + nz;
  }
  double ortho = si_sdr(e, r);

  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    AudioBuffer a = random_audio(rng, 600), c = random_audio(rng, 600);
    double base = si_sdr(a, c);
    double alpha = 0.1 + 9.9 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    if (k % 3 == 0) alpha = -alpha;
    AudioBuffer sa = a;
    for (double& v : sa.samples) v *= alpha;
    worst = std::max(worst, std::abs(si_sdr(sa, c) - base));
  }
  double el = secs(t0);
  bool pass = caps && std::abs(ortho - 10.0) < 1e-6 && worst < 1e-9;
  return {pass, fmt("caps at +100 %s, orthogonal 10:1 -> %.8f dB, scale drift %.3g (tol 1e-9), %.1fs",
                    caps ? "ok" : "BROKEN", ortho, worst, el)};
}

// --- 9: bitwise determinism of 6 and 7 --------------------------------------

Outcome run_determinism(const OverfitRun& first6, const GeneralizeRun& first7) {
  auto t0 = Clock::now();
  OverfitRun again6 = run_overfit_loop();
  GeneralizeRun again7 = run_generalize_loop();
  bool same6 = again6.loss_by_step == first6.loss_by_step;
  bool same7 = again7.loss_by_step == first7.loss_by_step;
  double el = secs(t0);
  return {same6 && same7,
          fmt("overfit trajectory (%zu steps) %s, training trajectory (%zu steps) %s, %.0fs",
              first6.loss_by_step.size(), same6 ? "bitwise equal" : "DIVERGED", first7.loss_by_step.size(),
              same7 ? "bitwise equal" : "DIVERGED", el)};
}

}  // namespace

int main() {
  OverfitRun overfit;
  GeneralizeRun generalize;
  struct Entry {
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {"stft round trip", [] { return run_round_trip(); }},
      {"gradient suite", [] { return run_gradients(); }},
      {"causality", [] { return run_causality(); }},
      {"parameter counts", [] { return run_param_counts(); }},
      {"loss identities", [] { return run_loss_identities(); }},
      {"overfit", [&overfit] { return run_overfit(overfit); }},
      {"generalization", [&generalize] { return run_generalize(generalize); }},
      {"si-sdr suite", [] { return run_si_sdr_suite(); }},
      {"determinism", [&overfit, &generalize] { return run_determinism(overfit, generalize); }},
  };

  int failures = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    Outcome o = entries[i].run();
    std::printf("[%s] criterion %zu: %s — %s\n", o.pass ? "PASS" : "FAIL", i + 1, entries[i].label,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
