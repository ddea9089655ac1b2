// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/checkpoint.hpp"
#include "forknet/loss.hpp"
#include "forknet/model.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace forknet {

struct TrainConfig {
  double lr = 4e-4;
  double decay = 0.98;      // applied every two epochs
  double clip_norm = 5.0;   // global L2 bound
  double chunk_s = 4.0;     // utterance length in seconds
  double snr_low_db = -5.0;
  double snr_high_db = 20.0;
  long epochs = 1;
  long batch_size = 2;
  uint64_t seed = 0;

  void validate() const;
};

/// What the loop trains on. Dynamic mode synthesizes fresh mixtures per
/// (epoch, index); fixed mode repeats one deterministic mixture every step
/// (the overfit setting).
struct DatasetSpec {
  bool fixed_single = false;
  uint64_t fixed_seed = 1;
  double fixed_snr_db = 5.0;
  long utts_per_epoch = 64;
  long val_utts = 8;
};

struct TrainResult {
  std::vector<double> step_loss;
  std::vector<double> epoch_val_si_sdr;
  double best_val = -1e300;
  long steps_run = 0;
};

// --- synthetic data ---------------------------------------------------------

enum class NoiseKind { White, Pink };

/// Harmonic stack (3-6 partials, f0 in [100, 300] Hz) with slow amplitude
/// modulation, peak-normalized to 0.5. Deterministic per seed.
AudioBuffer synth_clean(uint64_t seed, double dur_s, long sample_rate = 16000);
/// Unit-RMS white Gaussian or 1/f-shaped noise. Deterministic per seed.
AudioBuffer synth_noise(uint64_t seed, double dur_s, NoiseKind kind, long sample_rate = 16000);

struct MixtureSample {
  AudioBuffer clean;
  AudioBuffer noise;  // already scaled: mixture = clean + noise exactly
  AudioBuffer mixture;
  double snr_db = 0.0;
};

/// Scales noise so 10*log10(P_clean / P_noise) = snr_db and adds.
MixtureSample mix_at_snr(const AudioBuffer& clean, const AudioBuffer& noise, double snr_db);

/// Stateless per-sample seed derivation (splitmix-style), so data generation
/// is identical regardless of evaluation order and across resumes.
uint64_t hash_mix(uint64_t a, uint64_t b);

/// The mixture used at (epoch, idx) of a run, or a held-out validation
/// mixture when validation is set (those ignore the epoch).
MixtureSample make_training_sample(uint64_t master_seed, uint64_t epoch, uint64_t idx, double dur_s, double snr_lo,
                                   double snr_hi, bool validation, long sample_rate = 16000);

// --- optimizer --------------------------------------------------------------

struct AdamState {
  uint64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

void adam_init(AdamState& st, const ParamStore& params);
/// One Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias correction).
/// Throws on non-finite gradients; parameters are untouched in that case.
void adam_step(ParamStore& params, const std::vector<Tensor>& grads, AdamState& st, double lr);

/// Scales all gradients by max_norm/g when the global L2 norm g exceeds
/// max_norm. Returns the pre-clip global norm.
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm);

/// lr * decay^floor(epoch/2).
double lr_at(long epoch, const TrainConfig& cfg);

// --- loop -------------------------------------------------------------------

/// Per-step: synthesize batch, forward, total loss (batch mean), backward,
/// clip, Adam. Per-epoch: validation SI-SDR on held-out mixtures and
/// best/last checkpoints when checkpoint_dir is nonempty. Throws
/// std::runtime_error with a diagnostic on non-finite loss.
TrainResult train(ForkNet& model, const TrainConfig& tc, const DatasetSpec& ds, const LossConfig& lc,
                  const std::string& checkpoint_dir, std::ostream* log, const TrainState* resume = nullptr);

/// Per-sample differentiable loss graph: mask -> masked spectrum -> waveform
/// -> total loss against the clean targets. Exposed for gradient checks.
Var sample_loss_graph(const ForkNet& model, nn::Ctx& ctx, const MixtureSample& sample, const LossConfig& lc);

}  // namespace forknet
