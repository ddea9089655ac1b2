// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/training.hpp"

#include "forknet/metrics.hpp"
#include "forknet/ops.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace forknet {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MixtureSample fixed_sample(const DatasetSpec& ds, double dur_s, long sample_rate) {
  AudioBuffer clean = synth_clean(hash_mix(ds.fixed_seed, 1), dur_s, sample_rate);
  AudioBuffer noise = synth_noise(hash_mix(ds.fixed_seed, 2), dur_s, NoiseKind::White, sample_rate);
  return mix_at_snr(clean, noise, ds.fixed_snr_db);
}

double validation_score(const ForkNet& model, const TrainConfig& tc, const DatasetSpec& ds) {
  long sr = model.config().stft.sample_rate;
  if (ds.fixed_single) {
    MixtureSample smp = fixed_sample(ds, tc.chunk_s, sr);
    return si_sdr(model.enhance(smp.mixture), smp.clean);
  }
  double acc = 0.0;
  for (long i = 0; i < ds.val_utts; ++i) {
    MixtureSample smp = make_training_sample(tc.seed, 0, static_cast<uint64_t>(i), tc.chunk_s, tc.snr_low_db,
                                             tc.snr_high_db, /*validation=*/true, sr);
    acc += si_sdr(model.enhance(smp.mixture), smp.clean);
  }
  return acc / static_cast<double>(ds.val_utts);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("train: decay must be in (0, 1]");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("train: clip_norm must be positive");
  if (!(chunk_s > 0.0)) throw std::invalid_argument("train: chunk_s must be positive");
  if (!(snr_low_db <= snr_high_db)) throw std::invalid_argument("train: snr_low_db > snr_high_db");
  if (epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be at least 1");
}

void adam_init(AdamState& st, const ParamStore& params) {
  st.t = 0;
  st.m.clear();
  st.v.clear();
  for (const auto& name : params.names()) {
    st.m.push_back(Tensor(params.at(name).shape()));
    st.v.push_back(Tensor(params.at(name).shape()));
  }
}

void adam_step(ParamStore& params, const std::vector<Tensor>& grads, AdamState& st, double lr) {
  const auto& names = params.names();
  if (grads.size() != names.size() || st.m.size() != names.size() || st.v.size() != names.size())
    throw std::invalid_argument("adam_step: state/gradient count mismatch");
  for (size_t i = 0; i < names.size(); ++i) {
    if (grads[i].shape() != params.at(names[i]).shape())
      throw std::invalid_argument("adam_step: gradient shape mismatch for " + names[i]);
    if (!grads[i].all_finite()) throw std::runtime_error("adam_step: non-finite gradient for " + names[i]);
  }

  ++st.t;
  double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  for (size_t i = 0; i < names.size(); ++i) {
    Tensor& p = params.at(names[i]);
    Tensor& m = st.m[i];
    Tensor& v = st.v[i];
    for (long j = 0; j < p.numel(); ++j) {
      double g = grads[i][j];
      m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g;
      v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g * g;
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_grad_norm: bound must be positive");
  double sq = 0.0;
  for (const Tensor& g : grads)
    for (long j = 0; j < g.numel(); ++j) sq += g[j] * g[j];
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    double s = max_norm / norm;
    for (Tensor& g : grads)
      for (long j = 0; j < g.numel(); ++j) g[j] *= s;
  }
  return norm;
}

double lr_at(long epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw std::invalid_argument("lr_at: negative epoch");
  return cfg.lr * std::pow(cfg.decay, static_cast<double>(epoch / 2));
}

Var sample_loss_graph(const ForkNet& model, nn::Ctx& ctx, const MixtureSample& sample, const LossConfig& lc) {
  const detail::Framing fr = detail::Framing::of(model.config().stft);
  long n = sample.mixture.size();
  Tensor mixw({n}), cleanw({n});
  for (long i = 0; i < n; ++i) {
    mixw[i] = sample.mixture.samples[static_cast<size_t>(i)];
    cleanw[i] = sample.clean.samples[static_cast<size_t>(i)];
  }
  Var vmix = Tape::constant(std::move(mixw));
  Var vclean = Tape::constant(std::move(cleanw));

  Tape& t = ctx.tape;
  Var noisy_spec = ops::stft_op(t, vmix, fr);
  Var clean_spec = ops::stft_op(t, vclean, fr);
  Var mask = model.forward_mask(ctx, noisy_spec, vmix);
  Var est_spec = ops::complex_mul(t, mask, noisy_spec);
  Var est_wave = ops::istft_op(t, est_spec, fr, n);
  return total_loss_t(t, est_spec, clean_spec, est_wave, vclean, lc);
}

TrainResult train(ForkNet& model, const TrainConfig& tc, const DatasetSpec& ds, const LossConfig& lc,
                  const std::string& checkpoint_dir, std::ostream* log, const TrainState* resume) {
  tc.validate();
  lc.validate();
  if (ds.utts_per_epoch < 1) throw std::invalid_argument("train: utts_per_epoch must be at least 1");
  if (!ds.fixed_single && ds.val_utts < 1) throw std::invalid_argument("train: val_utts must be at least 1");
  long sr = model.config().stft.sample_rate;

  AdamState adam;
  adam_init(adam, model.params());
  long start_epoch = 0;
  uint64_t global_step = 0;
  double best_val = -1e300;
  if (resume) {
    if (resume->m.size() != adam.m.size() || resume->v.size() != adam.v.size())
      throw std::invalid_argument("train: resume state does not match the model's parameters");
    adam.t = resume->adam_t;
    adam.m = resume->m;
    adam.v = resume->v;
    start_epoch = static_cast<long>(resume->next_epoch);
    global_step = resume->global_step;
    best_val = resume->best_val;
  }

  TrainResult res;
  res.best_val = best_val;
  long steps_per_epoch = (ds.utts_per_epoch + tc.batch_size - 1) / tc.batch_size;

  for (long epoch = start_epoch; epoch < tc.epochs; ++epoch) {
    double lr = lr_at(epoch, tc);
    for (long step = 0; step < steps_per_epoch; ++step) {
      Tape tape;
      ParamLeaves leaves(tape, model.params());
      nn::Ctx ctx{tape, leaves};

      long first = step * tc.batch_size;
      long count = std::min(tc.batch_size, ds.utts_per_epoch - first);
      Var loss;
      for (long b = 0; b < count; ++b) {
        MixtureSample smp =
            ds.fixed_single ? fixed_sample(ds, tc.chunk_s, sr)
                            : make_training_sample(tc.seed, static_cast<uint64_t>(epoch),
                                                   static_cast<uint64_t>(first + b), tc.chunk_s, tc.snr_low_db,
                                                   tc.snr_high_db, /*validation=*/false, sr);
        Var term = sample_loss_graph(model, ctx, smp, lc);
        loss = (b == 0) ? term : ops::add(tape, loss, term);
      }
      if (count > 1) loss = ops::scale(tape, loss, 1.0 / static_cast<double>(count));

      double lval = loss.t()[0];
      if (!std::isfinite(lval))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(step));
      tape.backward(loss);
      std::vector<Tensor> grads = leaves.grads(tape);
      double gnorm = clip_grad_norm(grads, tc.clip_norm);
      adam_step(model.params(), grads, adam, lr);

      ++global_step;
      res.step_loss.push_back(lval);
      ++res.steps_run;
      if (log)
        *log << "step=" << global_step << " epoch=" << epoch << " lr=" << num(lr) << " loss=" << num(lval)
             << " grad_norm=" << num(gnorm) << "\n";
    }

    double val = validation_score(model, tc, ds);
    res.epoch_val_si_sdr.push_back(val);
    bool improved = val > best_val;
    if (improved) best_val = val;
    res.best_val = best_val;
    if (log) *log << "epoch=" << epoch << " val_si_sdr=" << num(val) << " best_val=" << num(best_val) << "\n";

    if (!checkpoint_dir.empty()) {
      TrainState state;
      state.adam_t = adam.t;
      state.next_epoch = static_cast<uint64_t>(epoch + 1);
      state.global_step = global_step;
      state.best_val = best_val;
      state.m = adam.m;
      state.v = adam.v;
      save_checkpoint(checkpoint_dir + "/last.ckpt", model.config().to_text(), model.params(), &state);
      if (improved) save_checkpoint(checkpoint_dir + "/best.ckpt", model.config().to_text(), model.params(), &state);
    }
  }
  return res;
}

}  // namespace forknet
