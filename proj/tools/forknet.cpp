// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "CLI11.hpp"
#include "forknet/gradcheck.hpp"
#include "forknet/metrics.hpp"
#include "forknet/runconfig.hpp"
#include "forknet/wav.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace forknet;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RunConfig load_run_config(const std::string& config_path, const std::vector<std::string>& sets) {
  if (config_path.empty()) return RunConfig::from_text("", sets);
  return RunConfig::from_file(config_path, sets);
}

void copy_params(ForkNet& model, const ParamStore& src) {
  for (const std::string& name : model.params().names()) {
    if (!src.has(name)) throw std::runtime_error("checkpoint: missing parameter " + name);
    Tensor& dst = model.params().at(name);
    const Tensor& s = src.at(name);
    require(dst.shape() == s.shape(), "checkpoint: parameter shape mismatch");
    dst = s;
  }
}

ForkNet model_from_checkpoint(const std::string& path, Checkpoint* state_out = nullptr) {
  Checkpoint ck = load_checkpoint(path);
  ForkNetConfig cfg = ForkNetConfig::from_text(ck.config_text);
  ForkNet model(cfg, 0);
  copy_params(model, ck.params);
  if (state_out) *state_out = std::move(ck);
  return model;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets, const std::string& out_dir_flag,
              const std::string& resume_flag) {
  RunConfig rc = load_run_config(config_path, sets);
  if (!out_dir_flag.empty()) rc.out_dir = out_dir_flag;
  if (!resume_flag.empty()) rc.resume = resume_flag;

  std::string echo = rc.echo();
  std::cout << "# effective config\n" << echo;
  if (!rc.out_dir.empty()) {
    std::filesystem::create_directories(rc.out_dir);
    std::ofstream f(rc.out_dir + "/effective.cfg");
    f << echo;
  }

  ForkNet model(rc.model, rc.train.seed);
  TrainState resume_state;
  const TrainState* resume_ptr = nullptr;
  if (!rc.resume.empty()) {
    Checkpoint ck = load_checkpoint(rc.resume);
    if (ck.config_text != rc.model.to_text())
      throw std::runtime_error("resume: checkpoint model config does not match the run config");
    if (!ck.has_state) throw std::runtime_error("resume: checkpoint carries no optimizer state");
    copy_params(model, ck.params);
    resume_state = std::move(ck.state);
    resume_ptr = &resume_state;
  }

  TrainResult res = train(model, rc.train, rc.data, rc.loss, rc.out_dir, &std::cout, resume_ptr);
  double final_loss = res.step_loss.empty() ? 0.0 : res.step_loss.back();
  std::cout << "result=train steps=" << res.steps_run << " final_loss=" << num(final_loss)
            << " best_val=" << num(res.best_val) << " out_dir=" << (rc.out_dir.empty() ? "-" : rc.out_dir) << "\n";
  return 0;
}

int cmd_enhance(const std::string& in_path, const std::string& out_path, const std::string& ckpt, bool identity_mask) {
  AudioBuffer x = wav_read(in_path);
  AudioBuffer y;
  if (identity_mask) {
    // Transform-pipeline debug path: all-ones mask on the full-band grid.
    StftConfig cfg = StftConfig::paper_full_band();
    y = istft(stft(x, cfg), x.size());
    y.sample_rate = x.sample_rate;
  } else {
    if (ckpt.empty()) throw std::runtime_error("enhance: --checkpoint is required (or pass --identity-mask)");
    ForkNet model = model_from_checkpoint(ckpt);
    if (model.config().stft.sample_rate != x.sample_rate)
      throw std::runtime_error("enhance: input sample rate does not match the model");
    y = model.enhance(x);
  }
  wav_write(out_path, y);
  std::cout << "result=enhance in=" << in_path << " out=" << out_path << " samples=" << y.size() << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& config_path, const std::vector<std::string>& sets, long utts,
             uint64_t seed, double snr_low, double snr_high, double chunk_s) {
  ForkNet model = ckpt.empty() ? [&] {
    RunConfig rc = load_run_config(config_path, sets);
    return ForkNet(rc.model, rc.train.seed);
  }()
                               : model_from_checkpoint(ckpt);
  long sr = model.config().stft.sample_rate;
  double acc_noisy = 0.0, acc_enh = 0.0;
  for (long i = 0; i < utts; ++i) {
    MixtureSample smp =
        make_training_sample(seed, 0, static_cast<uint64_t>(i), chunk_s, snr_low, snr_high, /*validation=*/true, sr);
    acc_noisy += si_sdr(smp.mixture, smp.clean);
    acc_enh += si_sdr(model.enhance(smp.mixture), smp.clean);
  }
  double mean_noisy = acc_noisy / static_cast<double>(utts);
  double mean_enh = acc_enh / static_cast<double>(utts);
  std::cout << "result=eval utts=" << utts << " noisy_si_sdr=" << num(mean_noisy)
            << " enhanced_si_sdr=" << num(mean_enh) << " gain=" << num(mean_enh - mean_noisy) << "\n";
  return 0;
}

int cmd_gradcheck(uint64_t seed) {
  auto reports = gradcheck_suite(seed);
  bool all = true;
  double worst = 0.0;
  for (const auto& r : reports) {
    std::cout << "check=" << r.name << " max_rel_err=" << num(r.max_rel_err) << " coords=" << r.coords_checked
              << " status=" << (r.pass ? "ok" : "fail") << "\n";
    all = all && r.pass;
    worst = std::max(worst, r.max_rel_err);
  }
  std::cout << "result=gradcheck checks=" << reports.size() << " worst_rel_err=" << num(worst)
            << " status=" << (all ? "ok" : "fail") << "\n";
  return all ? 0 : 1;
}

int cmd_params(const std::string& config_path, const std::vector<std::string>& sets) {
  RunConfig rc = load_run_config(config_path, sets);
  ForkNet model(rc.model, 0);
  for (const auto& [section, count] : model.param_count_by_section())
    std::cout << "section=" << section << " params=" << count << "\n";
  std::cout << "result=params total=" << model.param_count() << "\n";
  return 0;
}

int cmd_ablate() {
  ForkNet ref1(ForkNetConfig::ref1(), 0);
  ForkNet ref2(ForkNetConfig::ref2(), 0);
  ForkNet full(ForkNetConfig::paper(), 0);
  long c1 = ref1.param_count(), c2 = ref2.param_count(), c3 = full.param_count();
  std::cout << "model=ref1 encoders=ri params=" << c1 << "\n";
  std::cout << "model=ref2 encoders=mag+ri params=" << c2 << "\n";
  std::cout << "model=forknet encoders=mag+ri+time params=" << c3 << "\n";
  bool ordered = c1 > c2 && c2 > c3;
  std::cout << "result=ablate ref1=" << c1 << " ref2=" << c2 << " forknet=" << c3
            << " ordering=" << (ordered ? "ok" : "violated") << "\n";
  return ordered ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ForkNet speech enhancement toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume, in_path, out_path, ckpt;
  std::vector<std::string> sets;
  bool identity_mask = false;
  uint64_t seed = 0;
  long utts = 8;
  double snr_low = 0.0, snr_high = 10.0, chunk_s = 1.0;

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Config file (key = value lines)");
  train->add_option("--set", sets, "Override, e.g. --set train.epochs=10");
  train->add_option("--out-dir", out_dir, "Checkpoint/log directory");
  train->add_option("--resume", resume, "Checkpoint to resume from");

  auto* enhance = app.add_subcommand("enhance", "Enhance a WAV file");
  enhance->add_option("--in", in_path, "Input WAV (mono, 16 kHz)")->required();
  enhance->add_option("--out", out_path, "Output WAV")->required();
  enhance->add_option("--checkpoint", ckpt, "Model checkpoint");
  enhance->add_flag("--identity-mask", identity_mask, "Bypass the model; STFT round trip only");

  auto* eval = app.add_subcommand("eval", "Mean SI-SDR over held-out synthetic mixtures");
  eval->add_option("--checkpoint", ckpt, "Model checkpoint (fresh model when omitted)");
  eval->add_option("--config", config_path, "Config file for a fresh model");
  eval->add_option("--set", sets, "Config override");
  eval->add_option("--utts", utts, "Number of mixtures");
  eval->add_option("--seed", seed, "Mixture seed");
  eval->add_option("--snr-low", snr_low, "Lowest mixture SNR (dB)");
  eval->add_option("--snr-high", snr_high, "Highest mixture SNR (dB)");
  eval->add_option("--chunk-s", chunk_s, "Mixture length (s)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gradcheck->add_option("--seed", seed, "Suite seed");

  auto* params = app.add_subcommand("params", "Parameter counts per section");
  params->add_option("--config", config_path, "Config file");
  params->add_option("--set", sets, "Config override");

  app.add_subcommand("ablate", "Encoder ablation parameter comparison");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("train")) return cmd_train(config_path, sets, out_dir, resume);
    if (app.got_subcommand("enhance")) return cmd_enhance(in_path, out_path, ckpt, identity_mask);
    if (app.got_subcommand("eval")) return cmd_eval(ckpt, config_path, sets, utts, seed, snr_low, snr_high, chunk_s);
    if (app.got_subcommand("gradcheck")) return cmd_gradcheck(seed);
    if (app.got_subcommand("params")) return cmd_params(config_path, sets);
    if (app.got_subcommand("ablate")) return cmd_ablate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
