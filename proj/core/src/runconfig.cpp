// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/runconfig.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace forknet {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0') bad_value(key, value);
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0') bad_value(key, value);
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0') bad_value(key, value);
  return static_cast<uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) bad_value(key, value);
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += num(xs[i]);
  }
  return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "model.preset") {
    if (value == "paper")
      model = ForkNetConfig::paper();
    else if (value == "ref1")
      model = ForkNetConfig::ref1();
    else if (value == "ref2")
      model = ForkNetConfig::ref2();
    else if (value == "tiny")
      model = ForkNetConfig::tiny();
    else if (value == "tiny_train")
      model = ForkNetConfig::tiny_train();
    else
      bad_value(key, value);
  } else if (key == "model.d1")
    model.d1 = parse_long(key, value);
  else if (key == "model.d2")
    model.d2 = parse_long(key, value);
  else if (key == "model.d3")
    model.d3 = parse_long(key, value);
  else if (key == "model.d")
    model.d = parse_long(key, value);
  else if (key == "model.blocks")
    model.blocks = parse_long(key, value);
  else if (key == "model.heads")
    model.heads = parse_long(key, value);
  else if (key == "model.dense_depth")
    model.dense_depth = parse_long(key, value);
  else if (key == "model.te_window")
    model.te_window = parse_long(key, value);
  else if (key == "model.seg_chunk") {
    model.seg_chunk = parse_long(key, value);
    seg_set_ = true;
  } else if (key == "model.seg_hop") {
    model.seg_hop = parse_long(key, value);
    seg_set_ = true;
  } else if (key == "stft.win_ms")
    model.stft.win_ms = parse_double(key, value);
  else if (key == "stft.fft_size")
    model.stft.fft_size = parse_long(key, value);
  else if (key == "stft.remove_dc")
    model.stft.remove_dc = parse_bool(key, value);
  else if (key == "stft.sample_rate")
    model.stft.sample_rate = parse_long(key, value);
  else if (key == "loss.c1")
    loss.c1 = parse_double(key, value);
  else if (key == "loss.c2")
    loss.c2 = parse_double(key, value);
  else if (key == "loss.lambda")
    loss.lambda = parse_double(key, value);
  else if (key == "loss.mr_windows_ms")
    loss.mr_windows_ms = parse_list(key, value);
  else if (key == "loss.sample_rate") {
    loss.sample_rate = parse_long(key, value);
    loss_sr_set_ = true;
  } else if (key == "train.lr")
    train.lr = parse_double(key, value);
  else if (key == "train.decay")
    train.decay = parse_double(key, value);
  else if (key == "train.clip_norm")
    train.clip_norm = parse_double(key, value);
  else if (key == "train.chunk_s")
    train.chunk_s = parse_double(key, value);
  else if (key == "train.snr_low_db")
    train.snr_low_db = parse_double(key, value);
  else if (key == "train.snr_high_db")
    train.snr_high_db = parse_double(key, value);
  else if (key == "train.epochs")
    train.epochs = parse_long(key, value);
  else if (key == "train.batch_size")
    train.batch_size = parse_long(key, value);
  else if (key == "train.seed")
    train.seed = parse_u64(key, value);
  else if (key == "data.fixed_single")
    data.fixed_single = parse_bool(key, value);
  else if (key == "data.fixed_seed")
    data.fixed_seed = parse_u64(key, value);
  else if (key == "data.fixed_snr_db")
    data.fixed_snr_db = parse_double(key, value);
  else if (key == "data.utts_per_epoch")
    data.utts_per_epoch = parse_long(key, value);
  else if (key == "data.val_utts")
    data.val_utts = parse_long(key, value);
  else if (key == "paths.out_dir")
    out_dir = value;
  else if (key == "paths.resume")
    resume = value;
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void RunConfig::finalize() {
  // The dual-path segmentation follows the STFT framing unless pinned by hand.
  if (!seg_set_) {
    model.seg_chunk = model.stft.hop_samples();
    model.seg_hop = model.stft.hop_samples();
  }
  if (!loss_sr_set_) loss.sample_rate = model.stft.sample_rate;
  model.validate();
  train.validate();
  loss.validate();
}

RunConfig RunConfig::from_text(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig rc;
  std::stringstream ss(text);
  std::string line;
  long lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + ": expected key = value");
    rc.apply(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  for (const std::string& o : overrides) {
    auto [k, v] = split_assignment(o);
    rc.apply(k, v);
  }
  rc.finalize();
  return rc;
}

RunConfig RunConfig::from_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), overrides);
}

std::string RunConfig::echo() const {
  std::string o;
  auto kv = [&o](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
  auto kl = [&kv](const std::string& k, long v) { kv(k, std::to_string(v)); };
  auto kd = [&kv](const std::string& k, double v) { kv(k, num(v)); };
  auto kb = [&kv](const std::string& k, bool v) { kv(k, v ? "true" : "false"); };

  kl("model.d1", model.d1);
  kl("model.d2", model.d2);
  kl("model.d3", model.d3);
  kl("model.d", model.d);
  kl("model.blocks", model.blocks);
  kl("model.heads", model.heads);
  kl("model.dense_depth", model.dense_depth);
  kl("model.te_window", model.te_window);
  kl("model.seg_chunk", model.seg_chunk);
  kl("model.seg_hop", model.seg_hop);
  kd("stft.win_ms", model.stft.win_ms);
  kl("stft.fft_size", model.stft.fft_size);
  kb("stft.remove_dc", model.stft.remove_dc);
  kl("stft.sample_rate", model.stft.sample_rate);
  kd("loss.c1", loss.c1);
  kd("loss.c2", loss.c2);
  kd("loss.lambda", loss.lambda);
  kv("loss.mr_windows_ms", join(loss.mr_windows_ms));
  kl("loss.sample_rate", loss.sample_rate);
  kd("train.lr", train.lr);
  kd("train.decay", train.decay);
  kd("train.clip_norm", train.clip_norm);
  kd("train.chunk_s", train.chunk_s);
  kd("train.snr_low_db", train.snr_low_db);
  kd("train.snr_high_db", train.snr_high_db);
  kl("train.epochs", train.epochs);
  kl("train.batch_size", train.batch_size);
  kv("train.seed", std::to_string(train.seed));
  kb("data.fixed_single", data.fixed_single);
  kv("data.fixed_seed", std::to_string(data.fixed_seed));
  kd("data.fixed_snr_db", data.fixed_snr_db);
  kl("data.utts_per_epoch", data.utts_per_epoch);
  kl("data.val_utts", data.val_utts);
  kv("paths.out_dir", out_dir);
  kv("paths.resume", resume);
  return o;
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  size_t eq = s.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value, got '" + s + "'");
  return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

}  // namespace forknet
