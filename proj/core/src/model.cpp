// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/model.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace forknet {

void ForkNetConfig::validate() const {
  require(d >= 1, "config: fusion width d must be >= 1");
  require(d1 >= 0 && d2 >= 0 && d3 >= 0, "config: encoder widths must be >= 0");
  require(d1 + d2 + d3 == 2 * d, "config: encoder widths must satisfy d1 + d2 + d3 = 2d");
  require(blocks >= 1, "config: at least one dual-path block required");
  require(heads >= 1 && d % heads == 0, "config: heads must divide d");
  require(dense_depth >= 1, "config: dense depth must be >= 1");
  stft.validate();
  require(stft.remove_dc, "config: the model operates on DC-removed spectra");
  require(te_window >= 1, "config: time-encoder window must be >= 1");
  require(seg_chunk == seg_hop, "config: segmentation must use abutting chunks (chunk = hop)");
  require(seg_chunk == stft.hop_samples(), "config: segmentation chunk must equal the STFT hop");
  require(seg_chunk == stft.bins(), "config: segmentation chunk must equal the bin count F");
}

ForkNetConfig ForkNetConfig::paper() { return ForkNetConfig{}; }

ForkNetConfig ForkNetConfig::ref1() {
  ForkNetConfig c;
  c.d1 = 0;
  c.d2 = 64;
  c.d3 = 0;
  return c;
}

ForkNetConfig ForkNetConfig::ref2() {
  ForkNetConfig c;
  c.d1 = 32;
  c.d2 = 32;
  c.d3 = 0;
  return c;
}

namespace {
ForkNetConfig tiny_with_window(long win_samples) {
  ForkNetConfig c;
  c.d1 = 6;
  c.d2 = 6;
  c.d3 = 4;
  c.d = 8;
  c.blocks = 2;
  c.heads = 2;
  c.stft = StftConfig::small(win_samples);
  c.seg_chunk = c.seg_hop = c.stft.hop_samples();
  return c;
}
}  // namespace

ForkNetConfig ForkNetConfig::tiny() { return tiny_with_window(16); }
ForkNetConfig ForkNetConfig::tiny_train() { return tiny_with_window(64); }

std::string ForkNetConfig::to_text() const {
  char buf[64];
  std::ostringstream os;
  auto put_long = [&](const char* k, long v) { os << k << "=" << v << "\n"; };
  put_long("d1", d1);
  put_long("d2", d2);
  put_long("d3", d3);
  put_long("d", d);
  put_long("blocks", blocks);
  put_long("heads", heads);
  put_long("dense_depth", dense_depth);
  std::snprintf(buf, sizeof(buf), "%.17g", stft.win_ms);
  os << "win_ms=" << buf << "\n";
  put_long("fft", stft.fft_size);
  put_long("remove_dc", stft.remove_dc ? 1 : 0);
  put_long("sr", stft.sample_rate);
  put_long("te_window", te_window);
  put_long("seg_chunk", seg_chunk);
  put_long("seg_hop", seg_hop);
  return os.str();
}

ForkNetConfig ForkNetConfig::from_text(const std::string& text) {
  ForkNetConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    require(eq != std::string::npos, "config text: expected key=value lines");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "d1") c.d1 = std::atol(val.c_str());
    else if (key == "d2") c.d2 = std::atol(val.c_str());
    else if (key == "d3") c.d3 = std::atol(val.c_str());
    else if (key == "d") c.d = std::atol(val.c_str());
    else if (key == "blocks") c.blocks = std::atol(val.c_str());
    else if (key == "heads") c.heads = std::atol(val.c_str());
    else if (key == "dense_depth") c.dense_depth = std::atol(val.c_str());
    else if (key == "win_ms") c.stft.win_ms = std::atof(val.c_str());
    else if (key == "fft") c.stft.fft_size = std::atol(val.c_str());
    else if (key == "remove_dc") c.stft.remove_dc = std::atol(val.c_str()) != 0;
    else if (key == "sr") c.stft.sample_rate = std::atol(val.c_str());
    else if (key == "te_window") c.te_window = std::atol(val.c_str());
    else if (key == "seg_chunk") c.seg_chunk = std::atol(val.c_str());
    else if (key == "seg_hop") c.seg_hop = std::atol(val.c_str());
    else throw std::invalid_argument("config text: unknown key: " + key);
  }
  return c;
}

DppBlock::DppBlock(ParamStore& ps, ParamInit& init, const std::string& prefix, long d, long heads, long ffn_hidden) {
  temporal = nn::SubbandTemporal(ps, init, prefix + ".temporal", d);
  spectral = nn::TransformerLayer(ps, init, prefix + ".spectral", d, heads, ffn_hidden);
}

Var DppBlock::forward(nn::Ctx& c, const Var& r) const { return spectral.forward(c, temporal.forward(c, r)); }

ForkNet::ForkNet(ForkNetConfig cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  ParamInit init(seed);
  has_mag_ = cfg_.d1 > 0;
  has_ri_ = cfg_.d2 > 0;
  has_time_ = cfg_.d3 > 0;
  if (has_mag_) mag_enc_ = nn::SpectralEncoder(params_, init, "mag_enc", 1, cfg_.d1, cfg_.dense_depth);
  if (has_ri_) ri_enc_ = nn::SpectralEncoder(params_, init, "ri_enc", 2, cfg_.d2, cfg_.dense_depth);
  if (has_time_) time_enc_ = nn::TimeEncoder(params_, init, "time_enc", cfg_.d3, cfg_.te_window);
  fuse_ = nn::PointwiseConv(params_, init, "fuse", 2 * cfg_.d, cfg_.d);
  blocks_.reserve(static_cast<size_t>(cfg_.blocks));
  for (long b = 0; b < cfg_.blocks; ++b) {
    blocks_.emplace_back(params_, init, "blocks." + std::to_string(b), cfg_.d, cfg_.heads, 2 * cfg_.d);
  }
  decoder_ = nn::Decoder(params_, init, "decoder", cfg_.d, cfg_.dense_depth);
  // Start near the identity mask (1 + 0j): the untrained model then passes
  // audio through instead of attenuating it, and training refines from there.
  params_.at("decoder.out.b")[0] = 1.0;
}

std::vector<std::pair<std::string, long>> ForkNet::param_count_by_section() const {
  std::vector<std::pair<std::string, long>> out;
  auto push = [&](const std::string& sec) {
    long n = params_.param_count_prefix(sec + ".");
    if (n > 0) out.emplace_back(sec, n);
  };
  push("mag_enc");
  push("ri_enc");
  push("time_enc");
  push("fuse");
  for (long b = 0; b < cfg_.blocks; ++b) push("blocks." + std::to_string(b));
  push("decoder");
  return out;
}

Var ForkNet::forward_mask(nn::Ctx& c, const Var& spec, const Var& wave) const {
  require(spec.t().rank() == 3 && spec.t().dim(0) == 2, "forward_mask: spectrogram tensor must be {2,T,F}");
  const long T = spec.t().dim(1), F = spec.t().dim(2);
  require(F == cfg_.stft.bins(), "forward_mask: bin count does not match the configured framing");

  std::vector<Var> branches;
  if (has_mag_) branches.push_back(mag_enc_.forward(c, ops::complex_abs(c.tape, spec)));
  if (has_ri_) branches.push_back(ri_enc_.forward(c, spec));
  if (has_time_) branches.push_back(time_enc_.forward(c, wave, T, cfg_.seg_chunk));
  Var h = branches.size() == 1 ? branches[0] : ops::concat_rows(c.tape, branches);
  Var r = fuse_.forward(c, h);
  for (const DppBlock& blk : blocks_) r = blk.forward(c, r);
  return decoder_.forward(c, r);
}

AudioBuffer ForkNet::enhance(const AudioBuffer& x) const {
  require(!x.samples.empty(), "enhance: input must be nonempty");
  require(x.sample_rate == cfg_.stft.sample_rate, "enhance: sample rate does not match the model");
  const long n = x.size();
  detail::Framing fr = detail::Framing::of(cfg_.stft);

  Tape tape(false);
  ParamLeaves leaves(tape, params_);
  nn::Ctx ctx{tape, leaves};
  Var wave = Tape::constant(Tensor::from({n}, x.samples));
  Var spec = ops::stft_op(tape, wave, fr);
  Var mask = forward_mask(ctx, spec, wave);
  Var y_spec = ops::complex_mul(tape, mask, spec);
  Var y = ops::istft_op(tape, y_spec, fr, n);
  require(y.t().all_finite(), "enhance: produced non-finite samples");

  AudioBuffer out;
  out.sample_rate = x.sample_rate;
  out.samples.assign(y.t().data(), y.t().data() + n);
  return out;
}

Mask ForkNet::compute_mask(const AudioBuffer& x) const {
  require(!x.samples.empty(), "compute_mask: input must be nonempty");
  const long n = x.size();
  detail::Framing fr = detail::Framing::of(cfg_.stft);

  Tape tape(false);
  ParamLeaves leaves(tape, params_);
  nn::Ctx ctx{tape, leaves};
  Var wave = Tape::constant(Tensor::from({n}, x.samples));
  Var spec = ops::stft_op(tape, wave, fr);
  Var mask = forward_mask(ctx, spec, wave);

  const long T = mask.t().dim(1), F = mask.t().dim(2);
  Mask m;
  m.real = Tensor({T, F});
  m.imag = Tensor({T, F});
  for (long i = 0; i < T * F; ++i) {
    m.real[i] = mask.t()[i];
    m.imag[i] = mask.t()[T * F + i];
  }
  m.fft_size = fr.fft;
  m.win_size = fr.win;
  m.hop_size = fr.hop;
  m.dc_removed = fr.remove_dc;
  return m;
}

}  // namespace forknet
