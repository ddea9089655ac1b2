// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/nn.hpp"

namespace forknet::nn {

using namespace forknet::ops;

namespace {

// Channel-axis layer norm for a {P, C} row layout (positions in rows).
Var ln_rows(Ctx& c, const LayerNormChannels& ln, const Var& x) {
  Var tr = transpose(c.tape, x);
  Var y = layer_norm_cols(c.tape, tr, c.p(ln.gamma), c.p(ln.beta));
  return transpose(c.tape, y);
}

Var prelu_rows(Ctx& c, const PReluChannels& act, const Var& x) {
  Var tr = transpose(c.tape, x);
  Var y = prelu(c.tape, tr, c.p(act.alpha));
  return transpose(c.tape, y);
}

}  // namespace

PointwiseConv::PointwiseConv(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin_, long cout_)
    : w(prefix + ".w"), b(prefix + ".b"), cin(cin_), cout(cout_) {
  ps.add(w, init.weight({cout, cin}, cin));
  ps.add(b, Tensor::zeros({cout}));
}

Var PointwiseConv::forward(Ctx& c, const Var& x) const {
  require(x.t().rank() == 3 && x.t().dim(0) == cin, "pointwise conv: channel mismatch");
  const long T = x.t().dim(1), F = x.t().dim(2);
  Var flat = reshape(c.tape, x, {cin, T * F});
  Var y = matmul(c.tape, c.p(w), flat);
  y = add_colvec(c.tape, y, c.p(b));
  return reshape(c.tape, y, {cout, T, F});
}

Conv2dCausal::Conv2dCausal(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin_, long cout_, long kt_,
                           long kf_, long dil_)
    : w(prefix + ".w"), b(prefix + ".b"), cin(cin_), cout(cout_), kt(kt_), kf(kf_), dil(dil_) {
  ps.add(w, init.weight({cout, cin, kt, kf}, cin * kt * kf));
  ps.add(b, Tensor::zeros({cout}));
}

Var Conv2dCausal::forward(Ctx& c, const Var& x) const {
  return conv2d_causal(c.tape, x, c.p(w), c.p(b), dil);
}

LayerNormChannels::LayerNormChannels(ParamStore& ps, const std::string& prefix, long c_)
    : gamma(prefix + ".gamma"), beta(prefix + ".beta"), c(c_) {
  ps.add(gamma, Tensor::full({c_}, 1.0));
  ps.add(beta, Tensor::zeros({c_}));
}

Var LayerNormChannels::forward(Ctx& cx, const Var& x) const {
  return layer_norm_cols(cx.tape, x, cx.p(gamma), cx.p(beta));
}

PReluChannels::PReluChannels(ParamStore& ps, const std::string& prefix, long c_) : alpha(prefix + ".alpha"), c(c_) {
  ps.add(alpha, Tensor::full({c_}, 0.25));
}

Var PReluChannels::forward(Ctx& cx, const Var& x) const { return prelu(cx.tape, x, cx.p(alpha)); }

DilatedDenseBlock::DilatedDenseBlock(ParamStore& ps, ParamInit& init, const std::string& prefix, long channels_,
                                     long depth_)
    : channels(channels_), depth(depth_) {
  require(depth_ >= 1, "dense block: depth must be >= 1");
  long dil = 1;
  for (long i = 0; i < depth_; ++i) {
    std::string layer = prefix + "." + std::to_string(i);
    convs.emplace_back(ps, init, layer + ".conv", channels_ * (i + 1), channels_, 2, 3, dil);
    norms.emplace_back(ps, layer + ".norm", channels_);
    acts.emplace_back(ps, layer + ".act", channels_);
    dil *= 2;
  }
}

Var DilatedDenseBlock::forward(Ctx& c, const Var& x) const {
  std::vector<Var> feed = {x};
  Var h = x;
  for (long i = 0; i < depth; ++i) {
    Var in = feed.size() == 1 ? feed[0] : concat_rows(c.tape, feed);
    h = convs[static_cast<size_t>(i)].forward(c, in);
    h = norms[static_cast<size_t>(i)].forward(c, h);
    h = acts[static_cast<size_t>(i)].forward(c, h);
    feed.push_back(h);
  }
  return h;
}

GruCell::GruCell(ParamStore& ps, ParamInit& init, const std::string& prefix, long din_, long dh_)
    : wx(prefix + ".wx"), wh(prefix + ".wh"), b(prefix + ".b"), din(din_), dh(dh_) {
  ps.add(wx, init.weight({din, 3 * dh}, din));
  ps.add(wh, init.weight({dh, 3 * dh}, dh));
  ps.add(b, Tensor::zeros({3 * dh}));
}

Var GruCell::step(Ctx& c, const Var& x, const Var& h) const {
  return gru_step(c.tape, x, h, c.p(wx), c.p(wh), c.p(b));
}

SubbandTemporal::SubbandTemporal(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_)
    : cell(ps, init, prefix + ".gru", d_, d_), pw(prefix + ".proj.w"), pb(prefix + ".proj.b"), d(d_) {
  ps.add(pw, init.weight({d_, d_}, d_));
  ps.add(pb, Tensor::zeros({d_}));
  ln = LayerNormChannels(ps, prefix + ".norm", d_);
}

Var SubbandTemporal::forward(Ctx& c, const Var& r) const {
  require(r.t().rank() == 3 && r.t().dim(0) == d, "sub-band temporal: channel mismatch");
  const long T = r.t().dim(1), F = r.t().dim(2);
  Var tfd = permute3(c.tape, r, {1, 2, 0});  // {T,F,D}

  Var h = Tape::constant(Tensor::zeros({F, d}));
  std::vector<Var> steps;
  steps.reserve(static_cast<size_t>(T));
  for (long t = 0; t < T; ++t) {
    Var xt = reshape(c.tape, slice_rows(c.tape, tfd, t, t + 1), {F, d});
    h = cell.step(c, xt, h);
    steps.push_back(reshape(c.tape, h, {1, F, d}));
  }
  Var seq = reshape(c.tape, concat_rows(c.tape, steps), {T * F, d});

  Var proj = add_rowvec(c.tape, matmul(c.tape, seq, c.p(pw)), c.p(pb));
  Var res = add(c.tape, proj, reshape(c.tape, tfd, {T * F, d}));
  Var y = ln_rows(c, ln, res);
  return permute3(c.tape, reshape(c.tape, y, {T, F, d}), {2, 0, 1});
}

MultiHeadAttention::MultiHeadAttention(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_, long heads_)
    : wq(prefix + ".q.w"), bq(prefix + ".q.b"), wk(prefix + ".k.w"), bk(prefix + ".k.b"), wv(prefix + ".v.w"),
      bv(prefix + ".v.b"), wo(prefix + ".o.w"), bo(prefix + ".o.b"), d(d_), heads(heads_) {
  require(d_ % heads_ == 0, "attention: head count must divide feature width");
  ps.add(wq, init.weight({d_, d_}, d_));
  ps.add(bq, Tensor::zeros({d_}));
  ps.add(wk, init.weight({d_, d_}, d_));
  ps.add(bk, Tensor::zeros({d_}));
  ps.add(wv, init.weight({d_, d_}, d_));
  ps.add(bv, Tensor::zeros({d_}));
  ps.add(wo, init.weight({d_, d_}, d_));
  ps.add(bo, Tensor::zeros({d_}));
}

Var MultiHeadAttention::forward(Ctx& c, const Var& x, long frames, long seq) const {
  require(x.t().rank() == 2 && x.t().dim(0) == frames * seq && x.t().dim(1) == d,
          "attention: expected {frames*seq, D} input");
  const long dh = d / heads;
  Var q = add_rowvec(c.tape, matmul(c.tape, x, c.p(wq)), c.p(bq));
  Var k = add_rowvec(c.tape, matmul(c.tape, x, c.p(wk)), c.p(bk));
  Var v = add_rowvec(c.tape, matmul(c.tape, x, c.p(wv)), c.p(bv));

  std::vector<Var> out_frames;
  out_frames.reserve(static_cast<size_t>(frames));
  for (long t = 0; t < frames; ++t) {
    Var qf = slice_rows(c.tape, q, t * seq, (t + 1) * seq);
    Var kf = slice_rows(c.tape, k, t * seq, (t + 1) * seq);
    Var vf = slice_rows(c.tape, v, t * seq, (t + 1) * seq);
    std::vector<Var> head_outs;
    head_outs.reserve(static_cast<size_t>(heads));
    for (long hh = 0; hh < heads; ++hh) {
      Var qh = slice_cols(c.tape, qf, hh * dh, (hh + 1) * dh);
      Var kh = slice_cols(c.tape, kf, hh * dh, (hh + 1) * dh);
      Var vh = slice_cols(c.tape, vf, hh * dh, (hh + 1) * dh);
      head_outs.push_back(attention_core(c.tape, qh, kh, vh));
    }
    out_frames.push_back(heads == 1 ? head_outs[0] : concat_cols(c.tape, head_outs));
  }
  Var merged = frames == 1 ? out_frames[0] : concat_rows(c.tape, out_frames);
  return add_rowvec(c.tape, matmul(c.tape, merged, c.p(wo)), c.p(bo));
}

TransformerLayer::TransformerLayer(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_, long heads,
                                   long hidden_)
    : mha(ps, init, prefix + ".mha", d_, heads), d(d_), hidden(hidden_) {
  ln1 = LayerNormChannels(ps, prefix + ".norm1", d_);
  fwd = GruCell(ps, init, prefix + ".ffn.fwd", d_, hidden_);
  bwd = GruCell(ps, init, prefix + ".ffn.bwd", d_, hidden_);
  act = PReluChannels(ps, prefix + ".ffn.act", 2 * hidden_);
  lw = prefix + ".ffn.out.w";
  lb = prefix + ".ffn.out.b";
  ps.add(lw, init.weight({2 * hidden_, d_}, 2 * hidden_));
  ps.add(lb, Tensor::zeros({d_}));
  ln2 = LayerNormChannels(ps, prefix + ".norm2", d_);
}

Var TransformerLayer::forward(Ctx& c, const Var& r) const {
  require(r.t().rank() == 3 && r.t().dim(0) == d, "transformer layer: channel mismatch");
  const long T = r.t().dim(1), F = r.t().dim(2);
  Var flat = reshape(c.tape, permute3(c.tape, r, {1, 2, 0}), {T * F, d});  // frame-major rows

  Var attn = mha.forward(c, flat, T, F);
  Var y = ln_rows(c, ln1, add(c.tape, flat, attn));

  // FFN: bidirectional GRU along frequency, batched over the T frames.
  Var ftd = permute3(c.tape, reshape(c.tape, y, {T, F, d}), {1, 0, 2});  // {F,T,D}
  std::vector<Var> fwd_states(static_cast<size_t>(F));
  std::vector<Var> bwd_states(static_cast<size_t>(F));
  Var hf = Tape::constant(Tensor::zeros({T, hidden}));
  for (long f = 0; f < F; ++f) {
    Var xf = reshape(c.tape, slice_rows(c.tape, ftd, f, f + 1), {T, d});
    hf = fwd.step(c, xf, hf);
    fwd_states[static_cast<size_t>(f)] = hf;
  }
  Var hb = Tape::constant(Tensor::zeros({T, hidden}));
  for (long f = F - 1; f >= 0; --f) {
    Var xf = reshape(c.tape, slice_rows(c.tape, ftd, f, f + 1), {T, d});
    hb = bwd.step(c, xf, hb);
    bwd_states[static_cast<size_t>(f)] = hb;
  }
  std::vector<Var> per_f;
  per_f.reserve(static_cast<size_t>(F));
  for (long f = 0; f < F; ++f) {
    Var cc = concat_cols(c.tape, {fwd_states[static_cast<size_t>(f)], bwd_states[static_cast<size_t>(f)]});
    per_f.push_back(reshape(c.tape, cc, {1, T, 2 * hidden}));
  }
  Var ffn = concat_rows(c.tape, per_f);                       // {F,T,2H}
  ffn = permute3(c.tape, ffn, {1, 0, 2});                     // {T,F,2H}
  ffn = reshape(c.tape, ffn, {T * F, 2 * hidden});
  ffn = prelu_rows(c, act, ffn);
  ffn = add_rowvec(c.tape, matmul(c.tape, ffn, c.p(lw)), c.p(lb));

  Var out = ln_rows(c, ln2, add(c.tape, y, ffn));
  return permute3(c.tape, reshape(c.tape, out, {T, F, d}), {2, 0, 1});
}

TimeEncoder::TimeEncoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long d3_, long window)
    : d3(d3_) {
  conv = Conv2dCausal(ps, init, prefix + ".conv", 1, d3_, window, 1, 1);
}

Var TimeEncoder::forward(Ctx& c, const Var& wave, long frames, long chunk) const {
  require(wave.t().rank() == 1, "time encoder: expected a rank-1 waveform");
  const long n = wave.t().numel();
  require(n >= chunk, "time encoder: input shorter than one frame");
  Var x = reshape(c.tape, wave, {1, n, 1});
  Var y = conv.forward(c, x);  // width-2 causal conv over samples
  y = relu(c.tape, y);
  y = reshape(c.tape, y, {d3, n});
  return segment_time(c.tape, y, chunk, frames);
}

SpectralEncoder::SpectralEncoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin, long cout,
                                 long depth) {
  pw = PointwiseConv(ps, init, prefix + ".pw", cin, cout);
  dense = DilatedDenseBlock(ps, init, prefix + ".dense", cout, depth);
}

Var SpectralEncoder::forward(Ctx& c, const Var& x) const { return dense.forward(c, pw.forward(c, x)); }

Decoder::Decoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long d, long depth) {
  fuse = PointwiseConv(ps, init, prefix + ".fuse", d, 2 * d);
  conv_a = Conv2dCausal(ps, init, prefix + ".gate.a", 2 * d, 2 * d, 2, 3, 1);
  conv_g = Conv2dCausal(ps, init, prefix + ".gate.g", 2 * d, 2 * d, 2, 3, 1);
  dense = DilatedDenseBlock(ps, init, prefix + ".dense", 2 * d, depth);
  out = PointwiseConv(ps, init, prefix + ".out", 2 * d, 2);
}

Var Decoder::forward(Ctx& c, const Var& r) const {
  Var x = fuse.forward(c, r);
  Var a = conv_a.forward(c, x);
  Var g = sigmoid(c.tape, conv_g.forward(c, x));
  Var gated = mul(c.tape, a, g);
  Var y = dense.forward(c, gated);
  return out.forward(c, y);
}

}  // namespace forknet::nn
