// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/ops.hpp"
#include "forknet/params.hpp"

#include <string>
#include <vector>

namespace forknet::nn {

/// Per-forward-pass context: the tape plus leaf vars for every parameter.
struct Ctx {
  Tape& tape;
  const ParamLeaves& leaves;

  const Var& p(const std::string& name) const { return leaves.at(name); }
};

/// 1x1 convolution over channels: per-(t,f) linear map Cin -> Cout.
struct PointwiseConv {
  std::string w, b;
  long cin = 0, cout = 0;

  PointwiseConv() = default;
  PointwiseConv(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin_, long cout_);
  Var forward(Ctx& c, const Var& x) const;  // {Cin,T,F} -> {Cout,T,F}
};

/// Causal 2-D convolution wrapper holding its kernel and bias.
struct Conv2dCausal {
  std::string w, b;
  long cin = 0, cout = 0, kt = 0, kf = 0, dil = 1;

  Conv2dCausal() = default;
  Conv2dCausal(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin_, long cout_, long kt_, long kf_,
               long dil_);
  Var forward(Ctx& c, const Var& x) const;
};

/// Channel-axis layer norm for tensors laid out {C, ...}.
struct LayerNormChannels {
  std::string gamma, beta;
  long c = 0;

  LayerNormChannels() = default;
  LayerNormChannels(ParamStore& ps, const std::string& prefix, long c_);
  Var forward(Ctx& cx, const Var& x) const;
};

/// PReLU with one learned slope per channel row.
struct PReluChannels {
  std::string alpha;
  long c = 0;

  PReluChannels() = default;
  PReluChannels(ParamStore& ps, const std::string& prefix, long c_);
  Var forward(Ctx& cx, const Var& x) const;
};

/// Stack of causal 2x3 convolutions with time dilations 1,2,4,...,2^{depth-1}.
/// Layer i consumes the concatenation of the block input and all previous
/// layer outputs; each layer is followed by layer norm and PReLU. Output
/// channel count equals the input channel count.
struct DilatedDenseBlock {
  long channels = 0, depth = 0;
  std::vector<Conv2dCausal> convs;
  std::vector<LayerNormChannels> norms;
  std::vector<PReluChannels> acts;

  DilatedDenseBlock() = default;
  DilatedDenseBlock(ParamStore& ps, ParamInit& init, const std::string& prefix, long channels_, long depth_);
  Var forward(Ctx& c, const Var& x) const;
};

/// GRU cell parameters; see ops::gru_step for the gate equations.
struct GruCell {
  std::string wx, wh, b;
  long din = 0, dh = 0;

  GruCell() = default;
  GruCell(ParamStore& ps, ParamInit& init, const std::string& prefix, long din_, long dh_);
  Var step(Ctx& c, const Var& x, const Var& h) const;
};

/// Sub-band temporal pass: per frequency bin, a causal GRU over frames with a
/// linear projection back to D, residual add, and layer norm.
struct SubbandTemporal {
  GruCell cell;
  std::string pw, pb;
  LayerNormChannels ln;
  long d = 0;

  SubbandTemporal() = default;
  SubbandTemporal(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_);
  Var forward(Ctx& c, const Var& r) const;  // {D,T,F} -> {D,T,F}
};

/// Multi-head self-attention over each frame's frequency sequence. Operates
/// on a {T*F, D} row layout where frame t occupies rows [t*F, (t+1)*F).
struct MultiHeadAttention {
  std::string wq, bq, wk, bk, wv, bv, wo, bo;
  long d = 0, heads = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_, long heads_);
  Var forward(Ctx& c, const Var& x, long frames, long seq) const;
};

/// Pre-residual transformer layer along frequency:
///   y = LN(x + MHA(x)); out = LN(y + FFN(y))
/// with FFN = bidirectional GRU along frequency -> PReLU -> linear to D.
struct TransformerLayer {
  MultiHeadAttention mha;
  LayerNormChannels ln1, ln2;
  GruCell fwd, bwd;
  PReluChannels act;
  std::string lw, lb;
  long d = 0, hidden = 0;

  TransformerLayer() = default;
  TransformerLayer(ParamStore& ps, ParamInit& init, const std::string& prefix, long d_, long heads, long hidden_);
  Var forward(Ctx& c, const Var& r) const;  // {D,T,F} -> {D,T,F}
};

/// Waveform branch: causal width-`window` conv over samples (stride 1, left
/// padded), ReLU, then chunking into T abutting frames of `chunk` samples.
struct TimeEncoder {
  Conv2dCausal conv;
  long d3 = 0;

  TimeEncoder() = default;
  TimeEncoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long d3_, long window);
  Var forward(Ctx& c, const Var& wave, long frames, long chunk) const;  // -> {D3,T,chunk}
};

/// Spectrogram branch: pointwise conv to the branch width then a dilated
/// dense block.
struct SpectralEncoder {
  PointwiseConv pw;
  DilatedDenseBlock dense;

  SpectralEncoder() = default;
  SpectralEncoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long cin, long cout, long depth);
  Var forward(Ctx& c, const Var& x) const;
};

/// Mask head: feature fusion D -> 2D, gated causal conv, dense block, and a
/// linear pointwise map to 2 channels (mask real, mask imag). No bounding
/// nonlinearity: the complex mask is unconstrained.
struct Decoder {
  PointwiseConv fuse;
  Conv2dCausal conv_a, conv_g;
  DilatedDenseBlock dense;
  PointwiseConv out;

  Decoder() = default;
  Decoder(ParamStore& ps, ParamInit& init, const std::string& prefix, long d, long depth);
  Var forward(Ctx& c, const Var& r) const;  // {D,T,F} -> {2,T,F}
};

}  // namespace forknet::nn
