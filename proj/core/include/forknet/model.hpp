// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/nn.hpp"
#include "forknet/spectral.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace forknet {

/// The estimated complex ratio mask shares the spectrogram container: a
/// (real, imag) T x F pair plus framing metadata.
using Mask = ComplexSpectrogram;

/// Widths and framing for a ForkNet build. The three encoder widths must
/// satisfy d1 + d2 + d3 = 2*d; an encoder with width 0 is omitted entirely
/// (that is how the Ref1/Ref2 ablations arise).
struct ForkNetConfig {
  long d1 = 24;
  long d2 = 24;
  long d3 = 16;
  long d = 32;
  long blocks = 4;
  long heads = 4;
  long dense_depth = 4;
  StftConfig stft;
  long te_window = 2;  // time-encoder conv width, stride fixed at 1
  long seg_chunk = 256;
  long seg_hop = 256;

  void validate() const;

  /// Published configuration: (24, 24, 16), D=32, B=4.
  static ForkNetConfig paper();
  /// Single RI encoder of width 2D: (0, 64, 0).
  static ForkNetConfig ref1();
  /// Mag + RI encoders of width D each: (32, 32, 0).
  static ForkNetConfig ref2();
  /// Gradient-check scale: D=8, B=2, F=8 via a 16-sample window.
  static ForkNetConfig tiny();
  /// Trainable desk scale: same widths with a 64-sample window (F=32).
  static ForkNetConfig tiny_train();

  /// Canonical key=value serialization (stable order, lossless doubles).
  std::string to_text() const;
  static ForkNetConfig from_text(const std::string& text);
};

/// One dual-path processing block: sub-band temporal pass then intra-frame
/// spectral pass.
struct DppBlock {
  nn::SubbandTemporal temporal;
  nn::TransformerLayer spectral;

  DppBlock() = default;
  DppBlock(ParamStore& ps, ParamInit& init, const std::string& prefix, long d, long heads, long ffn_hidden);
  Var forward(nn::Ctx& c, const Var& r) const;
};

/// Mask-estimating enhancement network over compressed-free complex STFTs:
/// parallel Mag/RI/time encoders, fusion to width D, B dual-path blocks, and
/// an RI decoder producing an unbounded complex mask.
class ForkNet {
 public:
  ForkNet(ForkNetConfig cfg, uint64_t seed);

  const ForkNetConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  long param_count() const { return params_.param_count(); }
  /// (section, element count) pairs in build order.
  std::vector<std::pair<std::string, long>> param_count_by_section() const;

  /// Differentiable mask head. spec is the noisy {2,T,F} tensor, wave the
  /// noisy waveform feeding the time encoder (ignored when d3 = 0).
  Var forward_mask(nn::Ctx& c, const Var& spec, const Var& wave) const;

  /// Full enhancement on a non-recording tape. Output length equals input
  /// length; deterministic.
  AudioBuffer enhance(const AudioBuffer& x) const;
  /// The mask alone, for inspection.
  Mask compute_mask(const AudioBuffer& x) const;

 private:
  ForkNetConfig cfg_;
  ParamStore params_;
  bool has_mag_ = false, has_ri_ = false, has_time_ = false;
  nn::SpectralEncoder mag_enc_, ri_enc_;
  nn::TimeEncoder time_enc_;
  nn::PointwiseConv fuse_;
  std::vector<DppBlock> blocks_;
  nn::Decoder decoder_;
};

}  // namespace forknet
