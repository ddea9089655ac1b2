// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/params.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace forknet {

/// Optimizer and loop state carried alongside parameters so training can
/// resume bitwise. m and v are aligned with the store's name order.
struct TrainState {
  uint64_t adam_t = 0;
  uint64_t next_epoch = 0;
  uint64_t global_step = 0;
  double best_val = -1e300;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

struct Checkpoint {
  std::string config_text;
  ParamStore params;
  bool has_state = false;
  TrainState state;
};

/// Binary container, all integers and floats little-endian:
///   magic "FNCP0001"
///   u32 config_len, config text (key=value lines)
///   u64 param count; per param: u32 name_len, name, u32 rank, u64 dims[rank],
///     f64 values[numel]
///   u8 has_state; if 1: u64 adam_t, u64 next_epoch, u64 global_step,
///     f64 best_val, then per param f64 m-values, then per param f64 v-values.
/// save → load → save reproduces the file byte for byte.
void save_checkpoint(const std::string& path, const std::string& config_text, const ParamStore& params,
                     const TrainState* state);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace forknet
