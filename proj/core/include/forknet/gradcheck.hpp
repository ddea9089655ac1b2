// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/tape.hpp"
#include "forknet/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace forknet {

struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  long coords_checked = 0;
  double tol = 0.0;
  bool pass = false;
};

struct GradCheckOptions {
  double step = 1e-5;   // central-difference half-width
  double tol = 1e-4;    // max allowed relative error
  long max_coords = 0;  // per input tensor; 0 = every coordinate
  uint64_t seed = 0;    // coordinate sampling
};

/// Compares the tape's analytic gradients for `build` (any output shape; a
/// randomized linear functional is applied to make the root scalar) against
/// central differences. Relative error uses max(|fd|, |analytic|, 1e-3) as
/// the denominator.
GradCheckReport check_gradients(const std::string& name, const std::vector<Tensor>& inputs,
                                const std::function<Var(Tape&, const std::vector<Var>&)>& build,
                                const GradCheckOptions& opts = {});

/// End-to-end check of the tiny model: full loss graph against central
/// differences on a sampled subset of each parameter tensor.
GradCheckReport check_model_gradients(uint64_t seed, const GradCheckOptions& opts);

/// Every differentiable op plus the tiny end-to-end model.
std::vector<GradCheckReport> gradcheck_suite(uint64_t seed);

}  // namespace forknet
