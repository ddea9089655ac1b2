// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/tensor.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace forknet {

class Tape;

/// Handle to a value on (or off) a tape. node < 0 means the value is a
/// constant for differentiation purposes.
struct Var {
  std::shared_ptr<const Tensor> value;
  int node = -1;

  const Tensor& t() const { return *value; }
  bool tracked() const { return node >= 0; }
};

/// Reverse-mode tape over tensor-granularity operations. Each recorded node
/// stores its output value and a closure that routes the node's cotangent to
/// its inputs' gradient slots. A non-recording tape evaluates the same op
/// graph without retaining anything, so intermediates free eagerly.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& gout)>;

  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  long size() const { return static_cast<long>(nodes_.size()); }

  /// Record a differentiation root (parameter or input needing gradients).
  Var leaf(Tensor value);
  /// Wrap a value that never needs gradients.
  static Var constant(Tensor value);
  static Var constant(std::shared_ptr<const Tensor> value);

  /// Record an op output. bw may be null for untracked results.
  Var adopt(std::shared_ptr<const Tensor> value, BackwardFn bw);
  Var record(Tensor value, BackwardFn bw);

  /// Gradient accumulation slot for a node; null when untracked.
  Tensor* grad_slot(int node);
  /// Gradient of a var after backward(); null if none was accumulated.
  const Tensor* grad(const Var& v) const;

  /// Reverse sweep from a scalar root. Seeds d(root)/d(root) = 1.
  void backward(const Var& root);

 private:
  struct Node {
    std::shared_ptr<const Tensor> value;
    std::unique_ptr<Tensor> grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool recording_;
};

}  // namespace forknet
