// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/tape.hpp"

namespace forknet {

Var Tape::leaf(Tensor value) {
  auto holder = std::make_shared<const Tensor>(std::move(value));
  if (!recording_) return Var{holder, -1};
  nodes_.push_back(Node{holder, nullptr, nullptr});
  return Var{holder, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
  return Var{std::make_shared<const Tensor>(std::move(value)), -1};
}

Var Tape::constant(std::shared_ptr<const Tensor> value) { return Var{std::move(value), -1}; }

Var Tape::adopt(std::shared_ptr<const Tensor> value, BackwardFn bw) {
  if (!recording_ || !bw) return Var{std::move(value), -1};
  nodes_.push_back(Node{value, nullptr, std::move(bw)});
  return Var{std::move(value), static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, BackwardFn bw) {
  return adopt(std::make_shared<const Tensor>(std::move(value)), std::move(bw));
}

Tensor* Tape::grad_slot(int node) {
  if (node < 0) return nullptr;
  Node& nd = nodes_[static_cast<size_t>(node)];
  if (!nd.grad) nd.grad = std::make_unique<Tensor>(Tensor::zeros(nd.value->shape()));
  return nd.grad.get();
}

const Tensor* Tape::grad(const Var& v) const {
  if (v.node < 0) return nullptr;
  return nodes_[static_cast<size_t>(v.node)].grad.get();
}

void Tape::backward(const Var& root) {
  require(root.tracked(), "backward: root is not recorded on this tape");
  require(root.value->numel() == 1, "backward: root must be a scalar");
  (*grad_slot(root.node))[0] = 1.0;
  for (int i = root.node; i >= 0; --i) {
    Node& nd = nodes_[static_cast<size_t>(i)];
    if (nd.grad && nd.backward) nd.backward(*this, *nd.grad);
  }
}

}  // namespace forknet
