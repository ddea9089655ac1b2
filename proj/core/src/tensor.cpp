// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace forknet {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Tensor::Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
  numel_ = 1;
  for (long d : shape_) {
    require(d >= 1, "tensor dimensions must be positive");
    numel_ *= d;
  }
  if (shape_.empty()) numel_ = 0;
  data_.assign(static_cast<size_t>(numel_), 0.0);
}

Tensor Tensor::full(std::vector<long> shape, double v) {
  Tensor t(std::move(shape));
  for (long i = 0; i < t.numel(); ++i) t[i] = v;
  return t;
}

Tensor Tensor::from(std::vector<long> shape, std::vector<double> values) {
  Tensor t(std::move(shape));
  require(static_cast<long>(values.size()) == t.numel(), "value count does not match shape");
  for (long i = 0; i < t.numel(); ++i) t[i] = values[static_cast<size_t>(i)];
  return t;
}

bool Tensor::all_finite() const {
  for (long i = 0; i < numel_; ++i) {
    if (!std::isfinite(data_[static_cast<size_t>(i)])) return false;
  }
  return true;
}

Tensor Tensor::reshaped(std::vector<long> shape) const {
  Tensor t(std::move(shape));
  require(t.numel() == numel_, "reshape changes element count");
  for (long i = 0; i < numel_; ++i) t[i] = data_[static_cast<size_t>(i)];
  return t;
}

}  // namespace forknet
