// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/params.hpp"

#include <cmath>
#include <stdexcept>

namespace forknet {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  require(index_.count(name) == 0, "parameter name already registered");
  index_[name] = order_.size();
  order_.push_back(name);
  values_.push_back(std::move(value));
  return values_.back();
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return values_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return values_[it->second];
}

long ParamStore::param_count() const {
  long n = 0;
  for (const Tensor& t : values_) n += t.numel();
  return n;
}

long ParamStore::param_count_prefix(const std::string& prefix) const {
  long n = 0;
  for (size_t i = 0; i < order_.size(); ++i) {
    if (order_[i].rfind(prefix, 0) == 0) n += values_[i].numel();
  }
  return n;
}

double ParamInit::uniform_pm(double bound) {
  // 53-bit mantissa draw in [0,1); avoids distribution-object portability
  // differences across standard libraries.
  double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * bound;
}

Tensor ParamInit::weight(std::vector<long> shape, long fan_in) {
  require(fan_in >= 1, "weight init: fan_in must be positive");
  Tensor t(std::move(shape));
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (long i = 0; i < t.numel(); ++i) t[i] = uniform_pm(bound);
  return t;
}

ParamLeaves::ParamLeaves(Tape& tape, const ParamStore& store) : store_(store) {
  for (const std::string& name : store.names()) {
    leaves_.emplace(name, tape.leaf(store.at(name)));
  }
}

const Var& ParamLeaves::at(const std::string& name) const {
  auto it = leaves_.find(name);
  if (it == leaves_.end()) throw std::invalid_argument("unknown parameter leaf: " + name);
  return it->second;
}

Tensor ParamLeaves::grad_of(const Tape& tape, const std::string& name) const {
  const Var& v = at(name);
  if (const Tensor* g = tape.grad(v)) return *g;
  return Tensor::zeros(v.t().shape());
}

std::vector<Tensor> ParamLeaves::grads(const Tape& tape) const {
  std::vector<Tensor> out;
  out.reserve(store_.names().size());
  for (const std::string& name : store_.names()) out.push_back(grad_of(tape, name));
  return out;
}

}  // namespace forknet
