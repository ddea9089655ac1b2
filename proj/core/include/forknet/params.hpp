// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/tape.hpp"
#include "forknet/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace forknet {

/// Ordered map from hierarchical parameter name to tensor. Iteration order is
/// insertion order, which is the canonical order for checkpoints and
/// optimizer state.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  long size() const { return static_cast<long>(order_.size()); }
  long param_count() const;
  /// Total element count over names starting with the given prefix.
  long param_count_prefix(const std::string& prefix) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<Tensor> values_;
};

/// Deterministic parameter initialization: uniform(-1/sqrt(fan_in),
/// +1/sqrt(fan_in)) for weights, zeros for biases, ones for norm gains.
/// Draws are taken from a seeded 64-bit generator in registration order, so
/// the same seed always yields the same store.
class ParamInit {
 public:
  explicit ParamInit(uint64_t seed) : rng_(seed) {}

  double uniform_pm(double bound);
  Tensor weight(std::vector<long> shape, long fan_in);

 private:
  std::mt19937_64 rng_;
};

/// One forward pass worth of tape leaves for every parameter in a store.
/// Leaves are created eagerly in store order so node ids (and hence backward
/// schedules) are deterministic.
class ParamLeaves {
 public:
  ParamLeaves(Tape& tape, const ParamStore& store);

  const Var& at(const std::string& name) const;
  /// Gradient accumulated on a leaf after Tape::backward; zero tensor if the
  /// leaf never received one.
  Tensor grad_of(const Tape& tape, const std::string& name) const;
  /// All gradients in store order.
  std::vector<Tensor> grads(const Tape& tape) const;

 private:
  const ParamStore& store_;
  std::unordered_map<std::string, Var> leaves_;
};

}  // namespace forknet
