// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace forknet {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

/// Dense row-major tensor of doubles. Rank is small (<= 4); most code views a
/// tensor as a (shape[0] x rest) matrix via mat().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<long> shape);
  Tensor(std::initializer_list<long> shape) : Tensor(std::vector<long>(shape)) {}

  static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<long> shape, double v);
  static Tensor from(std::vector<long> shape, std::vector<double> values);
  static Tensor scalar(double v) { return from({1}, {v}); }

  long rank() const { return static_cast<long>(shape_.size()); }
  long dim(long i) const { return shape_[static_cast<size_t>(i)]; }
  long numel() const { return numel_; }
  const std::vector<long>& shape() const { return shape_; }
  bool empty() const { return numel_ == 0; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](long i) { return data_[static_cast<size_t>(i)]; }
  double operator[](long i) const { return data_[static_cast<size_t>(i)]; }

  /// First dimension as rows, remaining dimensions collapsed as columns.
  long rows() const { return shape_.empty() ? 0 : shape_[0]; }
  long cols() const { return shape_.empty() ? 0 : numel_ / shape_[0]; }
  MatMap mat() { return MatMap(data(), rows(), cols()); }
  ConstMatMap mat() const { return ConstMatMap(data(), rows(), cols()); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  Tensor reshaped(std::vector<long> shape) const;

 private:
  std::vector<long> shape_;
  std::vector<double> data_;
  long numel_ = 0;
};

/// Throws std::invalid_argument(msg) when cond is false.
void require(bool cond, const char* msg);

}  // namespace forknet
