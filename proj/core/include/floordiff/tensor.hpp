#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace floordiff::num {

// Dense row-major array of 64-bit floats. 64-bit is the default precision so
// gradient checks and bit-exact reproducibility hold at desk scale.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // 2-D accessors (rank-2 only).
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  bool all_finite() const;
  double max_abs() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// C = A[n,k] * B[k,m].
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
// C = A[n,k] * B^T with B[m,k].
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);
// C += A^T * B with A[n,k], B[n,m]; used by backward passes.
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out);
// out += A * B.
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out);
// out += A * B^T.
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& out);

std::string shape_to_string(const std::vector<int>& shape);

}  // namespace floordiff::num
