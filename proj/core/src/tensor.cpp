#include "floordiff/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace floordiff::num {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension in " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_product(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw std::invalid_argument("Tensor: data length does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  for (auto& v : t.data_) v = value;
  return t;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_rank2(const Tensor& t, const char* who) {
  if (t.rank() != 2) throw std::invalid_argument(std::string(who) + ": expected rank-2 tensor, got " + t.shape_str());
}

// ikj loop; inner loop is contiguous over both C and B rows so it vectorizes.
void mm_acc(const double* a, const double* b, double* c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * m;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + static_cast<std::size_t>(kk) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[n,m] += A[n,k] * B[m,k]^T; inner loop is a dot product over k.
void mm_nt_acc(const double* a, const double* b, double* c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] += acc;
    }
  }
}

}  // namespace

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: inner dimensions differ, " + a.shape_str() + " x " + b.shape_str());
  }
  out = Tensor({a.dim(0), b.dim(1)});
  mm_acc(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(1));
}

void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  mm_acc(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(1));
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
  check_rank2(a, "matmul_nt");
  check_rank2(b, "matmul_nt");
  if (a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("matmul_nt: shared dimensions differ, " + a.shape_str() + " x " + b.shape_str());
  }
  out = Tensor({a.dim(0), b.dim(0)});
  mm_nt_acc(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(0));
}

void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  mm_nt_acc(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(0));
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  // out[k,m] += sum_i a[i,k] * b[i,m]
  const int n = a.dim(0);
  const int k = a.dim(1);
  const int m = b.dim(1);
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    const double* brow = b.data() + static_cast<std::size_t>(i) * m;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      double* orow = out.data() + static_cast<std::size_t>(kk) * m;
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace floordiff::num
