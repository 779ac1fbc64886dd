#include "floordiff/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace floordiff::num {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw std::out_of_range("Tape: invalid var id " + std::to_string(v.id));
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Var Tape::leaf(Tensor value) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  num::matmul(value(a), value(b), n.value);
  return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
  Node n;
  n.op = Op::kMatmulNT;
  n.a = a.id;
  n.b = b.id;
  num::matmul_nt(value(a), value(b), n.value);
  return push(std::move(n));
}

Var Tape::linear(Var x, Var w, Var b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (bv.rank() != 1 || bv.dim(0) != wv.dim(1)) {
    throw std::invalid_argument("linear: bias shape " + bv.shape_str() + " does not match weight " + wv.shape_str());
  }
  Node n;
  n.op = Op::kLinear;
  n.a = x.id;
  n.b = w.id;
  n.c = b.id;
  num::matmul(xv, wv, n.value);
  const int rows = n.value.dim(0), cols = n.value.dim(1);
  for (int r = 0; r < rows; ++r) {
    double* row = n.value.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += bv[c];
  }
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  const Tensor& bv = value(b);
  for (std::int64_t i = 0; i < n.value.size(); ++i) n.value[i] += bv[i];
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  const Tensor& bv = value(b);
  for (std::int64_t i = 0; i < n.value.size(); ++i) n.value[i] -= bv[i];
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  const Tensor& bv = value(b);
  for (std::int64_t i = 0; i < n.value.size(); ++i) n.value[i] *= bv[i];
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.scalar = s;
  n.value = value(a);
  for (std::int64_t i = 0; i < n.value.size(); ++i) n.value[i] *= s;
  return push(std::move(n));
}

Var Tape::mul_const(Var a, Tensor constant) {
  check_same_shape(value(a), constant, "mul_const");
  Node n;
  n.op = Op::kMulConst;
  n.a = a.id;
  n.value = value(a);
  for (std::int64_t i = 0; i < n.value.size(); ++i) n.value[i] *= constant[i];
  n.aux0 = std::move(constant);
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.value = value(a);
  for (std::int64_t i = 0; i < n.value.size(); ++i) {
    if (n.value[i] < 0.0) n.value[i] = 0.0;
  }
  return push(std::move(n));
}

Var Tape::softmax_lastdim(Var logits, Tensor additive_mask) {
  const Tensor& z = value(logits);
  check_same_shape(z, additive_mask, "softmax_lastdim");
  if (z.rank() != 2) throw std::invalid_argument("softmax_lastdim: expected rank-2, got " + z.shape_str());
  Node n;
  n.op = Op::kSoftmax;
  n.a = logits.id;
  n.value = Tensor(z.shape());
  const int rows = z.dim(0), cols = z.dim(1);
  for (int r = 0; r < rows; ++r) {
    const double* zr = z.data() + static_cast<std::size_t>(r) * cols;
    const double* mr = additive_mask.data() + static_cast<std::size_t>(r) * cols;
    double* out = n.value.data() + static_cast<std::size_t>(r) * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cols; ++c) mx = std::max(mx, zr[c] + mr[c]);
    if (!std::isfinite(mx)) continue;  // fully masked row -> zeros
    double denom = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double e = std::exp(zr[c] + mr[c] - mx);
      out[c] = e;
      denom += e;
    }
    for (int c = 0; c < cols; ++c) out[c] /= denom;
  }
  return push(std::move(n));
}

Var Tape::layernorm(Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = value(x);
  const Tensor& gv = value(gain);
  const Tensor& bv = value(bias);
  if (xv.rank() != 2) throw std::invalid_argument("layernorm: expected rank-2, got " + xv.shape_str());
  const int rows = xv.dim(0), cols = xv.dim(1);
  if (gv.rank() != 1 || gv.dim(0) != cols || bv.rank() != 1 || bv.dim(0) != cols) {
    throw std::invalid_argument("layernorm: gain/bias must be [" + std::to_string(cols) + "]");
  }
  Node n;
  n.op = Op::kLayernorm;
  n.a = x.id;
  n.b = gain.id;
  n.c = bias.id;
  n.scalar = eps;
  n.value = Tensor(xv.shape());
  n.aux0 = Tensor(xv.shape());    // normalized x-hat
  n.aux1 = Tensor({rows});        // 1/sqrt(var + eps)
  for (int r = 0; r < rows; ++r) {
    const double* xr = xv.data() + static_cast<std::size_t>(r) * cols;
    double mean = 0.0;
    for (int c = 0; c < cols; ++c) mean += xr[c];
    mean /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = xr[c] - mean;
      var += d * d;
    }
    var /= cols;
    const double rstd = 1.0 / std::sqrt(var + eps);
    n.aux1[r] = rstd;
    double* hat = n.aux0.data() + static_cast<std::size_t>(r) * cols;
    double* out = n.value.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      hat[c] = (xr[c] - mean) * rstd;
      out[c] = hat[c] * gv[c] + bv[c];
    }
  }
  return push(std::move(n));
}

Var Tape::concat_lastdim(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_lastdim: no inputs");
  const int rows = value(parts[0]).dim(0);
  int cols = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != 2 || t.dim(0) != rows) {
      throw std::invalid_argument("concat_lastdim: row mismatch at " + t.shape_str());
    }
    cols += t.dim(1);
  }
  Node n;
  n.op = Op::kConcat;
  n.extra_parents.reserve(parts.size());
  for (Var p : parts) n.extra_parents.push_back(p.id);
  n.value = Tensor({rows, cols});
  int offset = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    const int w = t.dim(1);
    for (int r = 0; r < rows; ++r) {
      const double* src = t.data() + static_cast<std::size_t>(r) * w;
      double* dst = n.value.data() + static_cast<std::size_t>(r) * cols + offset;
      for (int c = 0; c < w; ++c) dst[c] = src[c];
    }
    offset += w;
  }
  return push(std::move(n));
}

Var Tape::gather_rows(Var x, std::vector<int> rows) {
  const Tensor& xv = value(x);
  if (xv.rank() != 2) throw std::invalid_argument("gather_rows: expected rank-2, got " + xv.shape_str());
  const int cols = xv.dim(1);
  Node n;
  n.op = Op::kGatherRows;
  n.a = x.id;
  n.value = Tensor({static_cast<int>(rows.size()), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int src = rows[r];
    if (src < 0 || src >= xv.dim(0)) throw std::out_of_range("gather_rows: row index " + std::to_string(src));
    const double* sp = xv.data() + static_cast<std::size_t>(src) * cols;
    double* dp = n.value.data() + r * cols;
    for (int c = 0; c < cols; ++c) dp[c] = sp[c];
  }
  n.rows = std::move(rows);
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Tensor& av = value(a);
  double s = 0.0;
  for (std::int64_t i = 0; i < av.size(); ++i) s += av[i];
  Node n;
  n.op = Op::kMean;
  n.a = a.id;
  n.value = Tensor::scalar(s / static_cast<double>(av.size()));
  return push(std::move(n));
}

Var Tape::sum_of_squares(Var a) {
  const Tensor& av = value(a);
  double s = 0.0;
  for (std::int64_t i = 0; i < av.size(); ++i) s += av[i] * av[i];
  Node n;
  n.op = Op::kSumSquares;
  n.a = a.id;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

Tensor& Tape::grad_buffer(int id, const std::vector<int>& shape) {
  if (!has_grad_[static_cast<std::size_t>(id)]) {
    grads_[static_cast<std::size_t>(id)] = Tensor(shape);
    has_grad_[static_cast<std::size_t>(id)] = 1;
  }
  return grads_[static_cast<std::size_t>(id)];
}

void Tape::backward(Var loss) {
  if (backward_done_) throw std::logic_error("Tape::backward: already called on this tape");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be scalar, got " + lv.shape_str());
  }
  grads_.assign(nodes_.size(), Tensor());
  has_grad_.assign(nodes_.size(), 0);
  grad_buffer(loss.id, lv.shape())[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    if (!has_grad_[static_cast<std::size_t>(id)]) continue;
    backward_node(id);
  }
  backward_done_ = true;
}

void Tape::backward_node(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Tensor& g = grads_[static_cast<std::size_t>(id)];
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatmul: {
      const Tensor& av = nodes_[n.a].value;
      const Tensor& bv = nodes_[n.b].value;
      matmul_nt_acc(g, bv, grad_buffer(n.a, av.shape()));   // dA += G B^T
      matmul_tn_acc(av, g, grad_buffer(n.b, bv.shape()));   // dB += A^T G
      break;
    }
    case Op::kMatmulNT: {
      const Tensor& av = nodes_[n.a].value;
      const Tensor& bv = nodes_[n.b].value;
      matmul_acc(g, bv, grad_buffer(n.a, av.shape()));      // dA += G B
      matmul_tn_acc(g, av, grad_buffer(n.b, bv.shape()));   // dB += G^T A
      break;
    }
    case Op::kLinear: {
      const Tensor& xv = nodes_[n.a].value;
      const Tensor& wv = nodes_[n.b].value;
      matmul_nt_acc(g, wv, grad_buffer(n.a, xv.shape()));   // dx += G W^T
      matmul_tn_acc(xv, g, grad_buffer(n.b, wv.shape()));   // dW += x^T G
      Tensor& db = grad_buffer(n.c, nodes_[n.c].value.shape());
      const int rows = g.dim(0), cols = g.dim(1);
      for (int r = 0; r < rows; ++r) {
        const double* gr = g.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) db[c] += gr[c];
      }
      break;
    }
    case Op::kAdd: {
      Tensor& da = grad_buffer(n.a, n.value.shape());
      Tensor& db = grad_buffer(n.b, n.value.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) {
        da[i] += g[i];
        db[i] += g[i];
      }
      break;
    }
    case Op::kSub: {
      Tensor& da = grad_buffer(n.a, n.value.shape());
      Tensor& db = grad_buffer(n.b, n.value.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) {
        da[i] += g[i];
        db[i] -= g[i];
      }
      break;
    }
    case Op::kMul: {
      const Tensor& av = nodes_[n.a].value;
      const Tensor& bv = nodes_[n.b].value;
      Tensor& da = grad_buffer(n.a, av.shape());
      Tensor& db = grad_buffer(n.b, bv.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) {
        da[i] += g[i] * bv[i];
        db[i] += g[i] * av[i];
      }
      break;
    }
    case Op::kScale: {
      Tensor& da = grad_buffer(n.a, n.value.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.scalar;
      break;
    }
    case Op::kMulConst: {
      Tensor& da = grad_buffer(n.a, n.value.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.aux0[i];
      break;
    }
    case Op::kRelu: {
      const Tensor& av = nodes_[n.a].value;
      Tensor& da = grad_buffer(n.a, av.shape());
      for (std::int64_t i = 0; i < g.size(); ++i) {
        if (av[i] > 0.0) da[i] += g[i];
      }
      break;
    }
    case Op::kSoftmax: {
      // dz = p * (g - sum(g * p)) per row; zero rows stay zero.
      const Tensor& p = n.value;
      Tensor& dz = grad_buffer(n.a, p.shape());
      const int rows = p.dim(0), cols = p.dim(1);
      for (int r = 0; r < rows; ++r) {
        const double* pr = p.data() + static_cast<std::size_t>(r) * cols;
        const double* gr = g.data() + static_cast<std::size_t>(r) * cols;
        double* dr = dz.data() + static_cast<std::size_t>(r) * cols;
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += gr[c] * pr[c];
        for (int c = 0; c < cols; ++c) dr[c] += pr[c] * (gr[c] - dot);
      }
      break;
    }
    case Op::kLayernorm: {
      const Tensor& hat = n.aux0;
      const Tensor& rstd = n.aux1;
      const Tensor& gv = nodes_[n.b].value;
      const int rows = hat.dim(0), cols = hat.dim(1);
      Tensor& dx = grad_buffer(n.a, hat.shape());
      Tensor& dgain = grad_buffer(n.b, gv.shape());
      Tensor& dbias = grad_buffer(n.c, gv.shape());
      for (int r = 0; r < rows; ++r) {
        const double* hr = hat.data() + static_cast<std::size_t>(r) * cols;
        const double* gr = g.data() + static_cast<std::size_t>(r) * cols;
        double* dxr = dx.data() + static_cast<std::size_t>(r) * cols;
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (int c = 0; c < cols; ++c) {
          const double dh = gr[c] * gv[c];
          sum_dh += dh;
          sum_dh_h += dh * hr[c];
          dgain[c] += gr[c] * hr[c];
          dbias[c] += gr[c];
        }
        const double inv_cols = 1.0 / cols;
        for (int c = 0; c < cols; ++c) {
          const double dh = gr[c] * gv[c];
          dxr[c] += rstd[r] * (dh - sum_dh * inv_cols - hr[c] * sum_dh_h * inv_cols);
        }
      }
      break;
    }
    case Op::kConcat: {
      const int rows = n.value.dim(0), cols = n.value.dim(1);
      int offset = 0;
      for (int pid : n.extra_parents) {
        const Tensor& pv = nodes_[pid].value;
        const int w = pv.dim(1);
        Tensor& dp = grad_buffer(pid, pv.shape());
        for (int r = 0; r < rows; ++r) {
          const double* gr = g.data() + static_cast<std::size_t>(r) * cols + offset;
          double* dr = dp.data() + static_cast<std::size_t>(r) * w;
          for (int c = 0; c < w; ++c) dr[c] += gr[c];
        }
        offset += w;
      }
      break;
    }
    case Op::kGatherRows: {
      const Tensor& xv = nodes_[n.a].value;
      Tensor& dx = grad_buffer(n.a, xv.shape());
      const int cols = xv.dim(1);
      for (std::size_t r = 0; r < n.rows.size(); ++r) {
        const double* gr = g.data() + r * cols;
        double* dr = dx.data() + static_cast<std::size_t>(n.rows[r]) * cols;
        for (int c = 0; c < cols; ++c) dr[c] += gr[c];
      }
      break;
    }
    case Op::kMean: {
      const Tensor& av = nodes_[n.a].value;
      Tensor& da = grad_buffer(n.a, av.shape());
      const double w = g[0] / static_cast<double>(av.size());
      for (std::int64_t i = 0; i < da.size(); ++i) da[i] += w;
      break;
    }
    case Op::kSumSquares: {
      const Tensor& av = nodes_[n.a].value;
      Tensor& da = grad_buffer(n.a, av.shape());
      for (std::int64_t i = 0; i < da.size(); ++i) da[i] += 2.0 * g[0] * av[i];
      break;
    }
  }
}

const Tensor& Tape::grad(Var v) const {
  if (!backward_done_) throw std::logic_error("Tape::grad: backward() has not run");
  const Node& n = node(v);
  if (has_grad_[static_cast<std::size_t>(v.id)]) return grads_[static_cast<std::size_t>(v.id)];
  zero_like_ = Tensor(n.value.shape());
  return zero_like_;
}

}  // namespace floordiff::num
