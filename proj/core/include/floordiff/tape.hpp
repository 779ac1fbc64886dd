#pragma once

#include <span>
#include <vector>

#include "floordiff/tensor.hpp"

namespace floordiff::num {

// Handle into a Tape. Valid only for the tape that created it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode differentiation over a record of primitive operations.
//
// Ops are appended in execution order, so parents always precede children
// and backward() is a single reverse sweep. Gradients accumulate additively
// at fan-out. A tape covers one forward/backward pass; build a fresh tape
// per training step.
class Tape {
 public:
  // Leaf holding an input or parameter value.
  Var leaf(Tensor value);

  const Tensor& value(Var v) const;

  // y = a @ b, a:[n,k] b:[k,m]
  Var matmul(Var a, Var b);
  // y = a @ b^T, a:[n,k] b:[m,k]
  Var matmul_nt(Var a, Var b);
  // y = x @ w + broadcast(b), x:[n,k] w:[k,m] b:[m]
  Var linear(Var x, Var w, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  // Elementwise product with a non-differentiated constant (e.g. 0/1 masks).
  Var mul_const(Var a, Tensor constant);
  Var relu(Var a);
  // Row-wise softmax over the last dimension after adding `additive_mask`
  // (entries 0 or -inf). Fully masked rows produce an all-zero row rather
  // than NaN so padding tokens stay inert.
  Var softmax_lastdim(Var logits, Tensor additive_mask);
  // y = gain * (x - mean) / sqrt(var + eps) + bias, per row over the last
  // dimension. gain/bias have shape [cols].
  Var layernorm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var concat_lastdim(std::span<const Var> parts);
  // y[r, :] = x[rows[r], :]
  Var gather_rows(Var x, std::vector<int> rows);
  // Scalar mean over all entries.
  Var mean(Var a);
  // Scalar sum of squared entries.
  Var sum_of_squares(Var a);

  // Accumulates d(loss)/d(node) for every node reachable from `loss`,
  // which must be scalar. Callable once per tape.
  void backward(Var loss);

  // Gradient of the last backward() w.r.t. v; zeros if v did not
  // participate in the loss.
  const Tensor& grad(Var v) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kMatmul, kMatmulNT, kLinear, kAdd, kSub, kMul, kScale,
    kMulConst, kRelu, kSoftmax, kLayernorm, kConcat, kGatherRows,
    kMean, kSumSquares,
  };

  struct Node {
    Op op;
    Tensor value;
    int a = -1, b = -1, c = -1;
    std::vector<int> extra_parents;   // concat
    std::vector<int> rows;            // gather
    double scalar = 0.0;              // scale factor / layernorm eps
    Tensor aux0, aux1;                // op-specific saved state
  };

  Var push(Node node);
  const Node& node(Var v) const;
  Tensor& grad_buffer(int id, const std::vector<int>& shape);

  void backward_node(int id);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<char> has_grad_;
  bool backward_done_ = false;
  mutable Tensor zero_like_;  // scratch for grad() of untouched nodes
};

}  // namespace floordiff::num
