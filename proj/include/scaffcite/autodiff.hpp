#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "scaffcite/tensor.hpp"

namespace scaffcite::ad {

/// One vertex of the computation graph. The graph is a DAG built forward;
/// `backprop` accumulates this node's output gradient into its parents.
struct Node {
  Tensor value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // empty for leaves
  const char* op = "leaf";
};

using Var = std::shared_ptr<Node>;

/// Leaf holding a constant (no gradient flows into it).
Var constant(Tensor value);
/// Leaf holding a learnable tensor; gradients accumulate into value.grad().
Var parameter(Tensor value);
Var leaf(Tensor value, bool requires_grad);

// --- ops -------------------------------------------------------------------

Var matmul(const Var& a, const Var& b);

/// Pointwise add. Also accepts a 1-d bias on the right broadcast along the
/// last axis of a 2-d left operand; no other broadcasting.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var relu(const Var& x);

/// Numerically stable softmax over the last axis; every slice sums to 1.
Var softmax_last_axis(const Var& x);

Var concat_last_axis(const Var& a, const Var& b);

/// Row i of a 2-d tensor as a 1xC tensor.
Var select_row(const Var& x, std::size_t row);
/// Stack n tensors of shape 1xC into an nxC tensor.
Var stack_rows(const std::vector<Var>& rows);

Var transpose(const Var& x);
Var reshape(const Var& x, std::vector<std::size_t> shape);
Var sum_all(const Var& x);
Var scale(const Var& x, double c);

/// Reverse pass from a scalar loss; every reachable gradient-bearing leaf's
/// grad slot is populated. Gradients accumulate across multiple uses of the
/// same node and across repeated backward() calls until zeroed.
void backward(const Var& loss);

void zero_grad(const std::vector<Var>& vars);

/// Max relative error between analytic gradients of `build()` and central
/// finite differences with step h, taken over every entry of every leaf.
/// `build` must be deterministic (no dropout).
double grad_check(const std::function<Var()>& build, const std::vector<Var>& leaves, double h);

}  // namespace scaffcite::ad
