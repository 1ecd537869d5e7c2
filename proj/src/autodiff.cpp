#include "scaffcite/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "scaffcite/errors.hpp"

namespace scaffcite::ad {

namespace {

Var make_node(Tensor value, std::vector<Var> parents, const char* op) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->op = op;
  for (const Var& p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
}

// C(m x n) += or = A(m x k) * B(k x n); accumulate variant adds into out.
void matmul_into(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
                 std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out(m x k) += dC(m x n) * B(k x n)^T
void matmul_nt_into(const std::vector<double>& dc, const std::vector<double>& b,
                    std::vector<double>& out, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* drow = dc.data() + i * n;
    double* orow = out.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b.data() + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += drow[j] * brow[j];
      orow[p] += acc;
    }
  }
}

// out(k x n) += A(m x k)^T * dC(m x n)
void matmul_tn_into(const std::vector<double>& a, const std::vector<double>& dc,
                    std::vector<double>& out, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    const double* drow = dc.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* orow = out.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * drow[j];
    }
  }
}

Var pointwise_unary(const Var& x, const char* op, double (*fwd)(double),
                    double (*dydx_from)(double y, double x)) {
  Tensor out(x->value.shape());
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(x->value[i]);
  Var node = make_node(std::move(out), {x}, op);
  if (node->requires_grad) {
    node->backprop = [dydx_from](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        pg[i] += g[i] * dydx_from(self.value[i], p.value[i]);
      }
    };
  }
  return node;
}

}  // namespace

Var leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

Var constant(Tensor value) { return leaf(std::move(value), false); }
Var parameter(Tensor value) { return leaf(std::move(value), true); }

Var matmul(const Var& a, const Var& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.ndim() != 2 || B.ndim() != 2 || A.cols() != B.rows()) {
    throw DimensionError("matmul: incompatible shapes " + A.shape_str() + " and " + B.shape_str());
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out({m, n});
  matmul_into(A.values(), B.values(), out.values(), m, k, n, false);
  Var node = make_node(std::move(out), {a, b}, "matmul");
  if (node->requires_grad) {
    node->backprop = [m, k, n](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      const std::vector<double>& g = self.value.grad();
      if (pa.requires_grad) matmul_nt_into(g, pb.value.values(), pa.value.grad(), m, k, n);
      if (pb.requires_grad) matmul_tn_into(pa.value.values(), g, pb.value.grad(), m, k, n);
    };
  }
  return node;
}

Var add(const Var& a, const Var& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  const bool bias_broadcast =
      A.ndim() == 2 && B.ndim() == 1 && B.shape()[0] == A.cols() && A.shape() != B.shape();
  if (!bias_broadcast) check_same_shape(A, B, "add");

  Tensor out(A.shape());
  const std::size_t n = A.numel();
  if (bias_broadcast) {
    const std::size_t c = A.cols();
    for (std::size_t i = 0; i < n; ++i) out[i] = A[i] + B[i % c];
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = A[i] + B[i];
  }
  Var node = make_node(std::move(out), {a, b}, "add");
  if (node->requires_grad) {
    node->backprop = [bias_broadcast](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      const std::vector<double>& g = self.value.grad();
      if (pa.requires_grad) {
        std::vector<double>& ga = pa.value.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (pb.requires_grad) {
        std::vector<double>& gb = pb.value.grad();
        if (bias_broadcast) {
          const std::size_t c = pb.value.numel();
          for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
        } else {
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
      }
    };
  }
  return node;
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor out(a->value.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] - b->value[i];
  Var node = make_node(std::move(out), {a, b}, "sub");
  if (node->requires_grad) {
    node->backprop = [](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      const std::vector<double>& g = self.value.grad();
      if (pa.requires_grad) {
        std::vector<double>& ga = pa.value.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (pb.requires_grad) {
        std::vector<double>& gb = pb.value.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    };
  }
  return node;
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor out(a->value.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] * b->value[i];
  Var node = make_node(std::move(out), {a, b}, "mul");
  if (node->requires_grad) {
    node->backprop = [](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      const std::vector<double>& g = self.value.grad();
      if (pa.requires_grad) {
        std::vector<double>& ga = pa.value.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb.value[i];
      }
      if (pb.requires_grad) {
        std::vector<double>& gb = pb.value.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa.value[i];
      }
    };
  }
  return node;
}

Var tanh(const Var& x) {
  return pointwise_unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double y, double) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
  return pointwise_unary(
      x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double y, double) { return y * (1.0 - y); });
}

Var relu(const Var& x) {
  return pointwise_unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double, double xv) { return xv > 0.0 ? 1.0 : 0.0; });
}

Var softmax_last_axis(const Var& x) {
  const Tensor& X = x->value;
  if (X.ndim() == 0 || X.shape().back() == 0) {
    throw ContractError("softmax: last axis must have length >= 1, got " + X.shape_str());
  }
  const std::size_t width = X.shape().back();
  const std::size_t slices = X.numel() / width;
  Tensor out(X.shape());
  for (std::size_t s = 0; s < slices; ++s) {
    const std::size_t base = s * width;
    double mx = X[base];
    for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, X[base + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double e = std::exp(X[base + j] - mx);
      out[base + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < width; ++j) out[base + j] /= total;
  }
  Var node = make_node(std::move(out), {x}, "softmax");
  if (node->requires_grad) {
    node->backprop = [width, slices](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t s = 0; s < slices; ++s) {
        const std::size_t base = s * width;
        double dot = 0.0;
        for (std::size_t j = 0; j < width; ++j) dot += g[base + j] * self.value[base + j];
        for (std::size_t j = 0; j < width; ++j) {
          pg[base + j] += self.value[base + j] * (g[base + j] - dot);
        }
      }
    };
  }
  return node;
}

Var concat_last_axis(const Var& a, const Var& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.ndim() != B.ndim() || A.ndim() == 0) {
    throw DimensionError("concat: rank mismatch " + A.shape_str() + " vs " + B.shape_str());
  }
  for (std::size_t d = 0; d + 1 < A.ndim(); ++d) {
    if (A.shape()[d] != B.shape()[d]) {
      throw DimensionError("concat: leading axes differ " + A.shape_str() + " vs " + B.shape_str());
    }
  }
  const std::size_t wa = A.shape().back(), wb = B.shape().back();
  std::vector<std::size_t> shape = A.shape();
  shape.back() = wa + wb;
  const std::size_t slices = shape_numel(shape) == 0 ? 0 : shape_numel(shape) / (wa + wb);
  Tensor out(shape);
  for (std::size_t s = 0; s < slices; ++s) {
    for (std::size_t j = 0; j < wa; ++j) out[s * (wa + wb) + j] = A[s * wa + j];
    for (std::size_t j = 0; j < wb; ++j) out[s * (wa + wb) + wa + j] = B[s * wb + j];
  }
  Var node = make_node(std::move(out), {a, b}, "concat");
  if (node->requires_grad) {
    node->backprop = [wa, wb, slices](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      const std::vector<double>& g = self.value.grad();
      for (std::size_t s = 0; s < slices; ++s) {
        if (pa.requires_grad) {
          std::vector<double>& ga = pa.value.grad();
          for (std::size_t j = 0; j < wa; ++j) ga[s * wa + j] += g[s * (wa + wb) + j];
        }
        if (pb.requires_grad) {
          std::vector<double>& gb = pb.value.grad();
          for (std::size_t j = 0; j < wb; ++j) gb[s * wb + j] += g[s * (wa + wb) + wa + j];
        }
      }
    };
  }
  return node;
}

Var select_row(const Var& x, std::size_t row) {
  const Tensor& X = x->value;
  if (X.ndim() != 2) throw ContractError("select_row: need a 2-d tensor, got " + X.shape_str());
  if (row >= X.rows()) {
    throw ContractError("select_row: row " + std::to_string(row) + " out of range for " +
                        X.shape_str());
  }
  const std::size_t c = X.cols();
  Tensor out({1, c});
  for (std::size_t j = 0; j < c; ++j) out[j] = X[row * c + j];
  Var node = make_node(std::move(out), {x}, "select_row");
  if (node->requires_grad) {
    node->backprop = [row, c](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t j = 0; j < c; ++j) pg[row * c + j] += g[j];
    };
  }
  return node;
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw ContractError("stack_rows: empty row list");
  const std::size_t c = rows[0]->value.numel();
  for (const Var& r : rows) {
    if (r->value.ndim() != 2 || r->value.rows() != 1 || r->value.cols() != c) {
      throw DimensionError("stack_rows: expected 1x" + std::to_string(c) + " rows, got " +
                           r->value.shape_str());
    }
  }
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = rows[i]->value[j];
  }
  Var node = make_node(std::move(out), rows, "stack_rows");
  if (node->requires_grad) {
    node->backprop = [c](Node& self) {
      const std::vector<double>& g = self.value.grad();
      for (std::size_t i = 0; i < self.parents.size(); ++i) {
        Node& p = *self.parents[i];
        if (!p.requires_grad) continue;
        std::vector<double>& pg = p.value.grad();
        for (std::size_t j = 0; j < c; ++j) pg[j] += g[i * c + j];
      }
    };
  }
  return node;
}

Var transpose(const Var& x) {
  const Tensor& X = x->value;
  if (X.ndim() != 2) throw ContractError("transpose: need a 2-d tensor, got " + X.shape_str());
  const std::size_t m = X.rows(), n = X.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = X[i * n + j];
  }
  Var node = make_node(std::move(out), {x}, "transpose");
  if (node->requires_grad) {
    node->backprop = [m, n](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) pg[i * n + j] += g[j * m + i];
      }
    };
  }
  return node;
}

Var reshape(const Var& x, std::vector<std::size_t> shape) {
  if (shape_numel(shape) != x->value.numel()) {
    throw DimensionError("reshape: cannot view " + x->value.shape_str() + " as " +
                         shape_to_string(shape));
  }
  Tensor out(std::move(shape), x->value.values());
  Var node = make_node(std::move(out), {x}, "reshape");
  if (node->requires_grad) {
    node->backprop = [](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
    };
  }
  return node;
}

Var sum_all(const Var& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < x->value.numel(); ++i) total += x->value[i];
  Var node = make_node(Tensor::scalar(total), {x}, "sum_all");
  if (node->requires_grad) {
    node->backprop = [](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const double g = self.value.grad()[0];
      std::vector<double>& pg = p.value.grad();
      for (double& v : pg) v += g;
    };
  }
  return node;
}

Var scale(const Var& x, double c) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = c * x->value[i];
  Var node = make_node(std::move(out), {x}, "scale");
  if (node->requires_grad) {
    node->backprop = [c](Node& self) {
      Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const std::vector<double>& g = self.value.grad();
      std::vector<double>& pg = p.value.grad();
      for (std::size_t i = 0; i < g.size(); ++i) pg[i] += c * g[i];
    };
  }
  return node;
}

void backward(const Var& loss) {
  if (!loss) throw ContractError("backward: null loss node");
  if (!loss->value.is_scalar()) {
    throw ContractError("backward: loss must be scalar, got shape " + loss->value.shape_str());
  }
  if (!loss->requires_grad) {
    loss->value.grad()[0] += 1.0;  // nothing reachable wants a gradient
    return;
  }

  // Post-order over gradient-bearing nodes; children precede parents, so the
  // reversed order visits each node only after its output gradient is final.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    bool descended = false;
    while (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
        descended = true;
        break;
      }
    }
    if (!descended && stack.back().second >= stack.back().first->parents.size()) {
      order.push_back(stack.back().first);
      stack.pop_back();
    }
  }

  loss->value.grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    n->value.grad();  // ensure the buffer exists even for zero gradients
    if (n->backprop) n->backprop(*n);
  }
}

void zero_grad(const std::vector<Var>& vars) {
  for (const Var& v : vars) v->value.zero_grad();
}

double grad_check(const std::function<Var()>& build, const std::vector<Var>& leaves, double h) {
  zero_grad(leaves);
  backward(build());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const Var& l : leaves) analytic.push_back(l->value.grad());

  const auto eval = [&build]() { return build()->value[0]; };
  double worst = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor& t = leaves[li]->value;
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double fp = eval();
      t[i] = saved - h;
      const double fm = eval();
      t[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[li][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace scaffcite::ad
