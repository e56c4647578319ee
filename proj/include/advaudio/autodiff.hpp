/* Copyright 2026 The advaudio Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Reverse-mode differentiation over Tensor values.
//
// A Graph is an append-only tape. Every op appends one node holding its
// output value, so node ids are already a topological order and backward()
// is a single reverse sweep. Nodes that do not depend on any gradient-bearing
// leaf keep no backward closure.
//
// Shapes never broadcast implicitly. The only mixing allowed is a rank-0
// scalar against a tensor in the elementwise binary ops; row-wise bias style
// operations are spelled out (add_row, mul_row).

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "advaudio/errors.hpp"
#include "advaudio/tensor.hpp"

namespace advaudio::ad {

class Graph;

class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  inline const Tensor& value() const;
  inline const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardContext {
  const Tensor& out;
  const Tensor& out_grad;
  std::vector<const Tensor*> in;
  // nullptr for inputs that need no gradient.
  std::vector<Tensor*> in_grad;
};

using BackwardFn = std::function<void(BackwardContext&)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Tensor value, bool requires_grad = true) {
    check_finite(value, "input");
    return push(std::make_shared<const Tensor>(std::move(value)), {}, nullptr, requires_grad,
                "input");
  }

  Var constant(Tensor value) { return input(std::move(value), false); }

  Var constant(std::shared_ptr<const Tensor> value) {
    check_finite(*value, "constant");
    return push(std::move(value), {}, nullptr, false, "constant");
  }

  // Appends an op node. `fn` may be empty for ops with no differentiable input.
  Var record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
    check_finite(value, op);
    std::vector<std::size_t> ids;
    ids.reserve(inputs.size());
    bool needs = false;
    for (const Var& v : inputs) {
      if (v.graph_ != this) throw Error(std::string(op) + ": input belongs to another graph");
      ids.push_back(v.id_);
      needs = needs || nodes_[v.id_].requires_grad;
    }
    if (!needs) fn = nullptr;
    return push(std::make_shared<const Tensor>(std::move(value)), std::move(ids), std::move(fn),
                needs, op);
  }

  void backward(Var root) {
    if (root.graph_ != this) throw Error("backward: root belongs to another graph");
    const Tensor& rv = value(root.id_);
    if (rv.size() != 1) {
      throw ShapeError("backward needs a scalar root, got shape " + shape_string(rv.shape()));
    }
    for (auto& n : nodes_) {
      if (n.requires_grad) {
        n.grad = Tensor(n.value->shape(), 0.0);
      } else {
        n.grad = Tensor();
      }
    }
    if (!nodes_[root.id_].requires_grad) return;
    nodes_[root.id_].grad.fill(1.0);

    for (std::size_t k = root.id_ + 1; k-- > 0;) {
      Node& n = nodes_[k];
      if (!n.requires_grad || !n.backward) continue;
      BackwardContext ctx{*n.value, n.grad, {}, {}};
      ctx.in.reserve(n.inputs.size());
      ctx.in_grad.reserve(n.inputs.size());
      for (std::size_t id : n.inputs) {
        Node& in = nodes_[id];
        ctx.in.push_back(in.value.get());
        ctx.in_grad.push_back(in.requires_grad ? &in.grad : nullptr);
      }
      n.backward(ctx);
    }
    backward_done_ = true;
  }

  const Tensor& value(std::size_t id) const { return *nodes_.at(id).value; }

  const Tensor& grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (!backward_done_ || !n.requires_grad) {
      throw Error("no gradient recorded for node " + std::to_string(id) + " (" + n.op + ")");
    }
    return n.grad;
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id_).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<const Tensor> value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    const char* op = "";
  };

  static void check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) throw NonFiniteError(std::string(op) + ": non-finite value");
  }

  Var push(std::shared_ptr<const Tensor> value, std::vector<std::size_t> inputs, BackwardFn fn,
           bool requires_grad, const char* op) {
    nodes_.push_back(Node{std::move(value), Tensor(), std::move(inputs), std::move(fn),
                          requires_grad, op});
    backward_done_ = false;
    return Var(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return graph_->value(id_); }
inline const Tensor& Var::grad() const { return graph_->grad(id_); }

namespace detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

inline ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}
inline MutMap as_matrix(Tensor& t) {
  return MutMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

inline void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

// Elementwise unary op given f(x) and df/dx expressed through (x, f(x)).
template <class F, class DF>
Var unary(const char* op, Var x, F f, DF df) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return x.graph().record(op, std::move(out), {x}, [df](BackwardContext& c) {
    const Tensor& xv = *c.in[0];
    Tensor& gx = *c.in_grad[0];
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += c.out_grad[i] * df(xv[i], c.out[i]);
  });
}

enum class BinaryKind { kAdd, kSub, kMul };

inline Var binary(const char* op, BinaryKind kind, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool a_scalar = av.is_scalar() && !bv.is_scalar();
  const bool b_scalar = bv.is_scalar() && !av.is_scalar();
  if (!a_scalar && !b_scalar) require_same_shape(op, av, bv);

  const Shape& shape = a_scalar ? bv.shape() : av.shape();
  Tensor out(shape);
  const std::size_t n = out.size();
  auto A = [&](std::size_t i) { return a_scalar ? av[0] : av[i]; };
  auto B = [&](std::size_t i) { return b_scalar ? bv[0] : bv[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case BinaryKind::kAdd: out[i] = A(i) + B(i); break;
      case BinaryKind::kSub: out[i] = A(i) - B(i); break;
      case BinaryKind::kMul: out[i] = A(i) * B(i); break;
    }
  }
  return a.graph().record(op, std::move(out), {a, b},
                          [kind, a_scalar, b_scalar](BackwardContext& c) {
    const Tensor& av = *c.in[0];
    const Tensor& bv = *c.in[1];
    const std::size_t n = c.out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = c.out_grad[i];
      double ga = g, gb = g;
      if (kind == BinaryKind::kSub) gb = -g;
      if (kind == BinaryKind::kMul) {
        ga = g * (b_scalar ? bv[0] : bv[i]);
        gb = g * (a_scalar ? av[0] : av[i]);
      }
      if (c.in_grad[0]) (*c.in_grad[0])[a_scalar ? 0 : i] += ga;
      if (c.in_grad[1]) (*c.in_grad[1])[b_scalar ? 0 : i] += gb;
    }
  });
}

}  // namespace detail

inline Var add(Var a, Var b) { return detail::binary("add", detail::BinaryKind::kAdd, a, b); }
inline Var sub(Var a, Var b) { return detail::binary("sub", detail::BinaryKind::kSub, a, b); }
inline Var mul(Var a, Var b) { return detail::binary("mul", detail::BinaryKind::kMul, a, b); }

inline Var scale(Var x, double s) {
  return detail::unary("scale", x, [s](double v) { return s * v; },
                       [s](double, double) { return s; });
}

inline Var add_scalar(Var x, double s) {
  return detail::unary("add_scalar", x, [s](double v) { return v + s; },
                       [](double, double) { return 1.0; });
}

inline Var neg(Var x) { return scale(x, -1.0); }

inline Var tanh(Var x) {
  return detail::unary("tanh", x, [](double v) { return std::tanh(v); },
                       [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(Var x) {
  return detail::unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Var exp(Var x) {
  return detail::unary("exp", x, [](double v) { return std::exp(v); },
                       [](double, double y) { return y; });
}

inline Var log(Var x) {
  return detail::unary("log", x, [](double v) { return std::log(v); },
                       [](double v, double) { return 1.0 / v; });
}

inline Var square(Var x) {
  return detail::unary("square", x, [](double v) { return v * v; },
                       [](double v, double) { return 2.0 * v; });
}

// d|x|/dx at 0 is taken as +1 (first branch wins).
inline Var abs(Var x) {
  return detail::unary("abs", x, [](double v) { return std::fabs(v); },
                       [](double v, double) { return v >= 0.0 ? 1.0 : -1.0; });
}

// Elementwise max(x, s). Ties route the gradient to x.
inline Var max_scalar(Var x, double s) {
  return detail::unary("max_scalar", x, [s](double v) { return v >= s ? v : s; },
                       [s](double v, double) { return v >= s ? 1.0 : 0.0; });
}

inline Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.graph().record("reshape", std::move(out), {x}, [](BackwardContext& c) {
    Tensor& g = *c.in_grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i];
  });
}

inline Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  detail::require_rank("matmul", av, 2);
  detail::require_rank("matmul", bv, 2);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()));
  }
  Tensor out(Shape{av.rows(), bv.cols()});
  detail::as_matrix(out).noalias() = detail::as_matrix(av) * detail::as_matrix(bv);
  return a.graph().record("matmul", std::move(out), {a, b}, [](BackwardContext& c) {
    auto g = detail::as_matrix(c.out_grad);
    if (c.in_grad[0]) {
      detail::as_matrix(*c.in_grad[0]).noalias() += g * detail::as_matrix(*c.in[1]).transpose();
    }
    if (c.in_grad[1]) {
      detail::as_matrix(*c.in_grad[1]).noalias() += detail::as_matrix(*c.in[0]).transpose() * g;
    }
  });
}

inline Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.graph().record("sum", Tensor::scalar(s), {x}, [](BackwardContext& c) {
    const double g = c.out_grad[0];
    for (double& v : c.in_grad[0]->values()) v += g;
  });
}

inline Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

// Max over all elements; the first maximal element receives the gradient.
inline Var max(Var x) {
  const Tensor& xv = x.value();
  std::size_t best = 0;
  for (std::size_t i = 1; i < xv.size(); ++i) {
    if (xv[i] > xv[best]) best = i;
  }
  return x.graph().record("max", Tensor::scalar(xv[best]), {x}, [best](BackwardContext& c) {
    (*c.in_grad[0])[best] += c.out_grad[0];
  });
}

namespace detail {

inline std::pair<std::size_t, std::size_t> last_axis(const char* op, const Tensor& t) {
  if (t.rank() == 0) throw ShapeError(std::string(op) + ": needs rank >= 1");
  const std::size_t cols = t.shape().back();
  return {cols == 0 ? 0 : t.size() / cols, cols};
}

}  // namespace detail

inline Var softmax(Var x) {
  const Tensor& xv = x.value();
  auto [rows, cols] = detail::last_axis("softmax", xv);
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.values().data() + r * cols;
    double* o = out.values().data() + r * cols;
    const double m = *std::max_element(in, in + cols);
    double z = 0.0;
    for (std::size_t k = 0; k < cols; ++k) z += (o[k] = std::exp(in[k] - m));
    for (std::size_t k = 0; k < cols; ++k) o[k] /= z;
  }
  return x.graph().record("softmax", std::move(out), {x}, [rows, cols](BackwardContext& c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = c.out.values().data() + r * cols;
      const double* g = c.out_grad.values().data() + r * cols;
      double* gx = c.in_grad[0]->values().data() + r * cols;
      double dot = 0.0;
      for (std::size_t k = 0; k < cols; ++k) dot += g[k] * y[k];
      for (std::size_t k = 0; k < cols; ++k) gx[k] += y[k] * (g[k] - dot);
    }
  });
}

inline Var log_softmax(Var x) {
  const Tensor& xv = x.value();
  auto [rows, cols] = detail::last_axis("log_softmax", xv);
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.values().data() + r * cols;
    double* o = out.values().data() + r * cols;
    const double m = *std::max_element(in, in + cols);
    double z = 0.0;
    for (std::size_t k = 0; k < cols; ++k) z += std::exp(in[k] - m);
    const double lz = m + std::log(z);
    for (std::size_t k = 0; k < cols; ++k) o[k] = in[k] - lz;
  }
  return x.graph().record("log_softmax", std::move(out), {x}, [rows, cols](BackwardContext& c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = c.out.values().data() + r * cols;
      const double* g = c.out_grad.values().data() + r * cols;
      double* gx = c.in_grad[0]->values().data() + r * cols;
      double gs = 0.0;
      for (std::size_t k = 0; k < cols; ++k) gs += g[k];
      for (std::size_t k = 0; k < cols; ++k) gx[k] += g[k] - std::exp(y[k]) * gs;
    }
  });
}

// log(sum(exp(x))) over the last axis, max-subtracted. Rank drops by one.
inline Var log_sum_exp(Var x) {
  const Tensor& xv = x.value();
  auto [rows, cols] = detail::last_axis("log_sum_exp", xv);
  Shape shape(xv.shape().begin(), xv.shape().end() - 1);
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.values().data() + r * cols;
    const double m = *std::max_element(in, in + cols);
    double z = 0.0;
    for (std::size_t k = 0; k < cols; ++k) z += std::exp(in[k] - m);
    out[r] = m + std::log(z);
  }
  return x.graph().record("log_sum_exp", std::move(out), {x}, [rows, cols](BackwardContext& c) {
    const Tensor& xv = *c.in[0];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* in = xv.values().data() + r * cols;
      double* gx = c.in_grad[0]->values().data() + r * cols;
      for (std::size_t k = 0; k < cols; ++k) {
        gx[k] += c.out_grad[r] * std::exp(in[k] - c.out[r]);
      }
    }
  });
}

inline Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  detail::require_rank("slice_rows", xv, 2);
  if (begin > end || end > xv.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of " + shape_string(xv.shape()));
  }
  const std::size_t cols = xv.cols();
  std::vector<double> v(xv.values().begin() + begin * cols, xv.values().begin() + end * cols);
  return x.graph().record("slice_rows", Tensor::matrix(end - begin, cols, std::move(v)), {x},
                          [begin, cols](BackwardContext& c) {
    double* gx = c.in_grad[0]->values().data() + begin * cols;
    for (std::size_t i = 0; i < c.out_grad.size(); ++i) gx[i] += c.out_grad[i];
  });
}

inline Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  detail::require_rank("slice_cols", xv, 2);
  if (begin > end || end > xv.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.rows(), cols = xv.cols(), w = end - begin;
  Tensor out(Shape{rows, w});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < w; ++k) out.at(r, k) = xv.at(r, begin + k);
  }
  return x.graph().record("slice_cols", std::move(out), {x},
                          [rows, begin, w, cols](BackwardContext& c) {
    Tensor& gx = *c.in_grad[0];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < w; ++k) gx[r * cols + begin + k] += c.out_grad[r * w + k];
    }
  });
}

inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].value().cols();
  std::vector<double> v;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    detail::require_rank("concat_rows", p.value(), 2);
    if (p.value().cols() != cols) {
      throw ShapeError("concat_rows: column mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    offsets.push_back(v.size());
    v.insert(v.end(), p.value().values().begin(), p.value().values().end());
  }
  const std::size_t rows = v.size() / std::max<std::size_t>(cols, 1);
  return parts[0].graph().record("concat_rows", Tensor::matrix(rows, cols, std::move(v)), parts,
                                 [offsets](BackwardContext& c) {
    for (std::size_t p = 0; p < c.in.size(); ++p) {
      if (!c.in_grad[p]) continue;
      Tensor& g = *c.in_grad[p];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[offsets[p] + i];
    }
  });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths, offsets;
  std::size_t total = 0;
  for (const Var& p : parts) {
    detail::require_rank("concat_cols", p.value(), 2);
    if (p.value().rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    offsets.push_back(total);
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor out(Shape{rows, total});
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& pv = parts[p].value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < widths[p]; ++k) out.at(r, offsets[p] + k) = pv.at(r, k);
    }
  }
  return parts[0].graph().record("concat_cols", std::move(out), parts,
                                 [rows, total, widths, offsets](BackwardContext& c) {
    for (std::size_t p = 0; p < c.in.size(); ++p) {
      if (!c.in_grad[p]) continue;
      Tensor& g = *c.in_grad[p];
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < widths[p]; ++k) {
          g[r * widths[p] + k] += c.out_grad[r * total + offsets[p] + k];
        }
      }
    }
  });
}

namespace detail {

enum class RowKind { kAdd, kMul };

inline Var row_op(const char* op, RowKind kind, Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  require_rank(op, xv, 2);
  if (rv.size() != xv.cols() || rv.rank() > 2 || (rv.rank() == 2 && rv.rows() != 1)) {
    throw ShapeError(std::string(op) + ": row " + shape_string(rv.shape()) +
                     " does not fit matrix " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      out.at(r, k) = kind == RowKind::kAdd ? xv.at(r, k) + rv[k] : xv.at(r, k) * rv[k];
    }
  }
  return x.graph().record(op, std::move(out), {x, row}, [kind, rows, cols](BackwardContext& c) {
    const Tensor& xv = *c.in[0];
    const Tensor& rv = *c.in[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < cols; ++k) {
        const double g = c.out_grad[r * cols + k];
        if (c.in_grad[0]) (*c.in_grad[0])[r * cols + k] += kind == RowKind::kAdd ? g : g * rv[k];
        if (c.in_grad[1]) (*c.in_grad[1])[k] += kind == RowKind::kAdd ? g : g * xv[r * cols + k];
      }
    }
  });
}

}  // namespace detail

// x (R x C) plus a length-C row added to every row.
inline Var add_row(Var x, Var row) { return detail::row_op("add_row", detail::RowKind::kAdd, x, row); }
// x (R x C) times a length-C row, elementwise on every row.
inline Var mul_row(Var x, Var row) { return detail::row_op("mul_row", detail::RowKind::kMul, x, row); }

// out.flat[i] = weights[i] * x.flat[index[i]]; gradient scatter-adds back.
inline Var gather(Var x, std::shared_ptr<const std::vector<std::size_t>> index,
                  std::shared_ptr<const std::vector<double>> weights, Shape out_shape) {
  const Tensor& xv = x.value();
  if (shape_size(out_shape) != index->size() || (weights && weights->size() != index->size())) {
    throw ShapeError("gather: index/weights do not match output shape " +
                     shape_string(out_shape));
  }
  Tensor out(std::move(out_shape));
  for (std::size_t i = 0; i < index->size(); ++i) {
    const std::size_t j = (*index)[i];
    if (j >= xv.size()) throw ShapeError("gather: index out of range");
    out[i] = (weights ? (*weights)[i] : 1.0) * xv[j];
  }
  return x.graph().record("gather", std::move(out), {x}, [index, weights](BackwardContext& c) {
    Tensor& g = *c.in_grad[0];
    for (std::size_t i = 0; i < index->size(); ++i) {
      g[(*index)[i]] += (weights ? (*weights)[i] : 1.0) * c.out_grad[i];
    }
  });
}

// out[r] = x[r, cols[r]] for an R x C matrix.
inline Var pick(Var x, const std::vector<int>& cols) {
  const Tensor& xv = x.value();
  detail::require_rank("pick", xv, 2);
  if (cols.size() != xv.rows()) {
    throw ShapeError("pick: " + std::to_string(cols.size()) + " indices for " +
                     shape_string(xv.shape()));
  }
  auto index = std::make_shared<std::vector<std::size_t>>(cols.size());
  for (std::size_t r = 0; r < cols.size(); ++r) {
    if (cols[r] < 0 || static_cast<std::size_t>(cols[r]) >= xv.cols()) {
      throw ShapeError("pick: column index out of range");
    }
    (*index)[r] = r * xv.cols() + static_cast<std::size_t>(cols[r]);
  }
  return gather(x, index, nullptr, Shape{cols.size()});
}

// Row mask for masked_row_max: mask[r * C + k] != 0 marks eligible entries.
using RowMask = std::vector<std::uint8_t>;

// out[r] = max over eligible k of x[r, k]. First maximal eligible entry gets
// the gradient. Every row needs at least one eligible entry.
inline Var masked_row_max(Var x, const RowMask& mask) {
  const Tensor& xv = x.value();
  detail::require_rank("masked_row_max", xv, 2);
  if (mask.size() != xv.size()) {
    throw ShapeError("masked_row_max: mask size does not match " + shape_string(xv.shape()));
  }
  const std::size_t rows = xv.rows(), cols = xv.cols();
  auto index = std::make_shared<std::vector<std::size_t>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = cols;
    for (std::size_t k = 0; k < cols; ++k) {
      if (!mask[r * cols + k]) continue;
      if (best == cols || xv.at(r, k) > xv.at(r, best)) best = k;
    }
    if (best == cols) throw ShapeError("masked_row_max: row " + std::to_string(r) + " has no eligible entry");
    (*index)[r] = r * cols + best;
  }
  return gather(x, index, nullptr, Shape{rows});
}

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator+(Var a, double s) { return add_scalar(a, s); }
inline Var operator-(Var a, double s) { return add_scalar(a, -s); }

}  // namespace advaudio::ad
