#include "spillnet/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "spillnet/error.hpp"

namespace spillnet::tensor {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

thread_local Tape* g_active = nullptr;

using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(Shape s) {
  auto n = std::make_shared<Node>();
  n->shape = s;
  n->data.assign(s.size(), 0.0);
  return n;
}

Tensor finish(NodePtr out, std::vector<NodePtr> parents, std::function<void(Node&)> bw) {
  Tape* tape = g_active;
  if (tape == nullptr) return Tensor(std::move(out));
  bool need = false;
  for (const auto& p : parents) need = need || p->requires_grad;
  if (!need) return Tensor(std::move(out));
  out->requires_grad = true;
  out->parents = std::move(parents);
  out->backward = std::move(bw);
  tape->record(out);
  return Tensor(std::move(out));
}

/// Gradient buffer of a parent, or nullptr when it does not need one.
double* grad_of(Node& p) {
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return p.grad.data();
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + a.str() + " vs " + b.str());
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": undefined tensor");
}

enum class Bcast { Same, ScalarA, ScalarB };

Bcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() == b.shape()) return Bcast::Same;
  if (a.shape().is_scalar()) return Bcast::ScalarA;
  if (b.shape().is_scalar()) return Bcast::ScalarB;
  mismatch(op, a.shape(), b.shape());
}

/// Elementwise binary op. `f(a, b)` is the value; `da(a, b, y)` and `db(a, b, y)`
/// are the local partials.
template <class F, class DA, class DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  const Bcast kind = broadcast_kind(op, a, b);
  const Shape out_shape = kind == Bcast::ScalarA ? b.shape() : a.shape();
  auto out = make_node(out_shape);
  const std::size_t n = out_shape.size();
  const auto& ad = a.node()->data;
  const auto& bd = b.node()->data;
  const std::size_t sa = kind == Bcast::ScalarA ? 0 : 1;
  const std::size_t sb = kind == Bcast::ScalarB ? 0 : 1;
  for (std::size_t i = 0; i < n; ++i) out->data[i] = f(ad[i * sa], bd[i * sb]);
  return finish(out, {a.node(), b.node()}, [sa, sb, n, da, db](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    double* ga = grad_of(pa);
    double* gb = grad_of(pb);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = self.grad[i];
      if (g == 0.0) continue;
      const double x = pa.data[i * sa];
      const double y = pb.data[i * sb];
      if (ga) ga[i * sa] += g * da(x, y, self.data[i]);
      if (gb) gb[i * sb] += g * db(x, y, self.data[i]);
    }
  });
}

/// Elementwise unary op with local derivative `df(x, y)`.
template <class F, class DF>
Tensor unary(const char* op, const Tensor& x, F f, DF df) {
  require_defined(x, op);
  auto out = make_node(x.shape());
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < xd.size(); ++i) out->data[i] = f(xd[i]);
  return finish(out, {x.node()}, [df](Node& self) {
    Node& p = *self.parents[0];
    double* g = grad_of(p);
    if (!g) return;
    for (std::size_t i = 0; i < self.data.size(); ++i) g[i] += self.grad[i] * df(p.data[i], self.data[i]);
  });
}

}  // namespace

std::string Shape::str() const { return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")"; }

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return full(rows, cols, 0.0, requires_grad);
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
  auto n = make_node({rows, cols});
  std::fill(n->data.begin(), n->data.end(), value);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> data, bool requires_grad) {
  if (data.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data.size()) + " does not fill " +
                                              Shape{rows, cols}.str());
  }
  auto n = std::make_shared<Node>();
  n->shape = {rows, cols};
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::row(std::span<const double> values, bool requires_grad) {
  return from(1, values.size(), std::vector<double>(values.begin(), values.end()), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return full(1, 1, value, requires_grad); }

double Tensor::item() const {
  if (!shape().is_scalar()) throw Error(ErrorCode::ShapeMismatch, "item() on " + shape().str());
  return node_->data[0];
}

Tensor Tensor::detach() const {
  auto n = make_node(shape());
  n->data = node_->data;
  return Tensor(n);
}

void Tape::record(const std::shared_ptr<Node>& node) {
  node->tape = this;
  node->tape_index = nodes_.size();
  nodes_.push_back(node);
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active) { g_active = &tape; }
TapeScope::~TapeScope() { g_active = previous_; }

Tape* active_tape() noexcept { return g_active; }

void backward(Tape& tape, const Tensor& loss) {
  if (!loss.defined() || !loss.shape().is_scalar()) {
    throw Error(ErrorCode::NotScalarLoss, "loss has shape " + (loss.defined() ? loss.shape().str() : "(none)"));
  }
  Node& root = *loss.node();
  if (root.tape != &tape || root.tape_index >= tape.nodes_.size() || tape.nodes_[root.tape_index].get() != &root) {
    throw Error(ErrorCode::NotScalarLoss, "loss was not recorded on this tape");
  }
  for (std::size_t i = 0; i <= root.tape_index; ++i) {
    Node& n = *tape.nodes_[i];
    n.grad.assign(n.data.size(), 0.0);
  }
  root.grad[0] = 1.0;
  for (std::size_t i = root.tape_index + 1; i-- > 0;) {
    Node& n = *tape.nodes_[i];
    if (n.backward) n.backward(n);
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double z) { return -z / y; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows()) mismatch("matmul", a.shape(), b.shape());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  auto out = make_node({m, n});
  Map(out->data.data(), m, n).noalias() = MapC(a.node()->data.data(), m, k) * MapC(b.node()->data.data(), k, n);
  return finish(out, {a.node(), b.node()}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    MapC g(self.grad.data(), m, n);
    if (double* ga = grad_of(pa)) Map(ga, m, k).noalias() += g * MapC(pb.data.data(), k, n).transpose();
    if (double* gb = grad_of(pb)) Map(gb, k, n).noalias() += MapC(pa.data.data(), m, k).transpose() * g;
  });
}

Tensor transpose(const Tensor& x) {
  require_defined(x, "transpose");
  const std::size_t r = x.rows(), c = x.cols();
  auto out = make_node({c, r});
  Map(out->data.data(), c, r) = MapC(x.node()->data.data(), r, c).transpose();
  return finish(out, {x.node()}, [r, c](Node& self) {
    if (double* g = grad_of(*self.parents[0])) Map(g, r, c) += MapC(self.grad.data(), c, r).transpose();
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      "add_scalar", x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      "softplus", x, [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor ln(const Tensor& x) {
  return unary(
      "ln", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  return unary(
      "sqrt", x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Tensor square(const Tensor& x) {
  return unary(
      "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  auto out = make_node({1, 1});
  double s = 0.0;
  for (double v : x.data()) s += v;
  out->data[0] = s;
  return finish(out, {x.node()}, [](Node& self) {
    Node& p = *self.parents[0];
    if (double* g = grad_of(p)) {
      for (std::size_t i = 0; i < p.data.size(); ++i) g[i] += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& x) {
  require_defined(x, "mean");
  if (x.size() == 0) throw Error(ErrorCode::ShapeMismatch, "mean of empty tensor " + x.shape().str());
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor row_sum(const Tensor& x) {
  require_defined(x, "row_sum");
  const std::size_t r = x.rows(), c = x.cols();
  auto out = make_node({r, 1});
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += xd[i * c + j];
    out->data[i] = s;
  }
  return finish(out, {x.node()}, [r, c](Node& self) {
    if (double* g = grad_of(*self.parents[0])) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[i];
    }
  });
}

Tensor row_norm(const Tensor& x) {
  require_defined(x, "row_norm");
  const std::size_t r = x.rows(), c = x.cols();
  auto out = make_node({r, 1});
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += xd[i * c + j] * xd[i * c + j];
    out->data[i] = std::sqrt(s);
  }
  return finish(out, {x.node()}, [r, c](Node& self) {
    Node& p = *self.parents[0];
    double* g = grad_of(p);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double n = self.data[i];
      if (n == 0.0) continue;
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[i] * p.data[i * c + j] / n;
    }
  });
}

Tensor expand(const Tensor& x, std::size_t rows, std::size_t cols) {
  require_defined(x, "expand");
  const std::size_t r = x.rows(), c = x.cols();
  const bool row_ok = r == 1 && (c == cols || c == 1);
  const bool col_ok = c == 1 && r == rows;
  if (!row_ok && !col_ok) mismatch("expand", x.shape(), Shape{rows, cols});
  const std::size_t rs = r == 1 ? 0 : 1;
  const std::size_t cs = c == 1 ? 0 : 1;
  auto out = make_node({rows, cols});
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out->data[i * cols + j] = xd[(i * rs) * c + j * cs];
  return finish(out, {x.node()}, [rows, cols, rs, cs, c](Node& self) {
    if (double* g = grad_of(*self.parents[0])) {
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) g[(i * rs) * c + j * cs] += self.grad[i * cols + j];
    }
  });
}

Tensor rowwise_softmax(const Tensor& x) {
  require_defined(x, "rowwise_softmax");
  const std::size_t r = x.rows(), c = x.cols();
  auto out = make_node(x.shape());
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < r; ++i) {
    const double* in = xd.data() + i * c;
    double* y = out->data.data() + i * c;
    const double m = *std::max_element(in, in + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(in[j] - m));
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  return finish(out, {x.node()}, [r, c](Node& self) {
    double* g = grad_of(*self.parents[0]);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.data.data() + i * c;
      const double* gy = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x) {
  require_defined(x, "layer_norm");
  const std::size_t r = x.rows(), c = x.cols();
  auto out = make_node(x.shape());
  std::vector<double> inv_std(r);
  const auto& xd = x.node()->data;
  for (std::size_t i = 0; i < r; ++i) {
    const double* in = xd.data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += in[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t j = 0; j < c; ++j) out->data[i * c + j] = (in[j] - mu) * inv_std[i];
  }
  return finish(out, {x.node()}, [r, c, inv_std = std::move(inv_std)](Node& self) {
    double* g = grad_of(*self.parents[0]);
    if (!g) return;
    const double nc = static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.data.data() + i * c;
      const double* gy = self.grad.data() + i * c;
      double sg = 0.0, sgy = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        sg += gy[j];
        sgy += gy[j] * y[j];
      }
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += inv_std[i] * (gy[j] - sg / nc - y[j] * sgy / nc);
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_cols");
    if (p.rows() != r) mismatch("concat_cols", parts[0].shape(), p.shape());
    total += p.cols();
  }
  auto out = make_node({r, total});
  std::vector<NodePtr> parents;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(p.node()->data.data() + i * c, c, out->data.data() + i * total + off);
    parents.push_back(p.node());
    offsets.push_back(off);
    off += c;
  }
  return finish(out, std::move(parents), [r, total, offsets = std::move(offsets)](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node& p = *self.parents[k];
      double* g = grad_of(p);
      if (!g) continue;
      const std::size_t c = p.shape.cols;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[i * total + offsets[k] + j];
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != c) mismatch("concat_rows", parts[0].shape(), p.shape());
    total += p.rows();
  }
  auto out = make_node({total, c});
  std::vector<NodePtr> parents;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.node()->data.begin(), p.node()->data.end(), out->data.begin() + static_cast<std::ptrdiff_t>(off));
    parents.push_back(p.node());
    offsets.push_back(off);
    off += p.size();
  }
  return finish(out, std::move(parents), [offsets = std::move(offsets)](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node& p = *self.parents[k];
      double* g = grad_of(p);
      if (!g) continue;
      for (std::size_t i = 0; i < p.data.size(); ++i) g[i] += self.grad[offsets[k] + i];
    }
  });
}

Tensor concat_cols(std::initializer_list<Tensor> parts) {
  return concat_cols(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat_rows(std::initializer_list<Tensor> parts) {
  return concat_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice(const Tensor& x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  require_defined(x, "slice");
  if (r0 > r1 || c0 > c1 || r1 > x.rows() || c1 > x.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "slice [" + std::to_string(r0) + "," + std::to_string(r1) + ")x[" +
                                              std::to_string(c0) + "," + std::to_string(c1) + ") of " +
                                              x.shape().str());
  }
  const std::size_t r = r1 - r0, c = c1 - c0, src_c = x.cols();
  auto out = make_node({r, c});
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(x.node()->data.data() + (r0 + i) * src_c + c0, c, out->data.data() + i * c);
  return finish(out, {x.node()}, [r, c, r0, c0, src_c](Node& self) {
    if (double* g = grad_of(*self.parents[0])) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[(r0 + i) * src_c + c0 + j] += self.grad[i * c + j];
    }
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  require_defined(x, "gather_rows");
  const std::size_t c = x.cols();
  for (std::size_t idx : indices) {
    if (idx >= x.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "gather_rows index " + std::to_string(idx) + " out of " + x.shape().str());
    }
  }
  auto out = make_node({indices.size(), c});
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy_n(x.node()->data.data() + indices[i] * c, c, out->data.data() + i * c);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return finish(out, {x.node()}, [c, idx = std::move(idx)](Node& self) {
    if (double* g = grad_of(*self.parents[0])) {
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < c; ++j) g[idx[i] * c + j] += self.grad[i * c + j];
    }
  });
}

}  // namespace spillnet::tensor
