#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spillnet::tensor {

/// Row-major 2-D shape. Vectors are 1 x n, scalars 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  bool is_scalar() const noexcept { return rows == 1 && cols == 1; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tape;

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated lazily, same length as data
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // pushes this->grad into parents
  const Tape* tape = nullptr;
  std::size_t tape_index = 0;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

/// Shared handle to a dense 64-bit tensor. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> data, bool requires_grad = false);
  static Tensor row(std::span<const double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  std::span<double> mutable_data() { return node_->data; }
  double at(std::size_t r, std::size_t c) const { return node_->data[r * node_->shape.cols + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  /// Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

  /// Deep copy without graph history.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Records operations in execution order. Backward walks the record in
/// exact reverse. A tape is confined to the thread that records on it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void record(const std::shared_ptr<Node>& node);

 private:
  friend void backward(Tape& tape, const Tensor& loss);
  std::vector<std::shared_ptr<Node>> nodes_;
};

/// Makes `tape` the recording target for the current thread while alive.
/// Without an active tape, operations compute values only.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape() noexcept;

/// Populates grad on every requires_grad tensor the loss depends on.
/// Leaf gradients accumulate across calls; throws NotScalarLoss.
void backward(Tape& tape, const Tensor& loss);

// Elementwise binary ops: equal shapes, or either operand a 1 x 1 scalar.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
/// ln(1 + e^x) as max(x, 0) + ln(1 + e^-|x|).
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor ln(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// rows x 1 column of per-row sums.
Tensor row_sum(const Tensor& x);
/// rows x 1 column of per-row L2 norms; the subgradient at a zero row is 0.
Tensor row_norm(const Tensor& x);

/// Explicit broadcast of a 1 x c row, r x 1 column or 1 x 1 scalar to rows x cols.
Tensor expand(const Tensor& x, std::size_t rows, std::size_t cols);

Tensor rowwise_softmax(const Tensor& x);
/// Per-row standardization over the last axis, epsilon 1e-5, no affine.
Tensor layer_norm(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
/// Rows [r0, r1) and columns [c0, c1).
Tensor slice(const Tensor& x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);

inline constexpr double kLayerNormEpsilon = 1e-5;

}  // namespace spillnet::tensor
