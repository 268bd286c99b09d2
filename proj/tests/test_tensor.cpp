#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>

#include "gradcheck.hpp"
#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"
#include "spillnet/tensor.hpp"

using namespace spillnet;
using namespace spillnet::tensor;
using spillnet::testing::gradcheck;

namespace {

Tensor random(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(r, c, v, grad);
}

// Weighted sum so every output element gets a distinct upstream gradient.
Tensor probe(const Tensor& y, const Tensor& w) { return sum(mul(y, w)); }

struct UnaryCase {
  std::string name;
  std::function<Tensor(const Tensor&)> op;
  double lo, hi;
};

}  // namespace

TEST(Tensor, ElementwiseAndScalarBroadcast) {
  const auto a = Tensor::from(2, 2, {1, 2, 3, 4});
  const auto s = Tensor::scalar(10);
  const auto sum_as = add(a, s);
  EXPECT_EQ(std::vector<double>(sum_as.data().begin(), sum_as.data().end()), (std::vector<double>{11, 12, 13, 14}));
  const auto q = div(s, a);
  EXPECT_DOUBLE_EQ(q.at(1, 1), 2.5);
  EXPECT_THROW(add(a, Tensor::zeros(1, 2)), Error);
  EXPECT_THROW(matmul(a, Tensor::zeros(3, 1)), Error);
}

TEST(Tensor, MatmulValues) {
  const auto a = Tensor::from(2, 3, {1, 2, 3, 4, 5, 6});
  const auto b = Tensor::from(3, 1, {1, 0, -1});
  const auto c = matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_EQ(c.at(0, 0), -2.0);
  EXPECT_EQ(c.at(1, 0), -2.0);
}

TEST(Tensor, BackwardRequiresScalar) {
  Tape tape;
  TapeScope scope(tape);
  const auto x = Tensor::from(1, 2, {1, 2}, true);
  EXPECT_THROW(backward(tape, square(x)), Error);
}

TEST(Tensor, LeafGradientsAccumulate) {
  const auto x = Tensor::scalar(3.0, true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    TapeScope scope(tape);
    backward(tape, square(x));
  }
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Tensor, NoTapeNoGraph) {
  const auto x = Tensor::scalar(2.0, true);
  const auto y = mul(x, x);
  EXPECT_EQ(y.item(), 4.0);
  EXPECT_EQ(active_tape(), nullptr);
}

TEST(Tensor, SoftplusStableAtExtremes) {
  const auto y = softplus(Tensor::from(1, 3, {-800, 0, 800}));
  EXPECT_NEAR(y.at(0, 0), 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(y.at(0, 1), std::log(2.0));
  EXPECT_DOUBLE_EQ(y.at(0, 2), 800.0);
}

TEST(Tensor, SoftmaxRowsSumToOne) {
  Rng rng(3);
  const auto s = rowwise_softmax(random(4, 5, rng, -30, 30, false));
  for (std::size_t r = 0; r < 4; ++r) {
    double t = 0;
    for (std::size_t c = 0; c < 5; ++c) t += s.at(r, c);
    EXPECT_NEAR(t, 1.0, 1e-12);
  }
}

TEST(Tensor, RowNormZeroRowHasZeroSubgradient) {
  const auto x = Tensor::from(2, 2, {0, 0, 3, 4}, true);
  Tape tape;
  TapeScope scope(tape);
  backward(tape, sum(row_norm(x)));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 0.0);
  EXPECT_DOUBLE_EQ(x.grad()[2], 0.6);
  EXPECT_DOUBLE_EQ(x.grad()[3], 0.8);
}

TEST(TensorGrad, UnaryOps) {
  const std::vector<UnaryCase> cases{
      {"tanh", [](const Tensor& x) { return tanh(x); }, -2, 2},
      {"sigmoid", [](const Tensor& x) { return sigmoid(x); }, -3, 3},
      {"relu", [](const Tensor& x) { return relu(x); }, 0.1, 2},
      {"relu_neg", [](const Tensor& x) { return relu(x); }, -2, -0.1},
      {"softplus", [](const Tensor& x) { return softplus(x); }, -4, 4},
      {"exp", [](const Tensor& x) { return exp(x); }, -2, 2},
      {"ln", [](const Tensor& x) { return ln(x); }, 0.5, 3},
      {"sqrt", [](const Tensor& x) { return sqrt(x); }, 0.5, 3},
      {"square", [](const Tensor& x) { return square(x); }, -2, 2},
      {"scale", [](const Tensor& x) { return scale(x, -1.7); }, -2, 2},
      {"add_scalar", [](const Tensor& x) { return add_scalar(x, 0.3); }, -2, 2},
      {"transpose", [](const Tensor& x) { return transpose(x); }, -2, 2},
      {"softmax", [](const Tensor& x) { return rowwise_softmax(x); }, -2, 2},
      {"layer_norm", [](const Tensor& x) { return layer_norm(x); }, -2, 2},
      {"row_sum", [](const Tensor& x) { return row_sum(x); }, -2, 2},
      {"row_norm", [](const Tensor& x) { return row_norm(x); }, -2, 2},
      {"mean", [](const Tensor& x) { return mean(x); }, -2, 2},
      {"slice", [](const Tensor& x) { return slice(x, 1, 3, 1, 4); }, -2, 2},
  };
  for (const auto& c : cases) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      auto x = random(3, 4, rng, c.lo, c.hi);
      const auto shape = c.op(x).shape();
      const auto w = random(shape.rows, shape.cols, rng, -1, 1, false);
      const auto r = gradcheck({{"x", x}}, [&] { return probe(c.op(x), w); });
      EXPECT_LT(r.rel_error, 1e-6) << c.name << " seed " << seed << " at " << r.where;
    }
  }
}

TEST(TensorGrad, BinaryAndStructuralOps) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    auto a = random(3, 4, rng);
    auto b = random(3, 4, rng, 0.5, 2.0);
    auto m = random(4, 2, rng);
    auto s = random(1, 1, rng, 0.5, 1.5);
    auto row = random(1, 4, rng);
    auto col = random(3, 1, rng);
    const std::vector<std::size_t> idx{2, 0, 2};
    const auto w34 = random(3, 4, rng, -1, 1, false);
    const auto w32 = random(3, 2, rng, -1, 1, false);
    const auto w38 = random(3, 8, rng, -1, 1, false);
    const auto w64 = random(6, 4, rng, -1, 1, false);
    const std::vector<std::pair<std::string, std::function<Tensor()>>> cases{
        {"add", [&] { return probe(add(a, b), w34); }},
        {"sub", [&] { return probe(sub(a, b), w34); }},
        {"mul", [&] { return probe(mul(a, b), w34); }},
        {"div", [&] { return probe(div(a, b), w34); }},
        {"mul_scalar", [&] { return probe(mul(a, s), w34); }},
        {"div_by_scalar", [&] { return probe(div(a, s), w34); }},
        {"matmul", [&] { return probe(matmul(a, m), w32); }},
        {"expand_row", [&] { return probe(expand(row, 3, 4), w34); }},
        {"expand_col", [&] { return probe(expand(col, 3, 4), w34); }},
        {"concat_cols", [&] { return probe(concat_cols({a, b}), w38); }},
        {"concat_rows", [&] { return probe(concat_rows({a, b}), w64); }},
        {"gather_rows", [&] { return probe(gather_rows(a, idx), w34); }},
        {"reuse", [&] { return sum(mul(mul(a, a), b)); }},
    };
    for (const auto& [name, loss] : cases) {
      const auto r = gradcheck({{"a", a}, {"b", b}, {"m", m}, {"s", s}, {"row", row}, {"col", col}}, loss);
      EXPECT_LT(r.rel_error, 1e-6) << name << " seed " << seed << " at " << r.where;
    }
  }
}

TEST(TensorGrad, SmallMlpMatchesFiniteDifferences) {
  // 25 -> 8 -> 4 -> 1 with tanh hidden layers, squared error on a batch of 3
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    auto W1 = random(25, 8, rng, -0.3, 0.3);
    auto b1 = random(1, 8, rng, -0.1, 0.1);
    auto W2 = random(8, 4, rng, -0.5, 0.5);
    auto b2 = random(1, 4, rng, -0.1, 0.1);
    auto W3 = random(4, 1, rng, -0.5, 0.5);
    auto b3 = random(1, 1, rng, -0.1, 0.1);
    const auto x = random(3, 25, rng, -1, 1, false);
    const auto y = random(3, 1, rng, -1, 1, false);
    auto loss = [&] {
      const auto h1 = tanh(add(matmul(x, W1), expand(b1, 3, 8)));
      const auto h2 = tanh(add(matmul(h1, W2), expand(b2, 3, 4)));
      const auto out = add(matmul(h2, W3), expand(b3, 3, 1));
      return mean(square(sub(out, y)));
    };
    const auto r = gradcheck({{"W1", W1}, {"b1", b1}, {"W2", W2}, {"b2", b2}, {"W3", W3}, {"b3", b3}}, loss);
    EXPECT_EQ(r.checked, 25u * 8 + 8 + 8 * 4 + 4 + 4 + 1);
    EXPECT_LT(r.rel_error, 1e-4) << "seed " << seed << " at " << r.where << " analytic " << r.analytic
                                 << " numeric " << r.numeric;
  }
}
