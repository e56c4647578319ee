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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "advaudio/autodiff.hpp"
#include "advaudio/errors.hpp"
#include "support/oracles.hpp"

namespace advaudio {
namespace {

using testing::gradcheck;
using testing::random_tensor;

constexpr double kTol = 1e-4;

// Reduces any output to a scalar through fixed random weights, so every
// output element contributes to the checked gradient.
ad::Var weighted_sum(ad::Var v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor w = random_tensor(v.value().shape(), rng);
  return ad::sum(v * v.graph().constant(w));
}

using UnaryOp = ad::Var (*)(ad::Var);

void expect_unary_grad(UnaryOp op, const Tensor& x, const char* name) {
  auto r = gradcheck([op](ad::Graph&, ad::Var in) { return weighted_sum(op(in), 7); }, x);
  EXPECT_LT(r.rel_error, kTol) << name;
}

TEST(Autodiff, ElementwiseUnaryGradients) {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({3, 4}, rng);
  expect_unary_grad(ad::tanh, x, "tanh");
  expect_unary_grad(ad::sigmoid, x, "sigmoid");
  expect_unary_grad(ad::exp, x, "exp");
  expect_unary_grad(ad::square, x, "square");
  expect_unary_grad(ad::neg, x, "neg");
  expect_unary_grad(ad::abs, x, "abs");
  expect_unary_grad(ad::log, random_tensor({3, 4}, rng, 0.5, 2.0), "log");
}

TEST(Autodiff, ReductionsAndRowwiseGradients) {
  std::mt19937_64 rng(2);
  const Tensor x = random_tensor({3, 5}, rng);
  expect_unary_grad(ad::softmax, x, "softmax");
  expect_unary_grad(ad::log_softmax, x, "log_softmax");
  expect_unary_grad(ad::log_sum_exp, x, "log_sum_exp");
  expect_unary_grad(ad::sum, x, "sum");
  expect_unary_grad(ad::mean, x, "mean");
  expect_unary_grad(ad::max, x, "max");
}

TEST(Autodiff, BinaryGradients) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor({2, 3}, rng);
  const Tensor b = random_tensor({2, 3}, rng);
  for (int kind = 0; kind < 3; ++kind) {
    auto f = [&, kind](ad::Graph& g, ad::Var in) {
      ad::Var other = g.constant(b);
      ad::Var out = kind == 0 ? in + other : kind == 1 ? other - in : in * other;
      return weighted_sum(out, 11);
    };
    EXPECT_LT(gradcheck(f, a).rel_error, kTol) << "kind " << kind;
  }
  // Scalar broadcast on either side.
  auto f = [&](ad::Graph& g, ad::Var in) {
    ad::Var s = ad::sum(in);
    return weighted_sum(g.constant(b) * s + in * s, 12);
  };
  EXPECT_LT(gradcheck(f, a).rel_error, kTol);
}

TEST(Autodiff, MatmulGradientBothSides) {
  std::mt19937_64 rng(4);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({4, 2}, rng);
  auto left = [&](ad::Graph& g, ad::Var in) { return weighted_sum(ad::matmul(in, g.constant(b)), 5); };
  auto right = [&](ad::Graph& g, ad::Var in) { return weighted_sum(ad::matmul(g.constant(a), in), 6); };
  EXPECT_LT(gradcheck(left, a).rel_error, kTol);
  EXPECT_LT(gradcheck(right, b).rel_error, kTol);
}

TEST(Autodiff, MatmulMatchesNaiveProduct) {
  std::mt19937_64 rng(5);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({4, 2}, rng);
  ad::Graph g;
  const Tensor c = ad::matmul(g.constant(a), g.constant(b)).value();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), s, 1e-12);
    }
  }
}

TEST(Autodiff, SliceConcatRowOpsGradients) {
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor({4, 6}, rng);
  const Tensor row = random_tensor({6}, rng);
  auto f = [&](ad::Graph& g, ad::Var in) {
    ad::Var top = ad::slice_rows(in, 0, 2);
    ad::Var right = ad::slice_cols(in, 3, 6);
    ad::Var cat = ad::concat_cols({ad::slice_cols(top, 0, 3), ad::slice_rows(right, 1, 3)});
    ad::Var stacked = ad::concat_rows({cat, cat * cat});
    ad::Var shifted = ad::mul_row(ad::add_row(in, g.constant(row)), ad::reshape(ad::slice_rows(in, 2, 3), {6}));
    return weighted_sum(stacked, 1) + weighted_sum(shifted, 2);
  };
  EXPECT_LT(gradcheck(f, x).rel_error, kTol);
}

TEST(Autodiff, RowParameterGradient) {
  std::mt19937_64 rng(7);
  const Tensor x = random_tensor({3, 4}, rng);
  const Tensor row = random_tensor({4}, rng);
  auto f = [&](ad::Graph& g, ad::Var in) {
    return weighted_sum(ad::mul_row(g.constant(x), in) + ad::add_row(g.constant(x), in), 3);
  };
  EXPECT_LT(gradcheck(f, row).rel_error, kTol);
}

TEST(Autodiff, GatherPickAndMaskedMax) {
  std::mt19937_64 rng(8);
  const Tensor x = random_tensor({3, 4}, rng);
  auto index = std::make_shared<const std::vector<std::size_t>>(std::vector<std::size_t>{0, 5, 5, 11});
  auto weights = std::make_shared<const std::vector<double>>(std::vector<double>{0.5, -1.0, 2.0, 3.0});
  auto f = [&](ad::Graph&, ad::Var in) {
    ad::Var gathered = ad::gather(in, index, weights, {2, 2});
    ad::Var picked = ad::pick(in, {3, 0, 2});
    ad::RowMask mask = {1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0};
    return weighted_sum(gathered, 4) + weighted_sum(picked, 5) +
           weighted_sum(ad::masked_row_max(in, mask), 6);
  };
  EXPECT_LT(gradcheck(f, x).rel_error, kTol);
}

TEST(Autodiff, MaskedRowMaxValuesAndErrors) {
  ad::Graph g;
  ad::Var x = g.constant(Tensor::matrix({{1, 5, 3}, {7, 2, 9}}));
  const Tensor m = ad::masked_row_max(x, {1, 0, 1, 0, 1, 0}).value();
  EXPECT_EQ(m[0], 3.0);
  EXPECT_EQ(m[1], 2.0);
  EXPECT_THROW(ad::masked_row_max(x, {0, 0, 0, 1, 1, 1}), ShapeError);
  EXPECT_THROW(ad::masked_row_max(x, {1, 1}), ShapeError);
}

TEST(Autodiff, FanOutAccumulates) {
  ad::Graph g;
  ad::Var x = g.input(Tensor::scalar(3.0));
  ad::Var y = x * x + x * 2.0 + x;  // dy/dx = 2x + 3
  g.backward(y);
  EXPECT_DOUBLE_EQ(x.grad().item(), 9.0);
}

TEST(Autodiff, SecondBackwardResetsGradients) {
  ad::Graph g;
  ad::Var x = g.input(Tensor::scalar(2.0));
  ad::Var y = x * x;
  g.backward(y);
  g.backward(y);
  EXPECT_DOUBLE_EQ(x.grad().item(), 4.0);
}

TEST(Autodiff, ConstantsHaveNoGradient) {
  ad::Graph g;
  ad::Var c = g.constant(Tensor::scalar(2.0));
  ad::Var x = g.input(Tensor::scalar(1.0));
  ad::Var y = c * x;
  EXPECT_FALSE(g.requires_grad(c));
  EXPECT_TRUE(g.requires_grad(y));
  g.backward(y);
  EXPECT_DOUBLE_EQ(x.grad().item(), 2.0);
  EXPECT_THROW(c.grad(), Error);
}

TEST(Autodiff, BackwardNeedsScalarRoot) {
  ad::Graph g;
  ad::Var x = g.input(Tensor::vector({1, 2}));
  EXPECT_THROW(g.backward(x * 2.0), ShapeError);
}

TEST(Autodiff, NonFiniteValuesAreRejected) {
  ad::Graph g;
  EXPECT_THROW(g.input(Tensor::scalar(std::numeric_limits<double>::infinity())), NonFiniteError);
  ad::Var x = g.input(Tensor::scalar(0.0));
  EXPECT_THROW(ad::log(x), NonFiniteError);
  ad::Var big = g.input(Tensor::scalar(1000.0));
  EXPECT_THROW(ad::exp(big), NonFiniteError);
}

TEST(Autodiff, ShapeMismatchIsRejected) {
  ad::Graph g;
  ad::Var a = g.input(Tensor::vector({1, 2, 3}));
  ad::Var b = g.input(Tensor::vector({1, 2}));
  EXPECT_THROW(a + b, ShapeError);
  EXPECT_THROW(ad::matmul(g.input(Tensor(Shape{2, 3})), g.input(Tensor(Shape{2, 3}))), ShapeError);
}

TEST(Autodiff, VarsFromAnotherGraphAreRejected) {
  ad::Graph g1, g2;
  ad::Var a = g1.input(Tensor::scalar(1.0));
  ad::Var b = g2.input(Tensor::scalar(1.0));
  EXPECT_THROW(a + b, Error);
}

TEST(Autodiff, AbsAndMaxScalarTieRules) {
  ad::Graph g;
  ad::Var x = g.input(Tensor::vector({0.0, -1.0, 2.0}));
  g.backward(ad::sum(ad::abs(x)));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1], -1.0);

  ad::Graph h;
  ad::Var y = h.input(Tensor::vector({0.0, -1.0, 2.0}));
  h.backward(ad::sum(ad::max_scalar(y, 0.0)));
  EXPECT_EQ(y.grad()[0], 1.0);  // tie goes to x
  EXPECT_EQ(y.grad()[1], 0.0);
  EXPECT_EQ(y.grad()[2], 1.0);
}

TEST(Autodiff, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(9);
  ad::Graph g;
  const Tensor p = ad::softmax(g.constant(random_tensor({4, 7}, rng, -30, 30))).value();
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (double v : p.row(r)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace advaudio
