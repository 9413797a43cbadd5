// Copyright 2026 The Incremental Representation Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "ir/error.hpp"
#include "ir/ops.hpp"
#include "ir/tensor.hpp"

namespace ir::ad {
namespace {

Tensor leaf(Shape shape, std::vector<double> data) { return Tensor(std::move(shape), std::move(data), true); }

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(Tensor, RejectsDataShapeMismatch) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  EXPECT_THROW(Tensor({0, 2}, {}), ShapeError);
}

TEST(Tensor, CopiesShareStorageClonesDoNot) {
  Tensor a({2}, {1.0, 2.0});
  Tensor b = a;
  Tensor c = a.clone();
  a.mutable_data()[0] = 5.0;
  EXPECT_EQ(b[0], 5.0);
  EXPECT_EQ(c[0], 1.0);
  EXPECT_TRUE(a.same_storage(b));
  EXPECT_FALSE(a.same_storage(c));
}

TEST(Elementwise, ReluDefinition) {
  Tape tape(false);
  EXPECT_EQ(values(relu(tape, Tensor({3}, {-1.0, 0.0, 2.0}))), (std::vector<double>{0, 0, 2}));
}

TEST(Elementwise, AddZerosIsIdentity) {
  Tape tape(false);
  Tensor x({2, 2}, {1.5, -2.0, 3.25, 0.0});
  EXPECT_EQ(values(add(tape, x, Tensor::zeros({2, 2}))), values(x));
}

TEST(Elementwise, MulGradientMatchesOtherOperand) {
  Tensor a = leaf({1}, {2.0});
  Tensor b({1}, {3.0});
  Tape tape;
  tape.backward(sum(tape, mul(tape, a, b)));
  ASSERT_TRUE(a.has_grad());
  EXPECT_DOUBLE_EQ(a.grad()[0], 3.0);
  const auto check = testing::grad_check(
      [&](Tape& t, std::span<const Tensor> in) { return sum(t, mul(t, in[0], b)); }, {a});
  EXPECT_LT(check.max_rel_error, testing::kGradTolerance);
}

TEST(Elementwise, ShapeMismatchIsRejected) {
  Tape tape;
  Tensor a({2}, {1, 2});
  Tensor b({3}, {1, 2, 3});
  EXPECT_THROW(add(tape, a, b), ShapeError);
  EXPECT_THROW(sub(tape, a, b), ShapeError);
  EXPECT_THROW(mul(tape, a, b), ShapeError);
  try {
    add(tape, a, b);
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("[3]"), std::string::npos) << e.what();
  }
}

TEST(Matmul, IdentityAndHandArithmetic) {
  Tape tape(false);
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor m({2, 2}, {1.5, -2, 7, 0.25});
  EXPECT_EQ(values(matmul(tape, eye, m)), values(m));
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor ones({2, 1}, {1, 1});
  const Tensor r = matmul(tape, a, ones);
  EXPECT_EQ(r.shape(), (Shape{2, 1}));
  EXPECT_EQ(values(r), (std::vector<double>{3, 7}));
}

TEST(Matmul, InnerDimensionMismatch) {
  Tape tape;
  EXPECT_THROW(matmul(tape, Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
  EXPECT_THROW(matmul(tape, Tensor::zeros({6}), Tensor::zeros({6, 1})), ShapeError);
}

TEST(Matmul, GradientFormulas) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> av(12), bv(8), gv(6);
  for (auto* v : {&av, &bv, &gv}) for (double& x : *v) x = u(rng);
  Tensor a = leaf({3, 4}, av);
  Tensor b = leaf({4, 2}, bv);
  Tensor g({3, 2}, gv);
  Tape tape;
  tape.backward(sum(tape, mul(tape, matmul(tape, a, b), g)));
  // grad_a = g . b^T, grad_b = a^T . g
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 2; ++j) expect += gv[i * 2 + j] * bv[k * 2 + j];
      EXPECT_NEAR(a.grad()[i * 4 + k], expect, 1e-14);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 2; ++j) {
      double expect = 0.0;
      for (std::size_t i = 0; i < 3; ++i) expect += av[i * 4 + k] * gv[i * 2 + j];
      EXPECT_NEAR(b.grad()[k * 2 + j], expect, 1e-14);
    }
  }
}

TEST(Conv2d, ZeroKernelsGiveZeroOutput) {
  Tape tape(false);
  std::vector<double> in(2 * 5 * 5);
  std::iota(in.begin(), in.end(), 1.0);
  const Tensor out = conv2d(tape, Tensor({1, 2, 5, 5}, in), Tensor::zeros({3, 2, 3, 3}));
  EXPECT_EQ(out.shape(), (Shape{1, 3, 5, 5}));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, CenteredDeltaSumsChannels) {
  Tape tape(false);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> in(2 * 4 * 4);
  for (double& v : in) v = u(rng);
  std::vector<double> k(1 * 2 * 9, 0.0);
  k[4] = 1.0;
  k[9 + 4] = 1.0;
  const Tensor out = conv2d(tape, Tensor({1, 2, 4, 4}, in), Tensor({1, 2, 3, 3}, k));
  ASSERT_EQ(out.shape(), (Shape{1, 1, 4, 4}));
  for (std::size_t p = 0; p < 16; ++p) EXPECT_DOUBLE_EQ(out[p], in[p] + in[16 + p]);
}

TEST(Conv2d, OutputShapesAndErrors) {
  Tape tape(false);
  const Tensor same = conv2d(tape, Tensor::zeros({2, 3, 6, 5}), Tensor::zeros({4, 3, 3, 3}));
  EXPECT_EQ(same.shape(), (Shape{2, 4, 6, 5}));
  const Tensor none = conv2d(tape, Tensor::zeros({2, 3, 6, 5}), Tensor::zeros({4, 3, 3, 3}),
                             Tensor(), Padding::kNone);
  EXPECT_EQ(none.shape(), (Shape{2, 4, 4, 3}));
  EXPECT_THROW(conv2d(tape, Tensor::zeros({1, 2, 6, 6}), Tensor::zeros({4, 3, 3, 3})), ShapeError);
  EXPECT_THROW(conv2d(tape, Tensor::zeros({1, 1, 2, 6}), Tensor::zeros({1, 1, 3, 3})), ShapeError);
  EXPECT_THROW(conv2d(tape, Tensor::zeros({1, 1, 6, 6}), Tensor::zeros({1, 1, 5, 5})), ShapeError);
}

TEST(Conv2d, MatchesDirectLoop) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = 2, c = 2, h = 5, w = 4, o = 3;
  std::vector<double> in(n * c * h * w), k(o * c * 9), b(o);
  for (auto* v : {&in, &k, &b}) for (double& x : *v) x = u(rng);
  Tape tape(false);
  const Tensor out = conv2d(tape, Tensor({n, c, h, w}, in), Tensor({o, c, 3, 3}, k), Tensor({o}, b));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t oc = 0; oc < o; ++oc)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          double acc = b[oc];
          for (std::size_t ic = 0; ic < c; ++ic)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
                acc += in[((s * c + ic) * h + yy) * w + xx] * k[((oc * c + ic) * 3 + (dy + 1)) * 3 + (dx + 1)];
              }
          EXPECT_NEAR(out[((s * o + oc) * h + y) * w + x], acc, 1e-12);
        }
}

TEST(Maxpool, DefinitionAndTieBreak) {
  Tape tape(false);
  const Tensor r = maxpool2d(tape, Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(r.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(r[0], 4.0);

  Tensor constant = leaf({1, 1, 4, 4}, std::vector<double>(16, 0.5));
  Tape rec;
  const Tensor pooled = maxpool2d(rec, constant);
  for (double v : pooled.data()) EXPECT_EQ(v, 0.5);
  rec.backward(sum(rec, pooled));
  const std::vector<double> expect{1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0};
  EXPECT_EQ(std::vector<double>(constant.grad().begin(), constant.grad().end()), expect);
}

TEST(Maxpool, OddDimensionsRejected) {
  Tape tape;
  EXPECT_THROW(maxpool2d(tape, Tensor::zeros({1, 1, 3, 4})), ShapeError);
  EXPECT_THROW(maxpool2d(tape, Tensor::zeros({1, 1, 4, 5})), ShapeError);
}

TEST(Softmax, KnownValues) {
  Tape tape(false);
  for (double tau : {0.1, 1.0, 7.0}) {
    const Tensor p = softmax_with_temperature(tape, Tensor({1, 2}, {0, 0}), tau);
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
  }
  const Tensor p = softmax_with_temperature(tape, Tensor({1, 2}, {1, 0}), 1.0);
  // e / (e + 1), evaluated independently.
  const double e = std::exp(1.0);
  EXPECT_NEAR(p[0], e / (e + 1.0), 1e-15);
  EXPECT_NEAR(p[0], 0.73106, 1e-4);
  EXPECT_NEAR(p[1], 0.26894, 1e-4);
  const Tensor flat = softmax_with_temperature(tape, Tensor({1, 2}, {8, 0}), 1024.0);
  EXPECT_NEAR(flat[0], 0.5, 1e-2);
  EXPECT_NEAR(flat[1], 0.5, 1e-2);
}

TEST(Softmax, NonPositiveTemperatureRejected) {
  Tape tape;
  EXPECT_THROW(softmax_with_temperature(tape, Tensor({1, 2}, {0, 0}), 0.0), std::invalid_argument);
  EXPECT_THROW(softmax_with_temperature(tape, Tensor({1, 2}, {0, 0}), -1.0), std::invalid_argument);
}

TEST(SoftmaxProperty, RowsSumToOneForLargeLogits) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  Tape tape(false);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(4 * 7);
    for (double& v : logits) v = u(rng);
    for (double tau : {0.25, 1.0, 16.0}) {
      const Tensor p = softmax_with_temperature(tape, Tensor({4, 7}, logits), tau);
      for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 7; ++c) {
          ASSERT_TRUE(std::isfinite(p[r * 7 + c]));
          s += p[r * 7 + c];
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
}

TEST(SoftmaxProperty, EntropyNonDecreasingInTemperature) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Tape tape(false);
  const std::vector<double> taus{0.05, 0.1, 0.5, 1, 2, 4, 8, 16, 64, 1024};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(6);
    for (double& v : logits) v = u(rng);
    double previous = -1.0;
    for (double tau : taus) {
      const Tensor p = softmax_with_temperature(tape, Tensor({1, 6}, logits), tau);
      double h = 0.0;
      for (double v : p.data()) if (v > 0) h -= v * std::log(v);
      EXPECT_GE(h, previous - 1e-12);
      previous = h;
    }
  }
}

TEST(CrossEntropy, ClosedForms) {
  Tape tape(false);
  const std::vector<std::size_t> labels{1, 0};
  EXPECT_DOUBLE_EQ(cross_entropy(tape, Tensor({2, 2}, {0, 1, 1, 0}), labels).item(), 0.0);
  const std::vector<std::size_t> one{2};
  EXPECT_NEAR(cross_entropy(tape, Tensor({1, 4}, {0.25, 0.25, 0.25, 0.25}), one).item(),
              std::log(4.0), 1e-15);
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(CrossEntropy, FloorsLogProbability) {
  Tape tape(false);
  const std::vector<std::size_t> labels{0};
  EXPECT_NEAR(cross_entropy(tape, Tensor({1, 2}, {0, 1}), labels).item(),
              -std::log(kLogProbabilityFloor), 1e-9);
}

TEST(CrossEntropy, LabelOutOfRange) {
  Tape tape;
  const std::vector<std::size_t> labels{2};
  EXPECT_THROW(cross_entropy(tape, Tensor({1, 2}, {0.5, 0.5}), labels), std::out_of_range);
  const std::vector<std::size_t> too_few{};
  EXPECT_THROW(cross_entropy(tape, Tensor({1, 2}, {0.5, 0.5}), too_few), ShapeError);
}

TEST(LpPenalty, HandArithmetic) {
  Tape tape(false);
  const Tensor a({1, 2}, {1, 2});
  const Tensor b({1, 2}, {1, 0});
  EXPECT_DOUBLE_EQ(vector_lp_penalty(tape, a, b, 2).item(), 2.0);
  EXPECT_DOUBLE_EQ(vector_lp_penalty(tape, a, b, 1).item(), 2.0);
  EXPECT_DOUBLE_EQ(vector_lp_penalty(tape, a, a, 2).item(), 0.0);
  EXPECT_DOUBLE_EQ(vector_lp_penalty(tape, a, a, 1).item(), 0.0);
  // Batch mean of per-row norms: rows (3,4) and (0,0) -> (5 + 0) / 2.
  EXPECT_DOUBLE_EQ(vector_lp_penalty(tape, Tensor({2, 2}, {3, 4, 0, 0}), Tensor::zeros({2, 2}), 2).item(), 2.5);
}

TEST(LpPenalty, ZeroRowSubgradientIsZero) {
  Tensor a = leaf({2, 2}, {1, 1, 3, 4});
  Tensor b({2, 2}, {1, 1, 0, 0});
  Tape tape;
  tape.backward(vector_lp_penalty(tape, a, b, 2));
  EXPECT_EQ(a.grad()[0], 0.0);
  EXPECT_EQ(a.grad()[1], 0.0);
  EXPECT_DOUBLE_EQ(a.grad()[2], 0.5 * 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(a.grad()[3], 0.5 * 4.0 / 5.0);
}

TEST(LpPenalty, Errors) {
  Tape tape;
  EXPECT_THROW(vector_lp_penalty(tape, Tensor::zeros({2, 2}), Tensor::zeros({2, 3}), 2), ShapeError);
  EXPECT_THROW(vector_lp_penalty(tape, Tensor::zeros({2, 2}), Tensor::zeros({2, 2}), 3), std::invalid_argument);
}

TEST(NuclearPenalty, ZeroAndRankOne) {
  Tape tape(false);
  const Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_NEAR(nuclear_penalty(tape, a, a).item(), 0.0, 1e-15);
  // u v^T with unit u in R^1 (batch 1) and unit v in R^3.
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(nuclear_penalty(tape, Tensor({1, 3}, {s, s, s}), Tensor::zeros({1, 3})).item(), 1.0, 1e-12);
  EXPECT_THROW(nuclear_penalty(tape, Tensor::zeros({2, 2}), Tensor::zeros({3, 2})), ShapeError);
}

TEST(PenaltyProperty, NonNegativeAndZeroOnEqualInputs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  Tape tape(false);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> av(12), bv(12);
    for (double& v : av) v = u(rng);
    for (double& v : bv) v = u(rng);
    const Tensor a({3, 4}, av), b({3, 4}, bv);
    EXPECT_GE(vector_lp_penalty(tape, a, b, 1).item(), 0.0);
    EXPECT_GE(vector_lp_penalty(tape, a, b, 2).item(), 0.0);
    EXPECT_GE(nuclear_penalty(tape, a, b).item(), 0.0);
    EXPECT_EQ(vector_lp_penalty(tape, a, a, 1).item(), 0.0);
    EXPECT_EQ(vector_lp_penalty(tape, a, a, 2).item(), 0.0);
    EXPECT_EQ(nuclear_penalty(tape, a, a).item(), 0.0);
  }
}

TEST(Backward, SumGivesOnes) {
  Tensor x = leaf({2, 3, 2}, std::vector<double>(12, 0.3));
  Tape tape;
  tape.backward(sum(tape, x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, DetachedLeafGetsNoGradient) {
  Tensor x = leaf({2}, {1, 2});
  Tensor y = leaf({2}, {3, 4});
  Tape tape;
  const Tensor loss = sum(tape, y);
  (void)relu(tape, x);
  tape.backward(loss);
  EXPECT_FALSE(x.has_grad());
  EXPECT_TRUE(y.has_grad());
}

TEST(Backward, RejectsNonScalarAndSecondCall) {
  Tensor x = leaf({2}, {1, 2});
  Tape tape;
  const Tensor y = scale(tape, x, 2.0);
  EXPECT_THROW(tape.backward(y), ShapeError);
  const Tensor loss = sum(tape, y);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), std::logic_error);
  tape.reset();
  x.clear_grad();
  const Tensor again = sum(tape, scale(tape, x, 2.0));
  tape.backward(again);
  EXPECT_EQ(x.grad()[0], 2.0);
}

TEST(Backward, Linearity) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xv(6), wv(6);
    for (double& v : xv) v = u(rng);
    for (double& v : wv) v = u(rng);
    const double alpha = u(rng) * 3.0;
    const Tensor w({2, 3}, wv);
    auto l1 = [&](Tape& t, const Tensor& x) {
      return sum(t, relu(t, mul(t, x, w)));
    };
    auto l2 = [&](Tape& t, const Tensor& x) {
      return vector_lp_penalty(t, x, w, 2);
    };
    auto grad_of = [&](auto&& build) {
      Tensor x = leaf({2, 3}, xv);
      Tape t;
      t.backward(build(t, x));
      return std::vector<double>(x.grad().begin(), x.grad().end());
    };
    const auto g1 = grad_of(l1);
    const auto g2 = grad_of(l2);
    const auto g = grad_of([&](Tape& t, const Tensor& x) {
      return add(t, scale(t, l1(t, x), alpha), l2(t, x));
    });
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], alpha * g1[i] + g2[i], 1e-10);
  }
}

TEST(Backward, GradientsAccumulateAcrossUses) {
  Tensor x = leaf({1}, {3.0});
  Tape tape;
  tape.backward(sum(tape, mul(tape, x, x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Backward, ValuesStayFinite) {
  Tensor logits = leaf({2, 3}, {1000, -1000, 0, 5, 5, 5});
  Tape tape;
  const std::vector<std::size_t> labels{1, 0};
  const Tensor loss = cross_entropy(tape, softmax_with_temperature(tape, logits, 0.01), labels);
  tape.backward(loss);
  EXPECT_TRUE(std::isfinite(loss.item()));
  for (double g : logits.grad()) EXPECT_TRUE(std::isfinite(g));
}

}  // namespace
}  // namespace ir::ad
