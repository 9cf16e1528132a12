// Copyright (c) 2026 The GNOLR Authors. All Rights Reserved.
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

#include "test_util.hpp"

#include <cmath>
#include <random>

#include "gnolr/errors.hpp"
#include "gnolr/tensor.hpp"

namespace gnolr::tensor {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) { return uniform(r, c, -1.0, 1.0, rng); }

TEST_CASE("Matmul.IdentityAndHandExample") {
  Rng rng(1);
  const Matrix b = random_matrix(3, 2, rng);
  CHECK_EQ(matmul_forward(Matrix::Identity(3, 3), b), b);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix ones(2, 1);
  ones << 1, 1;
  Matrix want(2, 1);
  want << 3, 7;
  CHECK_EQ(matmul_forward(a, ones), want);
  CHECK_THROWS_AS(matmul_forward(a, Matrix::Zero(3, 1)), DimensionError);
}

TEST_CASE("Matmul.BackwardMatchesFiniteDifferences") {
  Rng rng(2);
  Parameter a("a", random_matrix(3, 4, rng));
  Parameter b("b", random_matrix(4, 2, rng));
  const Matrix w = random_matrix(3, 2, rng);  // loss = sum(w .* (a b))
  const auto g = matmul_backward(w, a.value, b.value);
  a.grad = g.a;
  b.grad = g.b;
  Parameter* ps[] = {&a, &b};
  GradCheckOptions opts;
  opts.samples = 20;
  opts.tolerance = 1e-6;
  const auto rep = finite_diff_check(
      [&] { return (matmul_forward(a.value, b.value).array() * w.array()).sum(); }, ps, opts);
  {
    INFO(rep.max_rel_error);
    CHECK(rep.passed);
  }
  CHECK_LT(rep.max_rel_error, 1e-6);
}

TEST_CASE("LeakyRelu.Examples") {
  CHECK_EQ(leaky_relu(2.0, 0.01), 2.0);
  CHECK_DOUBLE_EQ(leaky_relu(-3.0, 0.01), -0.03);
  CHECK_EQ(leaky_relu_grad(-1.0, 0.01), 0.01);
  Matrix x(1, 2);
  x << -1.0, 2.0;
  Matrix up = Matrix::Ones(1, 2);
  const Matrix d = leaky_relu_backward(up, x, 0.01);
  CHECK_EQ(d(0, 0), 0.01);
  CHECK_EQ(d(0, 1), 1.0);
}

TEST_CASE("Sigmoid.ValuesAndSymmetry") {
  CHECK_EQ(stable_sigmoid(0.0), 0.5);
  // 1 / (1 + e^3.7657) evaluated independently
  CHECK_NEAR(stable_sigmoid(-3.7657), 0.0226275413, 1e-9);
  CHECK_NEAR(stable_sigmoid(1.0), 0.73106, 5e-6);
  CHECK_EQ(stable_sigmoid(1000.0), 1.0);
  CHECK_EQ(stable_sigmoid(-1000.0), 0.0);
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    CHECK_NEAR(stable_sigmoid(x) + stable_sigmoid(-x), 1.0, 1e-15);
  }
}

TEST_CASE("Softplus.StableAtExtremes") {
  CHECK_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  CHECK_EQ(softplus(1000.0), 1000.0);
  CHECK_GT(softplus(-1000.0), -1e-300);
  CHECK(std::isfinite(softplus(-1000.0)));
}

TEST_CASE("L2Normalize.ExamplesAndDegenerate") {
  const double v[] = {3.0, 4.0};
  const auto n = l2_normalize(v);
  CHECK_DOUBLE_EQ(n.unit[0], 0.6);
  CHECK_DOUBLE_EQ(n.unit[1], 0.8);
  CHECK_FALSE(n.degenerate);
  const auto again = l2_normalize(n.unit);
  CHECK_NEAR(again.unit[0], 0.6, 1e-16);
  const double z[] = {0.0, 0.0, 0.0};
  const auto d = l2_normalize(z);
  CHECK(d.degenerate);
  for (double x : d.unit) CHECK_EQ(x, 0.0);
}

TEST_CASE("L2Normalize.NormPropertyOverRandomVectors") {
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(16);
    for (auto& x : v) x = g(rng);
    const auto n = l2_normalize(v);
    double sq = 0.0;
    for (double x : n.unit) sq += x * x;
    CHECK_NEAR(std::sqrt(sq), 1.0, 1e-9);
  }
}

TEST_CASE("L2Normalize.JacobianMatchesFiniteDifferences") {
  Rng rng(5);
  Parameter v("v", random_matrix(1, 16, rng));
  const Matrix w = random_matrix(1, 16, rng);
  auto loss = [&] {
    const auto n = l2_normalize(std::span<const double>(v.value.data(), 16));
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += w(0, i) * n.unit[static_cast<std::size_t>(i)];
    return s;
  };
  const auto g = l2_normalize_backward(std::span<const double>(w.data(), 16),
                                       std::span<const double>(v.value.data(), 16));
  for (int i = 0; i < 16; ++i) v.grad(0, i) = g[static_cast<std::size_t>(i)];
  Parameter* ps[] = {&v};
  GradCheckOptions opts;
  opts.samples = 16;
  opts.tolerance = 1e-5;
  const auto rep = finite_diff_check(loss, ps, opts);
  CHECK_LT(rep.max_rel_error, 1e-5);
}

TEST_CASE("NormalizeRows.BackwardMatchesFiniteDifferences") {
  Rng rng(6);
  Parameter x("x", random_matrix(4, 5, rng));
  const Matrix w = random_matrix(4, 5, rng);
  const auto fwd = normalize_rows(x.value);
  x.grad = normalize_rows_backward(w, fwd);
  Parameter* ps[] = {&x};
  const auto rep = finite_diff_check(
      [&] { return (normalize_rows(x.value).unit.array() * w.array()).sum(); }, ps,
      GradCheckOptions{.samples = 20});
  {
    INFO(rep.max_rel_error);
    CHECK(rep.passed);
  }
}

TEST_CASE("CosineKernel.Examples") {
  const double a[] = {1.0, 0.0};
  const double b[] = {0.0, 1.0};
  const double c[] = {-1.0, 0.0};
  CHECK_EQ(cosine_kernel(a, a), 1.0);
  CHECK_EQ(cosine_kernel(a, b), 0.0);
  CHECK_EQ(cosine_kernel(a, c), -1.0);
  const double z[] = {0.0, 0.0};
  CHECK_THROWS_AS(cosine_kernel(a, z), KernelError);
}

TEST_CASE("CosineKernel.BackwardMatchesFiniteDifferences") {
  Rng rng(7);
  Parameter a("a", random_matrix(1, 6, rng));
  Parameter b("b", random_matrix(1, 6, rng));
  const auto g = cosine_kernel_backward(std::span<const double>(a.value.data(), 6),
                                        std::span<const double>(b.value.data(), 6), 1.0);
  for (int i = 0; i < 6; ++i) {
    a.grad(0, i) = g.a[static_cast<std::size_t>(i)];
    b.grad(0, i) = g.b[static_cast<std::size_t>(i)];
  }
  Parameter* ps[] = {&a, &b};
  const auto rep = finite_diff_check(
      [&] {
        return cosine_kernel(std::span<const double>(a.value.data(), 6),
                             std::span<const double>(b.value.data(), 6));
      },
      ps, GradCheckOptions{.samples = 12});
  {
    INFO(rep.max_rel_error);
    CHECK(rep.passed);
  }
}

TEST_CASE("Adam.ZeroGradientLeavesValue") {
  Parameter p("p", Matrix::Constant(2, 3, 0.25));
  adam_step(p, AdamConfig{});
  CHECK_EQ(p.value, Matrix::Constant(2, 3, 0.25));
  CHECK_EQ(p.step_count, 1);
}

TEST_CASE("Adam.FirstStepMovesByLearningRate") {
  Parameter p("p", Matrix::Constant(1, 1, 1.0));
  p.grad(0, 0) = 1.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  adam_step(p, cfg);
  // m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
  CHECK_NEAR(p.value(0, 0), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
  CHECK_EQ(p.grad(0, 0), 0.0);
}

TEST_CASE("Adam.UntouchedRowsStayBitIdentical") {
  Rng rng(8);
  Parameter p("emb", random_matrix(5, 3, rng));
  const Matrix before = p.value;
  p.grad.row(2).setConstant(0.5);
  adam_step(p, AdamConfig{});
  for (Eigen::Index r = 0; r < 5; ++r) {
    if (r == 2) {
      CHECK_NE(p.value.row(r), before.row(r));
    } else {
      CHECK_EQ(p.value.row(r), before.row(r));
    }
  }
}

TEST_CASE("Adam.DeterministicAndRejectsNonFinite") {
  Rng r1(9);
  Rng r2(9);
  Parameter a("a", random_matrix(3, 3, r1));
  Parameter b("b", random_matrix(3, 3, r2));
  for (int s = 0; s < 5; ++s) {
    a.grad = a.value * 0.3;
    b.grad = b.value * 0.3;
    adam_step(a, AdamConfig{});
    adam_step(b, AdamConfig{});
  }
  CHECK_EQ(a.value, b.value);
  a.grad(1, 1) = std::nan("");
  try {
    adam_step(a, AdamConfig{});
    FAIL("expected OptimizerError");
  } catch (const OptimizerError& e) {
    CHECK_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST_CASE("AdamConfig.Validates") {
  AdamConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS(c.validate());
  c = AdamConfig{};
  c.beta1 = 1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("FiniteDiff.QuadraticIsExact") {
  Rng rng(10);
  Parameter p("p", random_matrix(10, 12, rng));
  p.grad = 2.0 * p.value;
  Parameter* ps[] = {&p};
  const auto rep = finite_diff_check([&] { return p.value.squaredNorm(); }, ps, GradCheckOptions{});
  CHECK_EQ(rep.coordinates_checked, 100);
  CHECK_LT(rep.max_rel_error, 1e-8);
}

TEST_CASE("FiniteDiff.DetectsWrongGradient") {
  Parameter p("p", Matrix::Constant(1, 3, 1.0));
  p.grad.setConstant(1.0);  // true gradient is 2
  Parameter* ps[] = {&p};
  const auto rep = finite_diff_check([&] { return p.value.squaredNorm(); }, ps,
                                     GradCheckOptions{.samples = 3});
  CHECK_FALSE(rep.passed);
  CHECK_EQ(rep.worst_parameter, "p");
}

TEST_CASE("Init.GlorotBoundsAndDeterminism") {
  Rng r1(11);
  Rng r2(11);
  const Matrix a = glorot_uniform(128, 64, r1);
  const Matrix b = glorot_uniform(128, 64, r2);
  CHECK_EQ(a, b);
  const double bound = std::sqrt(6.0 / 192.0);
  CHECK_LE(a.cwiseAbs().maxCoeff(), bound);
}

}  // namespace
}  // namespace gnolr::tensor
