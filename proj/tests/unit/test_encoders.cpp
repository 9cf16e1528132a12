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

#include "gnolr/encoders.hpp"
#include "gnolr/errors.hpp"

namespace gnolr::encoders {
namespace {

IdMatrix random_ids(Eigen::Index rows, std::span<const std::int64_t> vocab, Rng& rng) {
  IdMatrix ids(rows, static_cast<Eigen::Index>(vocab.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < vocab.size(); ++f) {
      std::uniform_int_distribution<std::int32_t> d(0, static_cast<std::int32_t>(vocab[f] - 1));
      ids(r, static_cast<Eigen::Index>(f)) = d(rng);
    }
  }
  return ids;
}

std::vector<double> random_unit(int n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = g(rng);
  return tensor::l2_normalize(v).unit;
}

TEST_CASE("EmbedFeatures.ConcatenatesInFeatureOrder") {
  Rng rng(1);
  const std::int64_t vocab[] = {4, 3};
  EmbeddingTableSet set(vocab, vocab, 16, rng);
  auto& t = set.tables(Side::kUser);
  t[0].value.row(2).setConstant(0.1);
  t[1].value.row(1).setConstant(-0.2);
  const std::int32_t ids[] = {2, 1};
  const auto v = embed_features(ids, t);
  REQUIRE_EQ(v.size(), 32u);
  CHECK_EQ(v[0], 0.1);
  CHECK_EQ(v[15], 0.1);
  CHECK_EQ(v[16], -0.2);
  const std::int32_t oov[] = {kOovRow, kOovRow};
  const auto o = embed_features(oov, t);
  for (int d = 0; d < 16; ++d) CHECK_EQ(o[static_cast<std::size_t>(d)], t[0].value(0, d));
}

TEST_CASE("EmbedFeatures.UnknownIdUsesOovRow") {
  Rng rng(2);
  const std::int64_t vocab[] = {4};
  EmbeddingTableSet set(vocab, vocab, 8, rng);
  const std::int32_t unknown[] = {4};
  const std::int32_t oov[] = {kOovRow};
  CHECK_EQ(embed_features(unknown, set.tables(Side::kItem)),
            embed_features(oov, set.tables(Side::kItem)));
  const std::int32_t two[] = {1, 2};
  CHECK_THROWS_AS(embed_features(two, set.tables(Side::kItem)), DimensionError);
}

TEST_CASE("Tower.ZeroWeightsGiveFlaggedZeroVector") {
  Rng rng(3);
  TowerConfig cfg;
  cfg.hidden_sizes = {4};
  Tower tower("u0", 3, cfg, rng);
  for (auto* p : tower.parameters()) p->value.setZero();
  const double x[] = {1.0, 2.0, 3.0};
  const auto out = tower_forward(x, tower);
  CHECK(out.degenerate);
  for (double v : out.unit) CHECK_EQ(v, 0.0);
}

TEST_CASE("Tower.IdentityLayerNormalizesInput") {
  Rng rng(4);
  TowerConfig cfg;
  cfg.hidden_sizes = {2};
  Tower tower("u0", 2, cfg, rng);
  auto ps = tower.parameters();
  ps[0]->value = Matrix::Identity(2, 2);
  ps[1]->value.setZero();
  const double x[] = {3.0, 4.0};
  const auto out = tower_forward(x, tower);
  CHECK_FALSE(out.degenerate);
  CHECK_DOUBLE_EQ(out.unit[0], 0.6);
  CHECK_DOUBLE_EQ(out.unit[1], 0.8);
}

TEST_CASE("Tower.ShapeMismatchThrows") {
  Rng rng(5);
  Tower tower("u0", 3, TowerConfig{}, rng);
  CHECK_THROWS_AS(tower.forward(Matrix::Zero(2, 4)), DimensionError);
}

TEST_CASE("TwinTowerStack.DefaultShapesAndDeterminism") {
  const std::int64_t uv[] = {10, 5};
  const std::int64_t iv[] = {20};
  Rng r1(6);
  Rng r2(6);
  TwinTowerStack a(2, uv, iv, kDefaultEmbeddingDim, TowerConfig{}, r1);
  TwinTowerStack b(2, uv, iv, kDefaultEmbeddingDim, TowerConfig{}, r2);
  CHECK_EQ(a.output_dim(), 32);
  Rng ids_rng(7);
  const IdMatrix u = random_ids(8, uv, ids_rng);
  const IdMatrix i = random_ids(8, iv, ids_rng);
  const std::int32_t* urow = u.row(0).data();
  const std::int32_t* irow = i.row(0).data();
  const auto pair = nested_forward(std::span<const std::int32_t>(urow, 2),
                                   std::span<const std::int32_t>(irow, 1), a);
  CHECK_EQ(pair.user.prefix(2).size(), 64u);
  CHECK_EQ(a.forward(u, i), a.forward(u, i));
  CHECK_EQ(a.forward(u, i), b.forward(u, i));
}

TEST_CASE("NestedKernel.Examples") {
  Rng rng(8);
  NestedEmbedding e;
  for (int j = 0; j < 3; ++j) e.subs.push_back(random_unit(5, rng));
  CHECK_NEAR(nested_kernel(e, e, 3), 1.0, 1e-12);
  NestedEmbedding f;
  for (int j = 0; j < 3; ++j) f.subs.push_back(random_unit(5, rng));
  CHECK_NEAR(nested_kernel(e, f, 1), tensor::cosine_kernel(e.subs[0], f.subs[0]), 1e-12);
  CHECK_THROWS_AS(nested_kernel(e, f, 0), ArgumentError);
  CHECK_THROWS_AS(nested_kernel(e, f, 4), ArgumentError);
}

TEST_CASE("NestedKernel.PrefixSumIdentity") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    NestedEmbedding u;
    NestedEmbedding v;
    for (int j = 0; j < 4; ++j) {
      u.subs.push_back(random_unit(6, rng));
      v.subs.push_back(random_unit(6, rng));
    }
    double running = 0.0;
    for (int c = 1; c <= 4; ++c) {
      running += tensor::cosine_kernel(u.subs[static_cast<std::size_t>(c - 1)],
                                       v.subs[static_cast<std::size_t>(c - 1)]);
      CHECK_NEAR(c * nested_kernel(u, v, c), running, 1e-12);
      // the mean of sub-cosines is the cosine of the concatenated prefixes
      CHECK_NEAR(nested_kernel(u, v, c), tensor::cosine_kernel(u.prefix(c), v.prefix(c)), 1e-12);
    }
  }
}

TEST_CASE("NestedKernel.CosineGradsAreAdjointOfPrefixMeans") {
  const double cos[] = {0.3, -0.5, 0.9};
  const double dk[] = {1.0, 2.0, 3.0};
  const auto k = nested_kernels_from_cosines(cos);
  CHECK_NEAR(k[1], -0.1, 1e-15);
  const auto g = cosine_grads_from_nested(dk);
  // <dk, K(cos)> is linear in cos with gradient g
  double lhs = 0.0;
  double rhs = 0.0;
  for (int j = 0; j < 3; ++j) {
    lhs += dk[j] * k[static_cast<std::size_t>(j)];
    rhs += g[static_cast<std::size_t>(j)] * cos[j];
  }
  CHECK_NEAR(lhs, rhs, 1e-14);
  CHECK_NEAR(g[0], 1.0 + 1.0 + 1.0, 1e-15);
  CHECK_NEAR(g[2], 1.0, 1e-15);
}

TEST_CASE("TwinTowerStack.GradientMatchesFiniteDifferences") {
  const std::int64_t uv[] = {10, 10};
  const std::int64_t iv[] = {10, 10};
  Rng rng(10);
  TowerConfig cfg;
  cfg.hidden_sizes = {8, 4};
  TwinTowerStack stack(2, uv, iv, 4, cfg, rng);
  const IdMatrix u = random_ids(6, uv, rng);
  const IdMatrix i = random_ids(6, iv, rng);
  const Matrix w = tensor::uniform(6, 2, -1.0, 1.0, rng);
  TwinTowerStack::Cache cache;
  stack.forward(u, i, &cache);
  for (auto* p : stack.parameters()) p->zero_grad();
  stack.backward(cache, w);
  auto params = stack.parameters();
  tensor::GradCheckOptions opts;
  opts.samples = 200;
  const auto rep = tensor::finite_diff_check(
      [&] { return (stack.forward(u, i).array() * w.array()).sum(); }, params, opts);
  {
    INFO(rep.max_rel_error, " at ", rep.worst_parameter);
    CHECK(rep.passed);
  }
}

TEST_CASE("TwinTowerStack.ForeignTowersGetZeroGradient") {
  const std::int64_t uv[] = {6};
  const std::int64_t iv[] = {6};
  Rng rng(11);
  TwinTowerStack stack(3, uv, iv, 4, TowerConfig{{8, 4}, 0.01}, rng);
  const IdMatrix u = random_ids(5, uv, rng);
  const IdMatrix i = random_ids(5, iv, rng);
  TwinTowerStack::Cache cache;
  stack.forward(u, i, &cache);
  for (auto* p : stack.parameters()) p->zero_grad();
  Matrix d = Matrix::Zero(5, 3);
  d.col(1).setConstant(1.0);  // only sub-kernel 2 receives signal
  stack.backward(cache, d);
  bool table_touched = false;
  for (auto* p : stack.parameters()) {
    if (p->name.rfind("emb.", 0) == 0) {
      table_touched = table_touched || p->grad.cwiseAbs().sum() > 0.0;
    }
  }
  CHECK(table_touched);
  const auto names_for = [&](int pair) {
    std::vector<const Parameter*> out;
    const std::string u = "tower.user." + std::to_string(pair) + ".";
    const std::string i = "tower.item." + std::to_string(pair) + ".";
    for (const auto* p : stack.parameters()) {
      if (p->name.rfind(u, 0) == 0 || p->name.rfind(i, 0) == 0) out.push_back(p);
    }
    return out;
  };
  for (int pair : {0, 2}) {
    const auto ps = names_for(pair);
    REQUIRE_FALSE(ps.empty());
    for (const auto* p : ps) {
      INFO(p->name);
      CHECK_EQ(p->grad.cwiseAbs().sum(), 0.0);
    }
  }
  for (const auto* p : names_for(1)) {
    if (p->name.ends_with(".w")) {
      {
        INFO(p->name);
        CHECK_GT(p->grad.cwiseAbs().sum(), 0.0);
      }
    }
  }
}

TEST_CASE("ParallelFor.CoversRangeOnce") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) ++hits[k];
  });
  for (int h : hits) CHECK_EQ(h, 1);
}

}  // namespace
}  // namespace gnolr::encoders
