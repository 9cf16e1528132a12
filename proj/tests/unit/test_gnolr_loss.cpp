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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gnolr/errors.hpp"
#include "gnolr/gnolr_loss.hpp"

namespace gnolr::loss {
namespace {

// Reference sigmoid written independently of the library.
double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

GnolrHyper hyper(std::vector<double> a, double gamma) {
  GnolrHyper h;
  h.thresholds = ThresholdSet(std::move(a));
  h.gamma = gamma;
  return h;
}

std::vector<double> random_kernels(int T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> k(static_cast<std::size_t>(T));
  for (auto& x : k) x = u(rng);
  return k;
}

TEST_CASE("CumulativeProb.Examples") {
  const auto h = hyper({0.0}, 1.0);
  CHECK_EQ(cumulative_prob(1, 0.0, h), 0.5);
  CHECK_EQ(cumulative_prob(0, 0.3, h), 0.0);
  CHECK_EQ(cumulative_prob(2, 0.3, h), 1.0);
  CHECK_THROWS_AS(cumulative_prob(3, 0.0, h), ArgumentError);
  const auto ali = hyper({3.2343}, 7.0);
  CHECK_NEAR(cumulative_prob(1, 1.0, ali), sig(-3.7657), 1e-15);
}

TEST_CASE("CategoryDistribution.Examples") {
  const double k2[] = {0.0, 0.0};
  const auto d = category_distribution(k2, hyper({0.0, 1.0}, 1.0));
  REQUIRE_EQ(d.probs.size(), 3u);
  CHECK_NEAR(d.probs[0], 0.5, 1e-12);
  CHECK_NEAR(d.probs[1], 0.23106, 5e-6);
  CHECK_NEAR(d.probs[2], 0.26894, 5e-6);
  const double k1[] = {0.0};
  const auto e = category_distribution(k1, hyper({0.0}, 1.0));
  CHECK_EQ(e.probs, (std::vector<double>{0.5, 0.5}));
}

TEST_CASE("CategoryDistribution.SimplexProperty") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> gap(0.01, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 1 + trial % 4;
    std::vector<double> a{-2.0 + gap(rng)};
    for (int c = 1; c < T; ++c) a.push_back(a.back() + gap(rng));
    const auto h = hyper(a, gap(rng) * 3.0);
    const auto d = category_distribution(random_kernels(T, rng), h);
    CHECK_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
  }
}

TEST_CASE("SubtaskLoss.Examples") {
  const double k0[] = {0.0};
  CHECK_NEAR(subtask_loss(1, OrdinalLabel{2}, k0, hyper({0.0}, 1.0)), std::log(2.0), 1e-12);
  CHECK_THROWS_AS(subtask_loss(2, OrdinalLabel{2}, k0, hyper({0.0}, 1.0)), ArgumentError);
}

TEST_CASE("SubtaskLoss.ClipFloorWhenProbabilityVanishes") {
  // a_1 > a_2 - 2 gamma K_2 makes P(k = 2) negative before clipping
  const double k[] = {-1.0, 1.0};
  const auto h = hyper({0.0, 0.5}, 5.0);
  CHECK_LT(sig(0.5 - 10.0) - sig(0.0 + 5.0), 0.0);
  CHECK_NEAR(subtask_loss(2, OrdinalLabel{2}, k, h), -std::log(1e-6), 1e-9);
  CHECK_NEAR(-std::log(1e-6), 13.8155, 5e-5);
  const auto g = subtask_loss_grad(2, OrdinalLabel{2}, k, h);
  for (double d : g.d_kernels) CHECK_EQ(d, 0.0);
}

TEST_CASE("SubtaskLoss.MiddleCategoryExpansion") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = random_kernels(2, rng);
    const auto h = hyper({0.8, 2.5}, 1.5);
    const double p_ctr = 1.0 - sig(0.8 - 1.5 * k[0]);
    const double p_ctcvr = 1.0 - sig(2.5 - 2.0 * 1.5 * k[1]);
    if (p_ctr - p_ctcvr <= 1e-6) continue;
    CHECK_NEAR(subtask_loss(2, OrdinalLabel{2}, k, h), -std::log(p_ctr - p_ctcvr), 1e-9);
  }
}

// Closed form for two feedback types written in terms of click/pay bits.
double two_task_closed_form(int y_click, int y_pay, double p_ctr, double p_ctcvr) {
  const double term1 = -y_click * std::log(p_ctr) - (1 - y_click) * std::log(1.0 - p_ctr);
  const double term2 = -y_pay * std::log(p_ctcvr) - y_click * (1 - y_pay) * std::log(p_ctr - p_ctcvr) -
                       (1 - y_click) * std::log(1.0 - p_ctr);
  return term1 + term2;
}

TEST_CASE("GnolrTotalLoss.TwoTaskClosedForm") {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto k = random_kernels(2, rng);
    const auto h = hyper({1.0, 3.0}, 2.0);
    const double p_ctr = 1.0 - sig(1.0 - 2.0 * k[0]);
    const double p_ctcvr = 1.0 - sig(3.0 - 4.0 * k[1]);
    if (p_ctr - p_ctcvr <= 1e-6) continue;
    ++checked;
    // k = 1 <-> (0,0), k = 2 <-> (1,0), k = 3 <-> (1,1)
    CHECK_NEAR(gnolr_total_loss(OrdinalLabel{1}, k, h), two_task_closed_form(0, 0, p_ctr, p_ctcvr), 1e-9);
    CHECK_NEAR(gnolr_total_loss(OrdinalLabel{1}, k, h), -2.0 * std::log(1.0 - p_ctr), 1e-9);
    CHECK_NEAR(gnolr_total_loss(OrdinalLabel{2}, k, h), two_task_closed_form(1, 0, p_ctr, p_ctcvr), 1e-9);
    CHECK_NEAR(gnolr_total_loss(OrdinalLabel{3}, k, h), two_task_closed_form(1, 1, p_ctr, p_ctcvr), 1e-9);
    CHECK_NEAR(gnolr_total_loss(OrdinalLabel{3}, k, h), -std::log(p_ctr) - std::log(p_ctcvr), 1e-9);
  }
  CHECK_GT(checked, 100);
}

TEST_CASE("GnolrTotalLoss.SingleFeedbackIsCrossEntropy") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> g(0.1, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a1 = u(rng);
    const double gamma = g(rng);
    const auto k = random_kernels(1, rng);
    const auto h = hyper({a1}, gamma);
    for (int label : {1, 2}) {
      const double logit = gamma * k[0] - a1;
      const double ce = label == 2 ? -std::log(sig(logit)) : -std::log(1.0 - sig(logit));
      CHECK_NEAR(gnolr_total_loss(OrdinalLabel{label}, k, h), ce, 1e-9);
      CHECK_NEAR(gnolr_total_loss(OrdinalLabel{label}, k, h), bce_loss(logit, label - 1), 1e-9);
    }
  }
}

TEST_CASE("GnolrTotalLoss.GradientMatchesFiniteDifferences") {
  std::mt19937_64 rng(5);
  const double step = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int T = 1 + trial % 3;
    std::vector<double> a;
    for (int c = 0; c < T; ++c) a.push_back(-0.5 + 1.2 * c);
    const auto h = hyper(a, 1.7);
    const auto k = random_kernels(T, rng);
    const OrdinalLabel label{1 + trial % (T + 1)};
    const auto g = gnolr_total_loss_grad(label, k, h);
    const auto d = category_distribution(k, h);
    if (*std::min_element(d.probs.begin(), d.probs.end()) < 1e-4) continue;
    for (int j = 0; j < T; ++j) {
      auto up = k;
      auto down = k;
      up[static_cast<std::size_t>(j)] += step;
      down[static_cast<std::size_t>(j)] -= step;
      const double num = (gnolr_total_loss(label, up, h) - gnolr_total_loss(label, down, h)) / (2 * step);
      const double ana = g.d_kernels[static_cast<std::size_t>(j)];
      CHECK_LT(std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}), 1e-4);
      ++checked;
    }
  }
  CHECK_GT(checked, 200);
}

TEST_CASE("GnolrTotalLoss.TopCategoryRewardsEverySubKernel") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = hyper({0.2, 1.4, 2.9}, 2.0);
    const auto g = gnolr_total_loss_grad(OrdinalLabel{4}, random_kernels(3, rng), h);
    for (double d : g.d_kernels) CHECK_LT(d, 0.0);
  }
}

TEST_CASE("TaskScore.ExamplesAndMonotonicity") {
  const double k0[] = {0.0};
  CHECK_EQ(task_score(1, k0, hyper({0.0}, 1.0)), 0.5);
  const double hi[] = {1.0};
  const double lo[] = {-1.0};
  const auto ali = hyper({3.2343}, 7.0);
  CHECK_GT(task_score(1, hi, ali), task_score(1, lo, ali));
  CHECK_NEAR(task_score(1, hi, ali), 1.0 - sig(-3.7657), 1e-15);
  CHECK_THROWS_AS(task_score(0, hi, ali), ArgumentError);
  CHECK_THROWS_AS(task_score(2, hi, ali), ArgumentError);
}

TEST_CASE("TaskScore.RankingInvariantUnderIncreasingTransform") {
  std::mt19937_64 rng(7);
  const auto h = hyper({0.5, 2.0}, 3.0);
  std::vector<double> s;
  for (int i = 0; i < 200; ++i) s.push_back(task_score(2, random_kernels(2, rng), h));
  std::vector<double> t(s.size());
  std::transform(s.begin(), s.end(), t.begin(), [](double x) { return std::log(x) * 3.0 + 1.0; });
  std::vector<std::size_t> ia(s.size());
  std::vector<std::size_t> ib(s.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::stable_sort(ia.begin(), ia.end(), [&](auto x, auto y) { return s[x] < s[y]; });
  std::stable_sort(ib.begin(), ib.end(), [&](auto x, auto y) { return t[x] < t[y]; });
  CHECK_EQ(ia, ib);
}

TEST_CASE("ListNet.Examples") {
  const auto h = hyper({0.0}, 1.0);
  for (int n : {1, 2, 7, 50}) {
    ItemList list(static_cast<std::size_t>(n), ListItem{0.3, false});
    list[0].positive = true;
    const ItemList lists[] = {list};
    CHECK_NEAR(listnet_loss(lists, h), std::log(static_cast<double>(n)), 1e-12);
  }
  const double logits[] = {1.0, 0.0};
  const std::uint8_t pos[] = {1, 0};
  CHECK_NEAR(listnet_from_logits(logits, pos).loss, -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0)), 1e-12);
  CHECK_NEAR(listnet_from_logits(logits, pos).loss, 0.31326, 5e-6);
  const double far[] = {800.0, 0.0, -3.0};
  const std::uint8_t first[] = {1, 0, 0};
  CHECK_NEAR(listnet_from_logits(far, first).loss, 0.0, 1e-300);
  const std::uint8_t none[] = {0, 0, 0};
  CHECK_EQ(listnet_from_logits(far, none).loss, 0.0);
}

TEST_CASE("ListNet.MeanOverListsAndGradient") {
  const auto h = hyper({0.0}, 2.0);
  const ItemList a = {{0.5, true}, {0.1, false}};
  const ItemList b = {{0.0, false}, {0.0, false}};
  const ItemList both[] = {a, b};
  const ItemList only_a[] = {a};
  CHECK_NEAR(listnet_loss(both, h), 0.5 * listnet_loss(only_a, h), 1e-15);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (bool logged : {true, false}) {
    std::vector<double> z(6);
    for (auto& x : z) x = u(rng);
    const std::uint8_t pos[] = {1, 0, 1, 0, 0, 0};
    const auto r = listnet_from_logits(z, pos, logged);
    for (std::size_t j = 0; j < z.size(); ++j) {
      auto up = z;
      auto down = z;
      up[j] += 1e-6;
      down[j] -= 1e-6;
      const double num = (listnet_from_logits(up, pos, logged).loss -
                          listnet_from_logits(down, pos, logged).loss) / 2e-6;
      CHECK_NEAR(num, r.d_logits[j], 1e-6);
    }
  }
}

TEST_CASE("CombinedLoss.IsUnweightedSum") {
  CHECK_EQ(combined_loss(1.25, 0.0), 1.25);
  CHECK_EQ(combined_loss(0.0, 0.75), 0.75);
  CHECK_EQ(combined_loss(0.5, 0.5), 1.0);
}

TEST_CASE("BceLoss.Examples") {
  CHECK_NEAR(bce_loss(0.0, 1), 0.693147, 5e-7);
  CHECK_NEAR(bce_loss(0.0, 1, 10.0), 6.93147, 5e-6);
  CHECK_NEAR(bce_loss(0.0, 0, 10.0), 0.693147, 5e-7);
  CHECK_GE(bce_loss(100.0, 1), 0.0);
  CHECK_LT(bce_loss(100.0, 1), 1e-40);
  CHECK_NEAR(bce_loss(-800.0, 1), 800.0, 1e-9);
  CHECK_THROWS_AS(bce_loss(0.0, 1, 0.5), ArgumentError);
  const auto g = bce_loss_grad(0.3, 1, 2.0);
  CHECK_NEAR(g.d_input, -2.0 * (1.0 - sig(0.3)), 1e-15);
}

TEST_CASE("NeuralOlr.Examples") {
  const auto h2 = hyper({0.0, 1.0}, 1.0);
  CHECK_NEAR(neural_olr_loss(OrdinalLabel{2}, 0.0, h2), -std::log(sig(1.0) - 0.5), 1e-12);
  CHECK_NEAR(neural_olr_loss(OrdinalLabel{2}, 0.0, h2), 1.46508, 5e-6);
  CHECK_NEAR(neural_olr_loss(OrdinalLabel{1}, 0.4, h2), -std::log(sig(0.0 - 0.4)), 1e-12);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = random_kernels(1, rng);
    const auto h1 = hyper({0.7}, 2.0);
    for (int label : {1, 2}) {
      CHECK_NEAR(neural_olr_loss(OrdinalLabel{label}, k[0], h1),
                  gnolr_total_loss(OrdinalLabel{label}, k, h1), 1e-12);
    }
  }
}

TEST_CASE("GnolrHyper.Validates") {
  auto h = hyper({0.0}, 1.0);
  h.gamma = 0.0;
  CHECK_THROWS(h.validate());
  h = hyper({0.0}, 1.0);
  h.clip_floor = 0.0;
  CHECK_THROWS(h.validate());
}

}  // namespace
}  // namespace gnolr::loss
