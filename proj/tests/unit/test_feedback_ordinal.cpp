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
#include "gnolr/feedback_ordinal.hpp"

namespace gnolr::ordinal {
namespace {

double logit_of_fraction(double p) { return std::log((1.0 - p) / p); }

TEST_CASE("OrderFeedback.DenserFeedbackFirst") {
  const std::int64_t counts[] = {2620000, 13100};
  CHECK_EQ(order_feedback(counts), (std::vector<std::size_t>{0, 1}));
}

TEST_CASE("OrderFeedback.TiesKeepDeclarationOrder") {
  const std::int64_t counts[] = {5, 5};
  CHECK_EQ(order_feedback(counts), (std::vector<std::size_t>{0, 1}));
}

TEST_CASE("OrderFeedback.SortsDescending") {
  const std::int64_t counts[] = {1, 100, 10};
  CHECK_EQ(order_feedback(counts), (std::vector<std::size_t>{1, 2, 0}));
}

TEST_CASE("OrderFeedback.RejectsEmptyAndNegative") {
  CHECK_THROWS_AS(order_feedback(std::span<const std::int64_t>{}), SchemaError);
  const std::int64_t neg[] = {3, -1};
  CHECK_THROWS_AS(order_feedback(neg), SchemaError);
}

TEST_CASE("MakeSchema.OrderedNamesFollowCounts") {
  const FeedbackSchema s = make_schema({"pay", "click"}, {13, 2000});
  CHECK_EQ(s.ordered_names(), (std::vector<std::string>{"click", "pay"}));
  const std::uint8_t raw[] = {1, 0};  // pay=1, click=0
  CHECK_EQ(to_sparsity_order(raw, s.order), (std::vector<std::uint8_t>{0, 1}));
}

TEST_CASE("MapToOrdinal.Examples") {
  const std::uint8_t none[] = {0, 0, 0};
  const std::uint8_t deep[] = {1, 0, 1};
  const std::uint8_t both[] = {1, 1};
  CHECK_EQ(map_to_ordinal(none, 3).k, 1);
  CHECK_EQ(map_to_ordinal(deep, 3).k, 4);
  CHECK_EQ(map_to_ordinal(both, 2).k, 3);
}

TEST_CASE("MapToOrdinal.MonotoneInEveryBit") {
  for (int T = 1; T <= 5; ++T) {
    for (int mask = 0; mask < (1 << T); ++mask) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t) bits[static_cast<std::size_t>(t)] = (mask >> t) & 1;
      const int k = map_to_ordinal(bits, T).k;
      for (int t = 0; t < T; ++t) {
        if (bits[static_cast<std::size_t>(t)]) continue;
        auto up = bits;
        up[static_cast<std::size_t>(t)] = 1;
        CHECK_GE(map_to_ordinal(up, T).k, k);
      }
    }
  }
}

TEST_CASE("RemapForSubtask.Examples") {
  CHECK_EQ(remap_for_subtask({4}, 1, 3).k, 2);
  CHECK_EQ(remap_for_subtask({1}, 3, 3).k, 1);
  CHECK_EQ(remap_for_subtask({3}, 2, 3).k, 3);
  CHECK_THROWS_AS(remap_for_subtask({2}, 0, 3), ArgumentError);
  CHECK_THROWS_AS(remap_for_subtask({2}, 4, 3), ArgumentError);
}

TEST_CASE("RemapForSubtask.TopSubtaskIsIdentityAndCompositionTakesMin") {
  for (int T = 1; T <= 5; ++T) {
    for (int k = 1; k <= T + 1; ++k) {
      CHECK_EQ(remap_for_subtask({k}, T, T).k, k);
      for (int t = 1; t <= T; ++t) {
        for (int u = 1; u <= T; ++u) {
          CHECK_EQ(remap_for_subtask(remap_for_subtask({k}, t, T), u, T).k,
                    remap_for_subtask({k}, std::min(t, u), T).k);
        }
      }
    }
  }
}

TEST_CASE("Thresholds.HalfGivesZero") {
  const std::vector<OrdinalLabel> labels{{1}, {2}, {1}, {2}};
  CHECK_NEAR(estimate_thresholds(labels, 1).threshold(1), 0.0, 1e-15);
}

TEST_CASE("Thresholds.AliCcpCounts") {
  const std::int64_t total = 69100000;
  const std::int64_t above[] = {2620000, 13100};
  const ThresholdSet a = thresholds_from_counts(total, above);
  CHECK_NEAR(a.threshold(1), logit_of_fraction(2620000.0 / 69100000.0), 1e-12);
  CHECK_NEAR(a.threshold(2), logit_of_fraction(13100.0 / 69100000.0), 1e-12);
  CHECK_NEAR(a.threshold(1), 3.2343, 0.01);
  CHECK_NEAR(a.threshold(2), 8.5681, 0.01);
}

TEST_CASE("Thresholds.EmptySideNamesTheCategory") {
  const std::vector<OrdinalLabel> labels{{1}, {2}, {2}};  // nothing above 2
  try {
    estimate_thresholds(labels, 2);
    FAIL("expected ThresholdError");
  } catch (const ThresholdError& e) {
    CHECK_EQ(e.category(), 2);
    CHECK_NE(std::string(e.what()).find('2'), std::string::npos);
  }
}

TEST_CASE("Thresholds.SigmoidRecoversFractionsAndIncreases") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 4);
    std::vector<OrdinalLabel> labels;
    std::vector<std::int64_t> per_k(static_cast<std::size_t>(T) + 1);
    for (auto& n : per_k) n = 1 + static_cast<std::int64_t>(rng() % 50);
    for (int k = 1; k <= T + 1; ++k) {
      for (std::int64_t i = 0; i < per_k[static_cast<std::size_t>(k - 1)]; ++i) labels.push_back({k});
    }
    const ThresholdSet a = estimate_thresholds(labels, T);
    for (int c = 1; c <= T; ++c) {
      std::int64_t above = 0;
      for (int k = c + 1; k <= T + 1; ++k) above += per_k[static_cast<std::size_t>(k - 1)];
      const double p = static_cast<double>(above) / static_cast<double>(labels.size());
      CHECK_NEAR(1.0 / (1.0 + std::exp(a.threshold(c))), p, 1e-12);
      if (c > 1) {
        CHECK_LT(a.threshold(c - 1), a.threshold(c));
      }
    }
  }
}

TEST_CASE("ThresholdSet.RejectsNonIncreasing") {
  CHECK_THROWS_AS(ThresholdSet({1.0, 1.0}), ThresholdError);
  CHECK_THROWS_AS(ThresholdSet({0.0, std::nan("")}), ThresholdError);
}

}  // namespace
}  // namespace gnolr::ordinal
