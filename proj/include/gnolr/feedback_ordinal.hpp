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

// Maps multi-feedback implicit labels onto ordinal categories.
//
// Feedback types are ordered from densest to sparsest; a sample's category is
// one plus the sparsity rank of the deepest positive feedback it carries, so
// category 1 is "impression only" and category T+1 the deepest engagement.
// Category 0 is a virtual null level and is never stored.

#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gnolr::ordinal {

struct OrdinalLabel {
  int k = 1;
  friend auto operator<=>(const OrdinalLabel&, const OrdinalLabel&) = default;
};

struct FeedbackSchema {
  std::vector<std::string> names;         // original declaration order
  std::vector<std::int64_t> positive_counts;
  // order[rank] = original index of the feedback at sparsity rank `rank`
  // (rank 0 is the densest).
  std::vector<std::size_t> order;

  int num_feedback() const { return static_cast<int>(names.size()); }
  // Names in sparsity order.
  std::vector<std::string> ordered_names() const;
};

// Strictly increasing ordinal thresholds a_1 < ... < a_T.
class ThresholdSet {
 public:
  ThresholdSet() = default;
  explicit ThresholdSet(std::vector<double> a);

  int size() const { return static_cast<int>(a_.size()); }
  // 1-based.
  double threshold(int c) const;
  std::span<const double> values() const { return a_; }

 private:
  std::vector<double> a_;
};

// Permutation listing original indices from the densest to the sparsest
// feedback; equal counts keep their original relative order.
std::vector<std::size_t> order_feedback(std::span<const std::int64_t> positive_counts);

FeedbackSchema make_schema(std::vector<std::string> names,
                           std::vector<std::int64_t> positive_counts);

// Rearranges raw feedback bits (declaration order) into sparsity order.
std::vector<std::uint8_t> to_sparsity_order(std::span<const std::uint8_t> raw_bits,
                                            std::span<const std::size_t> order);

// bits must already be in sparsity order and have length T.
OrdinalLabel map_to_ordinal(std::span<const std::uint8_t> bits, int T);

// Collapses every category above t+1 into t+1 for subtask t (1 <= t <= T).
OrdinalLabel remap_for_subtask(OrdinalLabel k, int t, int T);

// a_c = ln((1 - p_c) / p_c), p_c = count_above[c-1] / total, where
// count_above[c-1] is the number of samples with category strictly above c.
ThresholdSet thresholds_from_counts(std::int64_t total,
                                    std::span<const std::int64_t> count_above);

ThresholdSet estimate_thresholds(std::span<const OrdinalLabel> labels, int T);

}  // namespace gnolr::ordinal
