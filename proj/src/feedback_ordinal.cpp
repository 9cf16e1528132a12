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

#include "gnolr/feedback_ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gnolr/errors.hpp"

namespace gnolr::ordinal {

std::vector<std::string> FeedbackSchema::ordered_names() const {
  std::vector<std::string> out;
  out.reserve(order.size());
  for (std::size_t idx : order) out.push_back(names.at(idx));
  return out;
}

ThresholdSet::ThresholdSet(std::vector<double> a) : a_(std::move(a)) {
  for (std::size_t c = 0; c < a_.size(); ++c) {
    if (!std::isfinite(a_[c])) {
      throw ThresholdError(static_cast<int>(c) + 1,
                           "threshold a_" + std::to_string(c + 1) + " is not finite");
    }
    if (c > 0 && !(a_[c - 1] < a_[c])) {
      throw ThresholdError(static_cast<int>(c) + 1,
                           "thresholds must be strictly increasing at a_" +
                               std::to_string(c + 1));
    }
  }
}

double ThresholdSet::threshold(int c) const {
  if (c < 1 || c > size()) {
    throw ArgumentError("threshold index " + std::to_string(c) + " outside 1.." +
                        std::to_string(size()));
  }
  return a_[static_cast<std::size_t>(c - 1)];
}

std::vector<std::size_t> order_feedback(std::span<const std::int64_t> positive_counts) {
  if (positive_counts.empty()) throw SchemaError("feedback schema has no feedback types");
  for (std::int64_t c : positive_counts) {
    if (c < 0) throw SchemaError("negative positive count in feedback schema");
  }
  std::vector<std::size_t> order(positive_counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return positive_counts[a] > positive_counts[b];
  });
  return order;
}

FeedbackSchema make_schema(std::vector<std::string> names,
                           std::vector<std::int64_t> positive_counts) {
  if (names.size() != positive_counts.size()) {
    throw SchemaError("feedback names and counts differ in length");
  }
  FeedbackSchema schema;
  schema.order = order_feedback(positive_counts);
  schema.names = std::move(names);
  schema.positive_counts = std::move(positive_counts);
  return schema;
}

std::vector<std::uint8_t> to_sparsity_order(std::span<const std::uint8_t> raw_bits,
                                            std::span<const std::size_t> order) {
  if (raw_bits.size() != order.size()) {
    throw ArgumentError("feedback bit count does not match schema");
  }
  std::vector<std::uint8_t> out(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) out[r] = raw_bits[order[r]];
  return out;
}

OrdinalLabel map_to_ordinal(std::span<const std::uint8_t> bits, int T) {
  if (T < 1 || bits.size() != static_cast<std::size_t>(T)) {
    throw ArgumentError("expected " + std::to_string(T) + " feedback bits, got " +
                        std::to_string(bits.size()));
  }
  int k = 1;
  for (int t = 0; t < T; ++t) {
    if (bits[static_cast<std::size_t>(t)] != 0) k = t + 2;
  }
  return OrdinalLabel{k};
}

OrdinalLabel remap_for_subtask(OrdinalLabel k, int t, int T) {
  if (t < 1 || t > T) {
    throw ArgumentError("subtask " + std::to_string(t) + " outside 1.." + std::to_string(T));
  }
  if (k.k < 1 || k.k > T + 1) {
    throw ArgumentError("category " + std::to_string(k.k) + " outside 1.." +
                        std::to_string(T + 1));
  }
  return OrdinalLabel{std::min(k.k, t + 1)};
}

ThresholdSet thresholds_from_counts(std::int64_t total,
                                    std::span<const std::int64_t> count_above) {
  std::vector<double> a;
  a.reserve(count_above.size());
  for (std::size_t i = 0; i < count_above.size(); ++i) {
    const int c = static_cast<int>(i) + 1;
    const std::int64_t above = count_above[i];
    if (above <= 0 || above >= total) {
      throw ThresholdError(c, "cannot estimate threshold for category " + std::to_string(c) +
                                  ": " + (above <= 0 ? "no samples above it"
                                                     : "no samples at or below it"));
    }
    const double p = static_cast<double>(above) / static_cast<double>(total);
    a.push_back(std::log((1.0 - p) / p));
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (!(a[i - 1] < a[i])) {
      throw ThresholdError(static_cast<int>(i) + 1,
                           "category " + std::to_string(i + 1) +
                               " has no samples; thresholds would not be increasing");
    }
  }
  return ThresholdSet(std::move(a));
}

ThresholdSet estimate_thresholds(std::span<const OrdinalLabel> labels, int T) {
  if (T < 1) throw ArgumentError("T must be at least 1");
  std::vector<std::int64_t> above(static_cast<std::size_t>(T), 0);
  for (const OrdinalLabel& l : labels) {
    if (l.k < 1 || l.k > T + 1) {
      throw ArgumentError("category " + std::to_string(l.k) + " outside 1.." +
                          std::to_string(T + 1));
    }
    for (int c = 1; c < l.k; ++c) ++above[static_cast<std::size_t>(c - 1)];
  }
  return thresholds_from_counts(static_cast<std::int64_t>(labels.size()), above);
}

}  // namespace gnolr::ordinal
