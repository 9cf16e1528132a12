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

// Ingestion of interaction logs into a DatasetBundle: chronological split,
// percentile binning of numeric features, vocabulary encoding of categorical
// ones, ordinal labels, per-user lists and minibatch plans.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gnolr/binary_io.hpp"
#include "gnolr/encoders.hpp"
#include "gnolr/feedback_ordinal.hpp"

namespace gnolr::data {

using encoders::IdMatrix;
using encoders::Side;
using ordinal::OrdinalLabel;

enum class FeatureKind : std::uint8_t { kCategorical = 0, kNumeric = 1 };

struct BinningSpec {
  std::vector<double> cut_points;  // sorted, duplicates collapsed
};

// Nearest-rank quantile boundaries at i/n_bins, i = 1..n_bins-1.
BinningSpec fit_bins(std::span<const double> train_values, int n_bins = 50);
// Number of boundaries strictly below `value`.
int apply_bins(double value, const BinningSpec& spec);

// 1 iff rating > threshold.
int binarize_ratings(double rating, double threshold = 4.0);

struct FeatureColumn {
  std::string name;
  Side side = Side::kUser;
  FeatureKind kind = FeatureKind::kCategorical;
  std::vector<std::string> vocabulary;  // categorical: table row r >= 1 is vocabulary[r-1]
  BinningSpec bins;                     // numeric: table row = bin + 1
  int n_bins = 50;

  // Table rows including the OOV row 0.
  std::int64_t rows() const;
  // Unknown values and unparseable numerics map to row 0.
  std::int32_t encode(std::string_view raw) const;
  // Rebuilds the value -> row index after the vocabulary changes.
  void reindex();

 private:
  std::unordered_map<std::string, std::int32_t> index_;
};

struct RawInteraction {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  std::vector<std::string> user_features;
  std::vector<std::string> item_features;
  std::vector<std::uint8_t> feedback;  // declaration order
};

struct RawTable {
  std::vector<std::string> user_feature_names;
  std::vector<std::string> item_feature_names;
  std::vector<std::string> feedback_names;
  std::set<std::string> numeric_columns;
  std::vector<RawInteraction> rows;
};

struct IngestOptions {
  std::vector<std::string> feedback;   // feedback columns (or the single rating-derived name)
  std::set<std::string> numeric_columns;
  std::string rating_column;           // non-empty: feedback = binarize_ratings(rating)
  double rating_threshold = 4.0;
  // Columns joined with '|' to form the user key, e.g. user_id + query.
  std::vector<std::string> user_key_columns{"user_id"};
  // Also embed the user and item keys as categorical features.
  bool id_features = true;
};

// UTF-8 CSV with a header. Required columns: user_id, item_id, timestamp.
// Columns prefixed uf_ / if_ are user / item features.
RawTable read_interactions_csv(const std::filesystem::path& path, const IngestOptions& opts);
RawTable parse_interactions_csv(std::string_view text, const IngestOptions& opts,
                                const std::string& source = "<memory>");

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Stable sort by (timestamp, original index); the first floor(n * train_fraction)
// samples are history, of which the last part beyond
// floor(n_history * (1 - validation_fraction_of_train)) is validation.
SplitIndices chronological_split(std::span<const std::int64_t> timestamps,
                                 double train_fraction = 0.7,
                                 double validation_fraction_of_train = 0.1);

struct Split {
  std::vector<std::int64_t> user;       // index into DatasetBundle::users
  std::vector<std::int64_t> item;       // index into DatasetBundle::items
  std::vector<std::int64_t> timestamp;
  IdMatrix user_features;
  IdMatrix item_features;
  std::vector<std::uint8_t> feedback;   // size() x T, sparsity order
  std::vector<OrdinalLabel> labels;
  int T = 0;

  std::size_t size() const { return labels.size(); }
  std::uint8_t bit(std::size_t row, int rank) const {
    return feedback[row * static_cast<std::size_t>(T) + static_cast<std::size_t>(rank)];
  }
};

struct DatasetBundle {
  ordinal::FeedbackSchema schema;
  std::vector<FeatureColumn> user_columns;
  std::vector<FeatureColumn> item_columns;
  std::vector<std::string> users;
  std::vector<std::string> items;
  Split train;
  Split validation;
  Split test;

  int T() const { return schema.num_feedback(); }
  std::vector<std::int64_t> vocab_sizes(Side side) const;
  const Split& split(std::string_view name) const;
  // Short description of the feature layout; equal fingerprints mean a model
  // trained on one bundle can score the other.
  std::string fingerprint() const;
};

struct PrepareOptions {
  double train_fraction = 0.7;
  double validation_fraction_of_train = 0.1;
  int n_bins = 50;
};

// Splits, fits vocabularies and bins on the training part, orders the
// feedback by training positive counts and assigns ordinal labels.
DatasetBundle prepare_bundle(const RawTable& raw, const PrepareOptions& opts = {});

// Schema and fitted feature columns: everything needed to encode new rows.
struct FeatureLayout {
  ordinal::FeedbackSchema schema;
  std::vector<FeatureColumn> user_columns;
  std::vector<FeatureColumn> item_columns;
};
FeatureLayout layout_of(const DatasetBundle& bundle);
void put_layout(io::BinaryWriter& w, const FeatureLayout& layout);
FeatureLayout get_layout(io::BinaryReader& r);

std::string serialize_bundle(const DatasetBundle& bundle);
DatasetBundle deserialize_bundle(std::string bytes, const std::string& source = "<memory>");
void write_bundle(const std::filesystem::path& path, const DatasetBundle& bundle);
DatasetBundle read_bundle(const std::filesystem::path& path);

IdMatrix gather_rows(const IdMatrix& ids, std::span<const std::size_t> rows);

using Lists = std::vector<std::vector<std::size_t>>;

// Groups rows by user (users in ascending index order, rows in split order).
// Groups longer than max_len are shuffled with `rng` and cut into chunks of
// max_len, the last chunk taking the remainder.
Lists build_lists(const Split& split, std::size_t max_len, std::mt19937_64& rng);

enum class BatchMode { kPointwise, kListwise };

struct Batch {
  std::vector<std::size_t> rows;
  // Listwise batches: list i spans rows[list_offsets[i] .. list_offsets[i+1]).
  std::vector<std::size_t> list_offsets;

  std::size_t num_lists() const { return list_offsets.empty() ? 0 : list_offsets.size() - 1; }
};

// One epoch of batches in a seeded random order; the final short batch is kept.
std::vector<Batch> make_batches(BatchMode mode, const Split& split, const Lists& lists,
                                std::size_t batch_size, std::uint64_t seed);

}  // namespace gnolr::data
