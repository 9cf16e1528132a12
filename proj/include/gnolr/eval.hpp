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

// Ranking metrics, exact nearest-neighbour retrieval and embedding-geometry
// export.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gnolr/data.hpp"
#include "gnolr/model.hpp"
#include "gnolr/tensor.hpp"

namespace gnolr::eval {

using tensor::Matrix;

struct ScoredSample {
  double score = 0.0;
  std::uint8_t label = 0;
  std::int64_t user = 0;
  std::int64_t list_id = -1;
};

// Rank-based AUC with tied scores credited one half.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);
double auc(std::span<const ScoredSample> samples);

enum class GaucWeighting { kPairs, kUniform };
// Mean of per-user AUC over users with both classes.
double gauc(std::span<const ScoredSample> samples, GaucWeighting weighting = GaucWeighting::kPairs);

// Orders identifiers numerically when both are integers, lexically otherwise.
bool id_less(const std::string& a, const std::string& b);

class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  RetrievalIndex(std::vector<std::string> ids, Matrix rows);

  std::size_t size() const { return ids_.size(); }
  Eigen::Index dim() const { return rows_.cols(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& rows() const { return rows_; }
  // Position of row r in ascending id order; breaks distance ties.
  std::size_t id_rank(std::size_t r) const { return id_rank_[r]; }
  // Throws MetricError unless every squared row norm is within tol of expected.
  void check_norms(double expected_squared_norm, double tol = 1e-6) const;

 private:
  std::vector<std::string> ids_;
  Matrix rows_;
  std::vector<std::size_t> id_rank_;
};

// Row indices of the K items closest in Euclidean distance; K beyond the
// index size returns the full ranking.
std::vector<std::size_t> topk_retrieve(std::span<const double> user, const RetrievalIndex& index,
                                       std::size_t K);

// |retrieved ∩ positives| / |positives|; throws MetricError on empty positives.
double recall_at_k(std::span<const std::size_t> retrieved, std::span<const std::size_t> positives);

struct AngleBin {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};
using AngleHistogram = std::array<AngleBin, 180>;

// Angle between row r of `users` and row r of `items`, counted in 1 degree
// bins by label; the last bin is closed at 180.
AngleHistogram angle_histogram(const Matrix& users, const Matrix& items,
                               std::span<const std::uint8_t> labels);
void write_angle_csv(std::ostream& out, const AngleHistogram& hist);

struct MetricReport {
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> info;

  // metric=value lines, keys sorted.
  std::string flat() const;
  // Nested JSON: "auc_t1" becomes {"auc": {"t1": ...}} and "auc_t1.mean"
  // {"auc": {"t1": {"mean": ...}}}.
  std::string json() const;
};

struct EvalOptions {
  std::vector<std::size_t> recall_k{5, 10, 15, 20};
  bool recall = true;
  bool gauc = true;
  GaucWeighting gauc_weighting = GaucWeighting::kPairs;
  int threads = 1;
};

// Feature tuple of every user (or item) of the bundle, taken from its first
// occurrence in train, validation, test order.
encoders::IdMatrix entity_features(const data::DatasetBundle& bundle, encoders::Side side);

// Per-target AUC, GAUC and Recall@K of the model on one split. Recall
// positives for target c are the split's items with k > c for that user and
// the candidate pool is every item of the bundle.
MetricReport evaluate_model(const model::Model& model, const data::DatasetBundle& bundle,
                            const data::Split& split, const EvalOptions& opts = {});

// Mean Recall@K for target c over the split's users with at least one
// positive, using embedding set `set`; one value per entry of `ks`.
std::vector<double> recall_for_target(const model::Model& model, const data::DatasetBundle& bundle,
                                      const data::Split& split, int c, int set,
                                      std::span<const std::size_t> ks, int threads = 1);

// Embedding TSV: "#gnolr-emb v1 dim=D T=<T>" then "id<TAB>v1<TAB>..." with
// values rounded to float and printed with 9 significant digits.
void write_embeddings(const std::filesystem::path& path, std::span<const std::string> ids,
                      const Matrix& rows, int T);
struct EmbeddingFile {
  int T = 1;
  RetrievalIndex index;
};
EmbeddingFile read_embeddings(const std::filesystem::path& path);

}  // namespace gnolr::eval
