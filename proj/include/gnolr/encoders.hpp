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

// Feature embedding tables and twin-tower MLP encoders.
//
// A TwinTowerStack holds N independent (user, item) tower pairs over one
// shared set of embedding tables. For the nested model N = T and pair c
// produces the unit sub-embeddings e_u^c, e_i^c; the nested embedding E^c is
// the concatenation of the first c of them, so that
//   K(E_u^c, E_i^c) = (1/c) * sum_{j<=c} e_u^j . e_i^j.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnolr/tensor.hpp"

namespace gnolr::encoders {

using tensor::Matrix;
using tensor::Parameter;
using tensor::Rng;

using IdMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Side { kUser = 0, kItem = 1 };

inline constexpr int kDefaultEmbeddingDim = 16;
// Row 0 of every table is the out-of-vocabulary bucket.
inline constexpr std::int32_t kOovRow = 0;

struct TowerConfig {
  std::vector<int> hidden_sizes{128, 64, 32};
  double slope = 0.01;

  int output_dim() const { return hidden_sizes.empty() ? 0 : hidden_sizes.back(); }
  void validate() const;
};

class EmbeddingTableSet {
 public:
  EmbeddingTableSet() = default;
  // Tables are initialized uniformly in [-0.05, 0.05].
  EmbeddingTableSet(std::span<const std::int64_t> user_vocab,
                    std::span<const std::int64_t> item_vocab, int dim, Rng& rng);

  int dim() const { return dim_; }
  std::vector<Parameter>& tables(Side side) { return side == Side::kUser ? user_ : item_; }
  const std::vector<Parameter>& tables(Side side) const {
    return side == Side::kUser ? user_ : item_;
  }
  int input_width(Side side) const {
    return static_cast<int>(tables(side).size()) * dim_;
  }

  // Row-wise concatenation of looked-up rows in feature order.
  Matrix lookup(Side side, const IdMatrix& ids) const;
  void accumulate_grad(Side side, const IdMatrix& ids, const Matrix& d_input);

 private:
  int dim_ = kDefaultEmbeddingDim;
  std::vector<Parameter> user_;
  std::vector<Parameter> item_;
};

// Concatenation of one row per feature; ids outside the vocabulary resolve to
// the OOV row.
std::vector<double> embed_features(std::span<const std::int32_t> ids,
                                   std::span<const Parameter> tables);

class Tower {
 public:
  struct Cache {
    std::vector<Matrix> inputs;       // input of each layer
    std::vector<Matrix> pre_activations;
    tensor::NormalizedRows output;
  };

  Tower() = default;
  Tower(const std::string& name, int input_dim, const TowerConfig& cfg, Rng& rng);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return cfg_.output_dim(); }
  const TowerConfig& config() const { return cfg_; }

  // Rows of the result are unit vectors (or zero rows flagged as degenerate).
  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  // Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Matrix backward(const Cache& cache, const Matrix& d_output);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  TowerConfig cfg_;
  int input_dim_ = 0;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

struct TowerOutput {
  std::vector<double> unit;
  bool degenerate = false;
};
TowerOutput tower_forward(std::span<const double> input, const Tower& tower);

struct NestedEmbedding {
  std::vector<std::vector<double>> subs;

  int T() const { return static_cast<int>(subs.size()); }
  // E^c = [e^1 ... e^c].
  std::vector<double> prefix(int c) const;
};

double nested_kernel(const NestedEmbedding& user, const NestedEmbedding& item, int c);

// K(E^c) for c = 1..N from per-pair cosines.
std::vector<double> nested_kernels_from_cosines(std::span<const double> cosines);
// Chain rule through the prefix means: dL/dcos_j = sum_{c>=j} dL/dK_c / c.
std::vector<double> cosine_grads_from_nested(std::span<const double> d_kernels);

class TwinTowerStack {
 public:
  struct Cache {
    IdMatrix user_ids;
    IdMatrix item_ids;
    std::vector<Tower::Cache> user;
    std::vector<Tower::Cache> item;
    std::vector<Matrix> user_units;
    std::vector<Matrix> item_units;
  };

  TwinTowerStack() = default;
  TwinTowerStack(int num_pairs, std::span<const std::int64_t> user_vocab,
                 std::span<const std::int64_t> item_vocab, int embedding_dim,
                 const TowerConfig& cfg, Rng& rng);

  int num_pairs() const { return static_cast<int>(user_towers_.size()); }
  int output_dim() const { return cfg_.output_dim(); }
  const TowerConfig& config() const { return cfg_; }
  const EmbeddingTableSet& tables() const { return tables_; }
  int num_features(Side side) const { return static_cast<int>(tables_.tables(side).size()); }

  // Per-pair cosines, one row per sample and one column per pair.
  Matrix forward(const IdMatrix& user_ids, const IdMatrix& item_ids, Cache* cache = nullptr,
                 int threads = 1) const;
  void backward(const Cache& cache, const Matrix& d_cosines, int threads = 1);

  // Unit sub-embeddings of one side for pair `pair`.
  Matrix encode(Side side, int pair, const IdMatrix& ids) const;
  // Degenerate-output rows seen by forward/encode since construction.
  std::int64_t degenerate_count() const { return degenerate_; }

  // Embedding tables first, then user towers and item towers by pair.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  TowerConfig cfg_;
  EmbeddingTableSet tables_;
  std::vector<Tower> user_towers_;
  std::vector<Tower> item_towers_;
  mutable std::int64_t degenerate_ = 0;
};

struct NestedPair {
  NestedEmbedding user;
  NestedEmbedding item;
};
// Runs every tower pair of the stack on one user/item feature tuple.
NestedPair nested_forward(std::span<const std::int32_t> user_ids,
                          std::span<const std::int32_t> item_ids, const TwinTowerStack& stack);

// Splits `total` work items over at most `threads` workers; fn(begin, end).
// Workers write disjoint outputs, so results do not depend on `threads`.
void parallel_for(std::size_t total, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace gnolr::encoders
