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

// A trainable model of any supported kind behind one interface: batched loss
// and gradient, per-target scores and retrieval embeddings.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gnolr/baselines.hpp"
#include "gnolr/data.hpp"
#include "gnolr/encoders.hpp"
#include "gnolr/gnolr_loss.hpp"

namespace gnolr::model {

using encoders::IdMatrix;
using encoders::Side;
using tensor::Matrix;
using tensor::Parameter;

enum class ModelKind : std::uint8_t {
  kGnolr = 0,
  kGnolrListwise = 1,
  kGnolrV0 = 2,  // per-category towers, own-pair kernels, plain OLR loss
  kGnolrV1 = 3,  // nested kernels, plain OLR loss
  kNeuralOlr = 4,
  kBce = 5,
  kNsb = 6,
};

std::string_view to_string(ModelKind kind);
// Accepts gnolr, gnolr_l, gnolr_v0, gnolr_v1, neural_olr, bce, nsb.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kGnolr;
  int T = 1;
  std::vector<double> thresholds;  // a_1..a_T
  double gamma = 1.0;
  double clip_floor = 1e-6;
  int embedding_dim = encoders::kDefaultEmbeddingDim;
  encoders::TowerConfig tower;
  baselines::HeadMode head = baselines::HeadMode::kAffine;
  // BCE: target level c in 1..T, label = bit of feedback rank c.
  int bce_target = 0;  // 0 = T
  // Positive weights: BCE uses [0], NSB one per task.
  std::vector<double> positive_weights;
  bool listnet_logged = true;
  std::vector<std::int64_t> user_vocab;
  std::vector<std::int64_t> item_vocab;

  int num_pairs() const;
  int effective_bce_target() const { return bce_target == 0 ? T : bce_target; }
  double positive_weight(int task) const;
  bool uses_thresholds() const;
  loss::GnolrHyper hyper() const;
  void validate() const;
};

class Model {
 public:
  Model() = default;
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const encoders::TwinTowerStack& stack() const { return stack_; }

  // Mean per-sample loss over the batch, plus the mean ListNet loss over its
  // lists for the listwise kind. Gradients are accumulated into parameters.
  double loss_and_grad(const data::Split& split, const data::Batch& batch, int threads = 1);
  double loss(const data::Split& split, const data::Batch& batch, int threads = 1) const;

  // n x T matrix; column c-1 scores target c (probability of a level above c).
  Matrix scores(const IdMatrix& user_ids, const IdMatrix& item_ids, int threads = 1) const;

  // Retrieval embeddings. GNOLR kinds share one unified space; V0 and NSB
  // keep one embedding set per target.
  int num_embedding_sets() const;
  int embedding_set_for_target(int c) const;
  Matrix embeddings(Side side, const IdMatrix& ids, int set = 0) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  struct Pass {
    double loss = 0.0;
    Matrix d_cos;
    std::vector<double> d_w;
    std::vector<double> d_b;
    encoders::TwinTowerStack::Cache cache;
  };
  Pass evaluate(const data::Split& split, const data::Batch& batch, int threads,
                bool need_grad) const;
  // Loss and gradient w.r.t. the cosines of one sample.
  double sample_loss(std::span<const double> cos, const data::Split& split, std::size_t row,
                     std::span<double> d_cos, std::vector<double>* d_w,
                     std::vector<double>* d_b) const;

  ModelSpec spec_;
  loss::GnolrHyper hyper_;
  encoders::TwinTowerStack stack_;
  Parameter head_w_;
  Parameter head_b_;
  bool has_head_ = false;
};

}  // namespace gnolr::model
