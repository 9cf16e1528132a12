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

// Epoch loop, model selection, checkpoints and multi-seed runs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gnolr/data.hpp"
#include "gnolr/eval.hpp"
#include "gnolr/model.hpp"

namespace gnolr::training {

using tensor::Matrix;

enum class ThresholdPopulation { kTrain, kAll };

struct TrainConfig {
  model::ModelKind kind = model::ModelKind::kGnolr;
  // Empty: estimate from the data.
  std::vector<double> thresholds;
  ThresholdPopulation population = ThresholdPopulation::kTrain;
  double gamma = 1.0;
  double clip_floor = 1e-6;
  int embedding_dim = encoders::kDefaultEmbeddingDim;
  encoders::TowerConfig tower;
  baselines::HeadMode head = baselines::HeadMode::kAffine;
  int bce_target = 0;
  std::vector<double> positive_weights;
  bool listnet_logged = true;

  tensor::AdamConfig optimizer;
  int epochs = 10;
  std::size_t batch_size = 1024;
  std::size_t list_batch_size = 32;
  std::size_t max_list_len = 500;
  std::uint64_t seed = 42;
  int threads = 1;
  int patience = 0;  // 0: no early stopping

  void validate() const;
  // Canonical key = value text; stored in checkpoints and hashed.
  std::string echo() const;
};

ordinal::ThresholdSet resolve_thresholds(const data::DatasetBundle& bundle,
                                         const TrainConfig& cfg);
model::ModelSpec make_spec(const data::DatasetBundle& bundle, const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  std::optional<double> val_auc;
  int target = 0;

  std::string line() const;  // epoch=<n> loss=<v> val_auc_t<k>=<v>
};

struct Checkpoint {
  model::Model model;
  std::string config_echo;
  std::uint64_t config_hash = 0;
  data::FeatureLayout layout;
  std::string fingerprint;
  double best_metric = 0.0;  // NaN when validation never produced a metric
  int best_epoch = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> epochs;
  bool diverged = false;
  std::string divergence;  // message when diverged
};

using LogSink = std::function<void(const std::string&)>;

// Target used for model selection: the sparsest level, or the BCE target.
int selection_target(const model::ModelSpec& spec);

TrainResult train(const data::DatasetBundle& bundle, const TrainConfig& cfg,
                  const LogSink& log = {});

// Trains and tests with seeds seed, seed+1, ...; every metric gets ".mean"
// and ".std" (sample standard deviation, 0 for one run).
eval::MetricReport multi_run(const data::DatasetBundle& bundle, const TrainConfig& cfg,
                             int n_seeds, const eval::EvalOptions& eval_opts = {},
                             const LogSink& log = {});

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string bytes, const std::string& source = "<memory>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gnolr::training
