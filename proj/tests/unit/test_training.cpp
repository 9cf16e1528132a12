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
#include <filesystem>
#include <random>

#include "gnolr/errors.hpp"
#include "gnolr/synthetic.hpp"
#include "gnolr/training.hpp"

namespace gnolr::training {
namespace {

// Two user groups and two item groups. A click happens iff the groups match;
// a purchase iff they match and the item is in the "premium" half.
data::DatasetBundle separable_bundle(std::uint64_t seed) {
  data::RawTable raw;
  raw.user_feature_names = {"uf_group"};
  raw.item_feature_names = {"if_group", "if_tier"};
  raw.feedback_names = {"click", "buy"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 39);
  for (int i = 0; i < 3000; ++i) {
    const int u = pick(rng);
    const int it = pick(rng);
    data::RawInteraction row;
    row.user_id = "u" + std::to_string(u);
    row.item_id = "i" + std::to_string(it);
    row.timestamp = i;
    const int ug = u % 2;
    const int ig = it % 2;
    const int tier = (it / 2) % 2;
    row.user_features = {std::to_string(ug)};
    row.item_features = {std::to_string(ig), std::to_string(tier)};
    const bool click = ug == ig;
    row.feedback = {static_cast<std::uint8_t>(click), static_cast<std::uint8_t>(click && tier == 1)};
    raw.rows.push_back(row);
  }
  return data::prepare_bundle(raw);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.tower.hidden_sizes = {16, 8};
  cfg.embedding_dim = 8;
  cfg.gamma = 4.0;
  cfg.epochs = 4;
  cfg.batch_size = 128;
  cfg.optimizer.learning_rate = 0.01;
  cfg.seed = 7;
  return cfg;
}

TEST_CASE("Train.LearnsSeparableData") {
  const auto bundle = separable_bundle(1);
  auto cfg = small_config();
  const auto res = train(bundle, cfg);
  {
    INFO(res.divergence);
    REQUIRE_FALSE(res.diverged);
  }
  REQUIRE_EQ(res.epochs.size(), 4u);
  CHECK_GT(res.checkpoint.best_metric, 0.95);
  CHECK_LT(res.epochs.back().loss, res.epochs.front().loss);
}

TEST_CASE("Train.SameSeedGivesIdenticalLogs") {
  const auto bundle = separable_bundle(2);
  auto cfg = small_config();
  cfg.epochs = 2;
  std::vector<std::string> a;
  std::vector<std::string> b;
  train(bundle, cfg, [&](const std::string& s) { a.push_back(s); });
  train(bundle, cfg, [&](const std::string& s) { b.push_back(s); });
  REQUIRE_EQ(a.size(), 2u);
  CHECK_EQ(a, b);
  {
    INFO(a[0]);
    CHECK_EQ(a[0].rfind("epoch=1 loss=", 0), 0u);
  }
}

TEST_CASE("Train.ListwiseAndBaselinesRun") {
  const auto bundle = separable_bundle(3);
  for (auto kind : {model::ModelKind::kGnolrListwise, model::ModelKind::kGnolrV0,
                    model::ModelKind::kGnolrV1, model::ModelKind::kNeuralOlr, model::ModelKind::kBce,
                    model::ModelKind::kNsb}) {
    auto cfg = small_config();
    cfg.kind = kind;
    cfg.epochs = 1;
    const auto res = train(bundle, cfg);
    {
      INFO(model::to_string(kind));
      CHECK_FALSE(res.diverged);
    }
    CHECK_EQ(res.epochs.size(), 1u);
  }
}

TEST_CASE("Thresholds.AutoMatchesEstimate") {
  const auto bundle = separable_bundle(4);
  TrainConfig cfg;
  const auto a = resolve_thresholds(bundle, cfg);
  const auto want = ordinal::estimate_thresholds(bundle.train.labels, bundle.T());
  REQUIRE_EQ(a.size(), want.size());
  for (int c = 1; c <= a.size(); ++c) CHECK_EQ(a.threshold(c), want.threshold(c));
  cfg.thresholds = {0.5};
  CHECK_THROWS_AS(resolve_thresholds(bundle, cfg), ConfigError);
  cfg.thresholds = {2.0, 1.0};
  CHECK_THROWS_AS(resolve_thresholds(bundle, cfg), ConfigError);
  cfg.thresholds = {1.0, 2.0};
  CHECK_EQ(resolve_thresholds(bundle, cfg).threshold(2), 2.0);
}

TEST_CASE("Checkpoint.RoundTripGivesIdenticalScores") {
  const auto bundle = separable_bundle(5);
  auto cfg = small_config();
  cfg.epochs = 1;
  const auto res = train(bundle, cfg);
  const auto path = std::filesystem::temp_directory_path() / "gnolr_test.ckpt";
  save_checkpoint(path, res.checkpoint);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  const auto& t = bundle.test;
  CHECK_EQ(back.model.scores(t.user_features, t.item_features),
            res.checkpoint.model.scores(t.user_features, t.item_features));
  CHECK_EQ(back.config_echo, res.checkpoint.config_echo);
  CHECK_EQ(back.fingerprint, bundle.fingerprint());
  CHECK_EQ(back.best_epoch, res.checkpoint.best_epoch);
  const std::string bytes = serialize_checkpoint(res.checkpoint);
  CHECK_EQ(serialize_checkpoint(deserialize_checkpoint(bytes)), bytes);
  CHECK_THROWS(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)));
}

TEST_CASE("Optimizer.UntouchedEmbeddingRowsStayBitIdentical") {
  const auto bundle = separable_bundle(6);
  auto cfg = small_config();
  cfg.epochs = 1;
  const model::Model init(make_spec(bundle, cfg), cfg.seed);
  const auto res = train(bundle, cfg);
  const auto before = init.parameters();
  const auto after = res.checkpoint.model.parameters();
  int tables = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i]->name.rfind("emb.", 0) != 0) continue;
    ++tables;
    // training rows never use the out-of-vocabulary row
    {
      INFO(before[i]->name);
      CHECK_EQ(before[i]->value.row(0), after[i]->value.row(0));
    }
    {
      INFO(before[i]->name);
      CHECK_NE(before[i]->value.row(1), after[i]->value.row(1));
    }
  }
  CHECK_EQ(tables, 3);
}

TEST_CASE("Optimizer.RepeatedBatchDescends") {
  const auto bundle = separable_bundle(7);
  auto cfg = small_config();
  model::Model m(make_spec(bundle, cfg), 3);
  const auto batches = data::make_batches(data::BatchMode::kPointwise, bundle.train, {}, 256, 1);
  const double start = m.loss(bundle.train, batches[0]);
  for (int s = 0; s < 30; ++s) {
    m.loss_and_grad(bundle.train, batches[0]);
    for (auto* p : m.parameters()) tensor::adam_step(*p, cfg.optimizer);
  }
  CHECK_LT(m.loss(bundle.train, batches[0]), start);
}

TEST_CASE("MultiRun.SingleSeedHasZeroStd") {
  const auto bundle = separable_bundle(8);
  auto cfg = small_config();
  cfg.epochs = 1;
  eval::EvalOptions opts;
  opts.recall_k = {5};
  const auto rep = multi_run(bundle, cfg, 1, opts);
  REQUIRE(rep.metrics.count("auc_t2.mean"));
  CHECK_EQ(rep.metrics.at("auc_t2.std"), 0.0);
  CHECK_EQ(rep.info.at("runs"), "1");
}

TEST_CASE("Config.ValidateRejectsBadValues") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.gamma = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_NE(TrainConfig{}.echo(), small_config().echo());
}

}  // namespace
}  // namespace gnolr::training
