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

#include "gnolr/training.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "gnolr/binary_io.hpp"
#include "gnolr/errors.hpp"

namespace gnolr::training {

namespace {

constexpr std::string_view kCheckpointMagic = "GNC1";
constexpr std::uint32_t kCheckpointVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string list_text(const std::vector<T>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(xs[i]);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s + "]";
}

std::vector<Matrix> snapshot(const model::Model& m) {
  std::vector<Matrix> out;
  for (const auto* p : m.parameters()) out.push_back(p->value);
  return out;
}

void restore(model::Model& m, const std::vector<Matrix>& values) {
  auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
  if (batch_size < 1 || list_batch_size < 1) throw ConfigError("batch sizes must be >= 1");
  if (max_list_len < 1) throw ConfigError("max_list_len must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  optimizer.validate();
  tower.validate();
}

std::string TrainConfig::echo() const {
  std::ostringstream s;
  s << "kind = " << model::to_string(kind) << '\n'
    << "thresholds = " << (thresholds.empty() ? std::string("auto") : list_text(thresholds)) << '\n'
    << "threshold_population = " << (population == ThresholdPopulation::kAll ? "all" : "train")
    << '\n'
    << "gamma = " << fmt(gamma) << '\n'
    << "clip_floor = " << fmt(clip_floor) << '\n'
    << "embedding_dim = " << embedding_dim << '\n'
    << "hidden = " << list_text(tower.hidden_sizes) << '\n'
    << "slope = " << fmt(tower.slope) << '\n'
    << "head = " << (head == baselines::HeadMode::kAffine ? "affine" : "raw") << '\n'
    << "bce_target = " << bce_target << '\n'
    << "positive_weights = " << list_text(positive_weights) << '\n'
    << "listnet = " << (listnet_logged ? "logged" : "unlogged") << '\n'
    << "lr = " << fmt(optimizer.learning_rate) << '\n'
    << "beta1 = " << fmt(optimizer.beta1) << '\n'
    << "beta2 = " << fmt(optimizer.beta2) << '\n'
    << "epsilon = " << fmt(optimizer.epsilon) << '\n'
    << "epochs = " << epochs << '\n'
    << "batch_size = " << batch_size << '\n'
    << "list_batch_size = " << list_batch_size << '\n'
    << "max_list_len = " << max_list_len << '\n'
    << "seed = " << seed << '\n'
    << "patience = " << patience << '\n';
  return s.str();
}

ordinal::ThresholdSet resolve_thresholds(const data::DatasetBundle& bundle,
                                         const TrainConfig& cfg) {
  const int T = bundle.T();
  if (!cfg.thresholds.empty()) {
    if (static_cast<int>(cfg.thresholds.size()) != T) {
      throw ConfigError("config gives " + std::to_string(cfg.thresholds.size()) +
                        " thresholds but the data has " + std::to_string(T) + " feedback types");
    }
    try {
      return ordinal::ThresholdSet(cfg.thresholds);
    } catch (const ThresholdError& e) {
      throw ConfigError(std::string("model.thresholds: ") + e.what());
    }
  }
  std::vector<ordinal::OrdinalLabel> labels = bundle.train.labels;
  if (cfg.population == ThresholdPopulation::kAll) {
    labels.insert(labels.end(), bundle.validation.labels.begin(), bundle.validation.labels.end());
    labels.insert(labels.end(), bundle.test.labels.begin(), bundle.test.labels.end());
  }
  return ordinal::estimate_thresholds(labels, T);
}

model::ModelSpec make_spec(const data::DatasetBundle& bundle, const TrainConfig& cfg) {
  model::ModelSpec spec;
  spec.kind = cfg.kind;
  spec.T = bundle.T();
  if (cfg.kind == model::ModelKind::kNsb && spec.T < 2) {
    throw ConfigError("nsb needs at least two feedback types; use bce for one");
  }
  if (spec.uses_thresholds()) {
    const ordinal::ThresholdSet a = resolve_thresholds(bundle, cfg);
    spec.thresholds.assign(a.values().begin(), a.values().end());
  }
  spec.gamma = cfg.gamma;
  spec.clip_floor = cfg.clip_floor;
  spec.embedding_dim = cfg.embedding_dim;
  spec.tower = cfg.tower;
  spec.head = cfg.head;
  spec.bce_target = cfg.bce_target;
  spec.positive_weights = cfg.positive_weights;
  spec.listnet_logged = cfg.listnet_logged;
  spec.user_vocab = bundle.vocab_sizes(encoders::Side::kUser);
  spec.item_vocab = bundle.vocab_sizes(encoders::Side::kItem);
  spec.validate();
  return spec;
}

std::string EpochLog::line() const {
  char buf[128];
  if (val_auc) {
    std::snprintf(buf, sizeof buf, "epoch=%d loss=%.6f val_auc_t%d=%.6f", epoch, loss, target,
                  *val_auc);
  } else {
    std::snprintf(buf, sizeof buf, "epoch=%d loss=%.6f val_auc_t%d=nan", epoch, loss, target);
  }
  return buf;
}

int selection_target(const model::ModelSpec& spec) {
  return spec.kind == model::ModelKind::kBce ? spec.effective_bce_target() : spec.T;
}

TrainResult train(const data::DatasetBundle& bundle, const TrainConfig& cfg, const LogSink& log) {
  cfg.validate();
  if (bundle.train.size() == 0) throw IngestionError("training split is empty");
  const model::ModelSpec spec = make_spec(bundle, cfg);

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  ckpt.model = model::Model(spec, cfg.seed);
  ckpt.config_echo = cfg.echo();
  ckpt.config_hash = io::fnv1a64(ckpt.config_echo);
  ckpt.layout = data::layout_of(bundle);
  ckpt.fingerprint = bundle.fingerprint();
  ckpt.best_metric = std::numeric_limits<double>::quiet_NaN();
  model::Model& m = ckpt.model;

  const bool listwise = spec.kind == model::ModelKind::kGnolrListwise;
  data::Lists lists;
  if (listwise) {
    std::mt19937_64 rng(cfg.seed);
    lists = data::build_lists(bundle.train, cfg.max_list_len, rng);
  }
  const int target = selection_target(spec);
  auto params = m.parameters();
  std::vector<Matrix> best = snapshot(m);
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = data::make_batches(
        listwise ? data::BatchMode::kListwise : data::BatchMode::kPointwise, bundle.train, lists,
        listwise ? cfg.list_batch_size : cfg.batch_size,
        cfg.seed + static_cast<std::uint64_t>(epoch));
    double weighted = 0.0;
    std::size_t seen = 0;
    try {
      for (const auto& batch : batches) {
        const double l = m.loss_and_grad(bundle.train, batch, cfg.threads);
        if (!std::isfinite(l)) {
          throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch));
        }
        for (auto* p : params) tensor::adam_step(*p, cfg.optimizer);
        weighted += l * static_cast<double>(batch.rows.size());
        seen += batch.rows.size();
      }
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.divergence = e.what();
    } catch (const OptimizerError& e) {
      result.diverged = true;
      result.divergence = std::string(e.what()) + " at epoch " + std::to_string(epoch);
    }
    if (result.diverged) {
      for (auto* p : params) p->zero_grad();
      break;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = seen > 0 ? weighted / static_cast<double>(seen) : 0.0;
    entry.target = target;
    if (bundle.validation.size() > 0) {
      const Matrix s = m.scores(bundle.validation.user_features, bundle.validation.item_features,
                                cfg.threads);
      std::vector<double> scores(bundle.validation.size());
      std::vector<std::uint8_t> labels(bundle.validation.size());
      for (std::size_t r = 0; r < scores.size(); ++r) {
        scores[r] = s(static_cast<Eigen::Index>(r), target - 1);
        labels[r] = bundle.validation.labels[r].k > target ? 1 : 0;
      }
      try {
        entry.val_auc = eval::auc(scores, labels);
      } catch (const MetricError&) {
      }
    }
    result.epochs.push_back(entry);
    if (log) log(entry.line());

    // Without any validation metric the latest epoch wins.
    const bool improved = entry.val_auc ? (std::isnan(ckpt.best_metric) || *entry.val_auc > ckpt.best_metric)
                                        : std::isnan(ckpt.best_metric);
    if (improved) {
      if (entry.val_auc) ckpt.best_metric = *entry.val_auc;
      ckpt.best_epoch = epoch;
      best = snapshot(m);
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  restore(m, best);
  return result;
}

eval::MetricReport multi_run(const data::DatasetBundle& bundle, const TrainConfig& cfg,
                             int n_seeds, const eval::EvalOptions& eval_opts, const LogSink& log) {
  if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  std::map<std::string, std::vector<double>> values;
  eval::MetricReport out;
  for (int i = 0; i < n_seeds; ++i) {
    TrainConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(i);
    if (log) log("seed=" + std::to_string(run.seed));
    const TrainResult r = train(bundle, run, log);
    if (r.diverged) throw DivergenceError(r.divergence);
    const auto rep = eval::evaluate_model(r.checkpoint.model, bundle, bundle.test, eval_opts);
    for (const auto& [k, v] : rep.metrics) values[k].push_back(v);
    out.info = rep.info;
  }
  for (const auto& [k, xs] : values) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    out.metrics[k + ".mean"] = mean;
    out.metrics[k + ".std"] = sd;
  }
  out.info["runs"] = std::to_string(n_seeds);
  return out;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const model::ModelSpec& s = ckpt.model.spec();
  io::BinaryWriter w;
  w.put_magic(kCheckpointMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_string(ckpt.config_echo);
  w.put<std::uint64_t>(ckpt.config_hash);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(s.kind));
  w.put<std::int32_t>(s.T);
  w.put_array<double>(s.thresholds);
  w.put<double>(s.gamma);
  w.put<double>(s.clip_floor);
  w.put<std::int32_t>(s.embedding_dim);
  std::vector<std::int32_t> hidden(s.tower.hidden_sizes.begin(), s.tower.hidden_sizes.end());
  w.put_array<std::int32_t>(hidden);
  w.put<double>(s.tower.slope);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(s.head));
  w.put<std::int32_t>(s.bce_target);
  w.put_array<double>(s.positive_weights);
  w.put<std::uint8_t>(s.listnet_logged ? 1 : 0);
  w.put_array<std::int64_t>(s.user_vocab);
  w.put_array<std::int64_t>(s.item_vocab);
  data::put_layout(w, ckpt.layout);
  w.put_string(ckpt.fingerprint);
  w.put<double>(ckpt.best_metric);
  w.put<std::int32_t>(ckpt.best_epoch);
  const auto params = ckpt.model.parameters();
  w.put<std::uint64_t>(params.size());
  for (const auto* p : params) {
    w.put_string(p->name);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(p->value.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(p->value.cols()));
    w.put_array<double>(std::span<const double>(p->value.data(), static_cast<std::size_t>(p->value.size())));
  }
  return w.bytes();
}

Checkpoint deserialize_checkpoint(std::string bytes, const std::string& source) {
  io::BinaryReader r(std::move(bytes), source);
  r.expect_magic(kCheckpointMagic);
  if (r.get<std::uint32_t>() != kCheckpointVersion) r.fail("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.config_echo = r.get_string();
  ckpt.config_hash = r.get<std::uint64_t>();
  if (ckpt.config_hash != io::fnv1a64(ckpt.config_echo)) r.fail("config hash mismatch");
  model::ModelSpec s;
  const auto kind = r.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(model::ModelKind::kNsb)) r.fail("unknown model kind");
  s.kind = static_cast<model::ModelKind>(kind);
  s.T = r.get<std::int32_t>();
  s.thresholds = r.get_array<double>();
  s.gamma = r.get<double>();
  s.clip_floor = r.get<double>();
  s.embedding_dim = r.get<std::int32_t>();
  const auto hidden = r.get_array<std::int32_t>();
  s.tower.hidden_sizes.assign(hidden.begin(), hidden.end());
  s.tower.slope = r.get<double>();
  const auto head = r.get<std::uint8_t>();
  if (head > 1) r.fail("unknown head mode");
  s.head = static_cast<baselines::HeadMode>(head);
  s.bce_target = r.get<std::int32_t>();
  s.positive_weights = r.get_array<double>();
  s.listnet_logged = r.get<std::uint8_t>() != 0;
  s.user_vocab = r.get_array<std::int64_t>();
  s.item_vocab = r.get_array<std::int64_t>();
  ckpt.layout = data::get_layout(r);
  ckpt.fingerprint = r.get_string();
  ckpt.best_metric = r.get<double>();
  ckpt.best_epoch = r.get<std::int32_t>();
  ckpt.model = model::Model(s, 0);
  auto params = ckpt.model.parameters();
  if (r.get<std::uint64_t>() != params.size()) r.fail("parameter count mismatch");
  for (auto* p : params) {
    if (r.get_string() != p->name) r.fail("unexpected parameter order at '" + p->name + "'");
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    const auto v = r.get_array<double>();
    if (static_cast<Eigen::Index>(rows) != p->value.rows() ||
        static_cast<Eigen::Index>(cols) != p->value.cols() || v.size() != rows * cols) {
      r.fail("shape mismatch for '" + p->name + "'");
    }
    std::copy(v.begin(), v.end(), p->value.data());
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_file(path), path.string());
}

}  // namespace gnolr::training
