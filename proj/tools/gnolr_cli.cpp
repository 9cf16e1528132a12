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

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gnolr/config.hpp"
#include "gnolr/errors.hpp"
#include "gnolr/eval.hpp"
#include "gnolr/synthetic.hpp"
#include "gnolr/training.hpp"

namespace {

using namespace gnolr;

enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

Level log_level() {
  const char* v = std::getenv("GNOLR_LOG");
  if (v == nullptr) return Level::kInfo;
  const std::string s(v);
  if (s == "quiet") return Level::kQuiet;
  if (s == "debug") return Level::kDebug;
  if (s == "info" || s.empty()) return Level::kInfo;
  throw ConfigError("GNOLR_LOG must be quiet, info or debug, got '" + s + "'");
}

void info(const std::string& line) {
  if (log_level() >= Level::kInfo) std::cerr << line << '\n';
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = 0;

  config::RunConfig load() const {
    std::vector<std::string> all = overrides;
    if (seed >= 0) all.push_back("train.seed=" + std::to_string(seed));
    if (threads > 0) all.push_back("train.threads=" + std::to_string(threads));
    config::RunConfig rc = config::load_run_config(config, all);
    info("seed=" + std::to_string(rc.train.seed));
    return rc;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "Run configuration (INI)")->required();
  cmd->add_option("--set", c.overrides, "Override, section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Root seed");
  cmd->add_option("--threads", c.threads, "Worker threads");
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " path is not configured");
  if (!std::filesystem::exists(p)) {
    throw ConfigError(what + " '" + p.string() + "' does not exist");
  }
}

data::DatasetBundle load_bundle(const config::RunConfig& rc) {
  require_file(rc.bundle, "bundle");
  return data::read_bundle(rc.bundle);
}

training::Checkpoint load_compatible(const std::filesystem::path& path,
                                     const data::DatasetBundle& bundle) {
  require_file(path, "checkpoint");
  training::Checkpoint ckpt = training::load_checkpoint(path);
  if (ckpt.model.spec().T != bundle.T()) {
    throw ConfigError("checkpoint models " + std::to_string(ckpt.model.spec().T) +
                      " feedback types but the bundle has " + std::to_string(bundle.T()));
  }
  if (ckpt.fingerprint != bundle.fingerprint()) {
    throw ConfigError("checkpoint was trained on a different feature layout");
  }
  return ckpt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_prepare(const Common& c) {
  const auto rc = c.load();
  if (rc.csv.empty()) throw ConfigError("data.csv is not configured");
  if (!std::filesystem::exists(rc.csv)) {
    throw IngestionError("CSV '" + rc.csv.string() + "' does not exist");
  }
  if (rc.bundle.empty()) throw ConfigError("data.bundle is not configured");
  const auto raw = data::read_interactions_csv(rc.csv, rc.ingest);
  const auto b = data::prepare_bundle(raw, rc.prepare);
  data::write_bundle(rc.bundle, b);

  std::ostringstream out;
  const std::size_t total = b.train.size() + b.validation.size() + b.test.size();
  out << "samples=" << total << '\n'
      << "train=" << b.train.size() << '\n'
      << "validation=" << b.validation.size() << '\n'
      << "test=" << b.test.size() << '\n'
      << "users=" << b.users.size() << '\n'
      << "items=" << b.items.size() << '\n';
  const auto names = b.schema.ordered_names();
  for (int rank = 0; rank < b.T(); ++rank) {
    std::int64_t pos = 0;
    for (const data::Split* s : {&b.train, &b.validation, &b.test}) {
      for (std::size_t r = 0; r < s->size(); ++r) pos += s->bit(r, rank);
    }
    out << "positives." << names[static_cast<std::size_t>(rank)] << '=' << pos << '\n'
        << "fraction." << names[static_cast<std::size_t>(rank)] << '='
        << fixed(total > 0 ? static_cast<double>(pos) / static_cast<double>(total) : 0.0, 6)
        << '\n';
  }
  out << "bundle=" << rc.bundle.string() << '\n';
  std::cout << out.str();
  return 0;
}

int cmd_thresholds(const Common& c, const std::string& population, long long total,
                   const std::vector<long long>& above) {
  ordinal::ThresholdSet a;
  std::vector<std::string> names;
  std::string pop = population;
  if (total > 0 || !above.empty()) {
    if (total <= 0 || above.empty()) throw ConfigError("--total and --above go together");
    a = ordinal::thresholds_from_counts(total, std::vector<std::int64_t>(above.begin(), above.end()));
    pop = "counts";
  } else {
    auto rc = c.load();
    if (!population.empty()) {
      if (population != "train" && population != "all") {
        throw ConfigError("--population must be train or all");
      }
      rc.train.population = population == "all" ? training::ThresholdPopulation::kAll
                                                 : training::ThresholdPopulation::kTrain;
    }
    pop = rc.train.population == training::ThresholdPopulation::kAll ? "all" : "train";
    const auto b = load_bundle(rc);
    rc.train.thresholds.clear();
    a = training::resolve_thresholds(b, rc.train);
    names = b.schema.ordered_names();
  }
  std::ostringstream out;
  out << "# population=" << pop << '\n';
  std::string list = "[";
  for (int i = 1; i <= a.size(); ++i) {
    const std::string v = fixed(a.threshold(i), 4);
    out << "# a_" << i << " = " << v;
    if (static_cast<std::size_t>(i - 1) < names.size()) out << "  (" << names[i - 1] << ")";
    out << '\n';
    list += (i > 1 ? ", " : "") + v;
  }
  out << "[model]\nthresholds = " << list << "]\n";
  std::cout << out.str();
  return 0;
}

int cmd_train(const Common& c) {
  const auto rc = c.load();
  if (rc.checkpoint.empty()) throw ConfigError("train.checkpoint is not configured");
  const auto b = load_bundle(rc);
  const auto result = training::train(b, rc.train, info);
  training::save_checkpoint(rc.checkpoint, result.checkpoint);
  const auto& ck = result.checkpoint;
  std::cout << "checkpoint=" << rc.checkpoint.string() << '\n'
            << "best_epoch=" << ck.best_epoch << '\n'
            << "best_val_auc_t" << training::selection_target(ck.model.spec()) << '='
            << (std::isnan(ck.best_metric) ? std::string("nan") : fixed(ck.best_metric, 6)) << '\n';
  if (result.diverged) {
    std::cerr << "error: " << result.divergence << " (kept the last good checkpoint)\n";
    return 1;
  }
  return 0;
}

void emit_report(const config::RunConfig& rc, const eval::MetricReport& rep) {
  std::cout << rep.flat();
  if (!rc.report.empty()) io::write_file_atomic(rc.report, rep.json());
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::vector<std::size_t>& ks) {
  auto rc = c.load();
  if (!ks.empty()) rc.eval.recall_k = ks;
  const auto b = load_bundle(rc);
  const auto ckpt = load_compatible(checkpoint.empty() ? rc.checkpoint : std::filesystem::path(checkpoint), b);
  emit_report(rc, eval::evaluate_model(ckpt.model, b, b.split(rc.eval_split), rc.eval));
  return 0;
}

int cmd_multirun(const Common& c, int runs) {
  auto rc = c.load();
  const auto b = load_bundle(rc);
  emit_report(rc, training::multi_run(b, rc.train, runs > 0 ? runs : rc.runs, rc.eval, info));
  return 0;
}

int row_subvectors(const model::Model& m) {
  switch (m.spec().kind) {
    case model::ModelKind::kGnolr:
    case model::ModelKind::kGnolrListwise:
    case model::ModelKind::kGnolrV1:
      return m.spec().T;
    default:
      return 1;
  }
}

int cmd_export(const Common& c, const std::string& checkpoint, const std::string& out_dir) {
  const auto rc = c.load();
  const auto b = load_bundle(rc);
  const auto ckpt = load_compatible(checkpoint.empty() ? rc.checkpoint : std::filesystem::path(checkpoint), b);
  const auto& m = ckpt.model;
  std::filesystem::create_directories(out_dir);
  const auto users = eval::entity_features(b, encoders::Side::kUser);
  const auto items = eval::entity_features(b, encoders::Side::kItem);
  for (int set = 0; set < m.num_embedding_sets(); ++set) {
    const std::string suffix = m.num_embedding_sets() == 1 ? "" : ".set" + std::to_string(set + 1);
    const auto up = std::filesystem::path(out_dir) / ("users" + suffix + ".tsv");
    const auto ip = std::filesystem::path(out_dir) / ("items" + suffix + ".tsv");
    eval::write_embeddings(up, b.users, m.embeddings(encoders::Side::kUser, users, set),
                           row_subvectors(m));
    eval::write_embeddings(ip, b.items, m.embeddings(encoders::Side::kItem, items, set),
                           row_subvectors(m));
    std::cout << "users=" << up.string() << "\nitems=" << ip.string() << '\n';
  }
  return 0;
}

std::string retrieve_tsv(const eval::RetrievalIndex& users, const eval::RetrievalIndex& items,
                         const std::vector<std::string>& query_ids, std::size_t k) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < users.size(); ++r) row_of.emplace(users.ids()[r], r);
  std::string out;
  for (const auto& id : query_ids) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) throw ArgumentError("unknown user '" + id + "'");
    const auto row = users.rows().row(static_cast<Eigen::Index>(it->second));
    const auto top = eval::topk_retrieve(
        std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), items, k);
    for (std::size_t r = 0; r < top.size(); ++r) {
      out += id + '\t' + items.ids()[top[r]] + '\t' + std::to_string(r + 1) + '\n';
    }
  }
  return out;
}

int cmd_retrieve(const Common& c, const std::string& checkpoint, std::size_t k, int target,
                 const std::string& users_file, const std::string& user_emb,
                 const std::string& item_emb, const std::string& out) {
  std::vector<std::string> query;
  if (!users_file.empty()) {
    require_file(users_file, "users file");
    std::istringstream in(io::read_file(users_file));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) query.push_back(line);
    }
  }
  if (!user_emb.empty() || !item_emb.empty()) {
    require_file(user_emb, "user embedding file");
    require_file(item_emb, "item embedding file");
    const auto u = eval::read_embeddings(user_emb);
    const auto i = eval::read_embeddings(item_emb);
    if (u.index.dim() != i.index.dim()) throw ConfigError("user and item embeddings differ in dimension");
    if (query.empty()) query = u.index.ids();
    write_text(out, retrieve_tsv(u.index, i.index, query, k));
    return 0;
  }
  const auto rc = c.load();
  const auto b = load_bundle(rc);
  const auto ckpt = load_compatible(checkpoint.empty() ? rc.checkpoint : std::filesystem::path(checkpoint), b);
  const int T = b.T();
  if (target == 0) target = T;
  if (target < 1 || target > T) throw ConfigError("--target must lie in 1.." + std::to_string(T));
  const int set = ckpt.model.embedding_set_for_target(target);
  const eval::RetrievalIndex users(
      b.users, ckpt.model.embeddings(encoders::Side::kUser,
                                     eval::entity_features(b, encoders::Side::kUser), set));
  const eval::RetrievalIndex items(
      b.items, ckpt.model.embeddings(encoders::Side::kItem,
                                     eval::entity_features(b, encoders::Side::kItem), set));
  if (query.empty()) {
    std::set<std::int64_t> seen(b.test.user.begin(), b.test.user.end());
    for (auto u : seen) query.push_back(b.users[static_cast<std::size_t>(u)]);
    std::sort(query.begin(), query.end(), eval::id_less);
  }
  write_text(out, retrieve_tsv(users, items, query, k));
  return 0;
}

int cmd_angles(const Common& c, const std::string& checkpoint, int target, const std::string& out) {
  const auto rc = c.load();
  const auto b = load_bundle(rc);
  const auto ckpt = load_compatible(checkpoint.empty() ? rc.checkpoint : std::filesystem::path(checkpoint), b);
  const int T = b.T();
  if (target == 0) target = T;
  if (target < 1 || target > T) throw ConfigError("--target must lie in 1.." + std::to_string(T));
  const auto& split = b.split(rc.eval_split);
  const int set = ckpt.model.embedding_set_for_target(target);
  const auto u = ckpt.model.embeddings(encoders::Side::kUser, split.user_features, set);
  const auto i = ckpt.model.embeddings(encoders::Side::kItem, split.item_features, set);
  std::vector<std::uint8_t> labels(split.size());
  for (std::size_t r = 0; r < split.size(); ++r) labels[r] = split.labels[r].k > target ? 1 : 0;
  std::ostringstream csv;
  eval::write_angle_csv(csv, eval::angle_histogram(u, i, labels));
  write_text(out, csv.str());
  return 0;
}

int cmd_synth(const synthetic::SyntheticOptions& o, const std::string& out) {
  std::ostringstream csv;
  synthetic::write_csv(csv, synthetic::generate(o));
  write_text(out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNOLR multi-feedback recommendation engine"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;
  std::string out;
  std::string population;
  long long total = 0;
  std::vector<long long> above;
  std::vector<std::size_t> ks;
  std::size_t k = 10;
  int target = 0;
  int runs = 0;
  std::string out_dir = "embeddings";
  std::string users_file;
  std::string user_emb;
  std::string item_emb;
  synthetic::SyntheticOptions synth;

  auto* prepare = app.add_subcommand("prepare", "Ingest the CSV and write the bundle cache");
  add_common(prepare, common);

  auto* thresholds = app.add_subcommand("thresholds", "Estimate ordinal thresholds");
  thresholds->add_option("-c,--config", common.config, "Run configuration (INI)");
  thresholds->add_option("--set", common.overrides, "Override, section.key=value");
  thresholds->add_option("--population", population, "train or all");
  thresholds->add_option("--total", total, "Sample count (instead of a bundle)");
  thresholds->add_option("--above", above, "Samples above each category, c = 1..T")->delimiter(',');

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(train, common);

  auto* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(evaluate, common);
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint (default: train.checkpoint)");
  evaluate->add_option("--k", ks, "Recall cut-offs, e.g. 5,10,15,20")->delimiter(',');

  auto* multirun = app.add_subcommand("multirun", "Train and test over consecutive seeds");
  add_common(multirun, common);
  multirun->add_option("--runs", runs, "Number of seeds (default: eval.runs)");

  auto* exporter = app.add_subcommand("export", "Write user and item embedding TSVs");
  add_common(exporter, common);
  exporter->add_option("--checkpoint", checkpoint, "Checkpoint (default: train.checkpoint)");
  exporter->add_option("--out-dir", out_dir, "Output directory");

  auto* retrieve = app.add_subcommand("retrieve", "Exact top-K retrieval as TSV");
  retrieve->add_option("-c,--config", common.config, "Run configuration (INI)");
  retrieve->add_option("--set", common.overrides, "Override, section.key=value");
  retrieve->add_option("--seed", common.seed, "Root seed");
  retrieve->add_option("--threads", common.threads, "Worker threads");
  retrieve->add_option("--checkpoint", checkpoint, "Checkpoint (default: train.checkpoint)");
  retrieve->add_option("--k", k, "Items per user");
  retrieve->add_option("--target", target, "Feedback level c (default: T)");
  retrieve->add_option("--users", users_file, "File with one user id per line");
  retrieve->add_option("--user-emb", user_emb, "User embedding TSV");
  retrieve->add_option("--item-emb", item_emb, "Item embedding TSV");
  retrieve->add_option("-o,--out", out, "Output file (default: stdout)");

  auto* angles = app.add_subcommand("angles", "User-item angle histogram CSV");
  add_common(angles, common);
  angles->add_option("--checkpoint", checkpoint, "Checkpoint (default: train.checkpoint)");
  angles->add_option("--target", target, "Feedback level c (default: T)");
  angles->add_option("-o,--out", out, "Output file (default: stdout)");

  auto* synthc = app.add_subcommand("synth", "Write a synthetic multi-feedback CSV");
  synthc->add_option("--users", synth.n_users);
  synthc->add_option("--items", synth.n_items);
  synthc->add_option("--samples-per-user", synth.samples_per_user);
  synthc->add_option("--feedback", synth.num_feedback, "Number of feedback levels");
  synthc->add_option("--latent-dim", synth.latent_dim);
  synthc->add_option("--clusters", synth.n_clusters, "Values of uf_cluster / if_cluster");
  synthc->add_option("--noise", synth.noise, "Std of the per-level affinity noise");
  synthc->add_option("--seed", synth.seed);
  synthc->add_option("-o,--out", out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    log_level();
    if (*prepare) return cmd_prepare(common);
    if (*thresholds) return cmd_thresholds(common, population, total, above);
    if (*train) return cmd_train(common);
    if (*evaluate) return cmd_eval(common, checkpoint, ks);
    if (*multirun) return cmd_multirun(common, runs);
    if (*exporter) return cmd_export(common, checkpoint, out_dir);
    if (*retrieve) {
      return cmd_retrieve(common, checkpoint, k, target, users_file, user_emb, item_emb, out);
    }
    if (*angles) return cmd_angles(common, checkpoint, target, out);
    if (*synthc) return cmd_synth(synth, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
