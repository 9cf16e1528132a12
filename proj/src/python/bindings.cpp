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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gnolr/config.hpp"
#include "gnolr/errors.hpp"
#include "gnolr/eval.hpp"
#include "gnolr/feedback_ordinal.hpp"
#include "gnolr/gnolr_loss.hpp"
#include "gnolr/synthetic.hpp"
#include "gnolr/training.hpp"

namespace py = pybind11;
using namespace gnolr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const tensor::Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), out.mutable_data());
  return out;
}

loss::GnolrHyper hyper_of(std::vector<double> thresholds, double gamma, double clip_floor) {
  loss::GnolrHyper h;
  h.thresholds = ordinal::ThresholdSet(std::move(thresholds));
  h.gamma = gamma;
  h.clip_floor = clip_floor;
  h.validate();
  return h;
}

std::vector<ordinal::OrdinalLabel> labels_of(const std::vector<int>& ks) {
  std::vector<ordinal::OrdinalLabel> out;
  out.reserve(ks.size());
  for (int k : ks) out.push_back(ordinal::OrdinalLabel{k});
  return out;
}

const data::Split& split_of(const data::DatasetBundle& b, const std::string& name) {
  return b.split(name);
}

py::dict report_dict(const eval::MetricReport& r) {
  py::dict metrics;
  for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
  py::dict info;
  for (const auto& [k, v] : r.info) info[py::str(k)] = v;
  py::dict out;
  out["metrics"] = metrics;
  out["info"] = info;
  return out;
}

}  // namespace

PYBIND11_MODULE(_gnolr, m) {
  m.doc() = "Multi-feedback ordinal recommendation engine";

  auto base = py::register_exception<Error>(m, "GnolrError");
  auto usage = py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", usage.ptr());
  py::register_exception<IngestionError>(m, "IngestionError", usage.ptr());
  py::register_exception<ThresholdError>(m, "ThresholdError", base.ptr());
  py::register_exception<MetricError>(m, "MetricError", base.ptr());

  // ordinal labels and thresholds
  m.def("map_to_ordinal", [](const std::vector<std::uint8_t>& bits) {
    return ordinal::map_to_ordinal(bits, static_cast<int>(bits.size())).k;
  }, py::arg("bits"));
  m.def("remap_for_subtask", [](int k, int t, int T) {
    return ordinal::remap_for_subtask(ordinal::OrdinalLabel{k}, t, T).k;
  }, py::arg("k"), py::arg("t"), py::arg("T"));
  m.def("thresholds_from_counts", [](std::int64_t total, const std::vector<std::int64_t>& above) {
    const auto a = ordinal::thresholds_from_counts(total, above);
    return std::vector<double>(a.values().begin(), a.values().end());
  }, py::arg("total"), py::arg("count_above"));
  m.def("estimate_thresholds", [](const std::vector<int>& ks, int T) {
    const auto labels = labels_of(ks);
    const auto a = ordinal::estimate_thresholds(labels, T);
    return std::vector<double>(a.values().begin(), a.values().end());
  }, py::arg("labels"), py::arg("T"));

  // losses
  m.def("category_distribution", [](const std::vector<double>& kernels, std::vector<double> thresholds,
                                     double gamma) {
    return loss::category_distribution(kernels, hyper_of(std::move(thresholds), gamma, 1e-6)).probs;
  }, py::arg("kernels"), py::arg("thresholds"), py::arg("gamma"));
  m.def("gnolr_loss", [](int k, const std::vector<double>& kernels, std::vector<double> thresholds,
                         double gamma, double clip_floor) {
    const auto g = loss::gnolr_total_loss_grad(ordinal::OrdinalLabel{k}, kernels,
                                               hyper_of(std::move(thresholds), gamma, clip_floor));
    return py::make_tuple(g.loss, g.d_kernels);
  }, py::arg("k"), py::arg("kernels"), py::arg("thresholds"), py::arg("gamma"),
     py::arg("clip_floor") = 1e-6, "Loss and gradient w.r.t. the nested kernels.");
  m.def("task_score", [](int c, const std::vector<double>& kernels, std::vector<double> thresholds,
                         double gamma) {
    return loss::task_score(c, kernels, hyper_of(std::move(thresholds), gamma, 1e-6));
  }, py::arg("c"), py::arg("kernels"), py::arg("thresholds"), py::arg("gamma"));
  m.def("listnet_loss", [](const std::vector<double>& logits, const std::vector<std::uint8_t>& positive,
                           bool logged) {
    const auto r = loss::listnet_from_logits(logits, positive, logged);
    return py::make_tuple(r.loss, r.d_logits);
  }, py::arg("logits"), py::arg("positive"), py::arg("logged") = true);
  m.def("bce_loss", &loss::bce_loss, py::arg("logit"), py::arg("label"),
        py::arg("positive_weight") = 1.0);

  // metrics and retrieval
  m.def("auc", [](const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
    return eval::auc(s, y);
  }, py::arg("scores"), py::arg("labels"));
  m.def("gauc", [](const std::vector<double>& s, const std::vector<std::uint8_t>& y,
                   const std::vector<std::int64_t>& users, const std::string& weighting) {
    if (s.size() != y.size() || s.size() != users.size()) throw ArgumentError("gauc: length mismatch");
    std::vector<eval::ScoredSample> samples(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) samples[i] = {s[i], y[i], users[i], -1};
    if (weighting != "pairs" && weighting != "uniform") {
      throw ArgumentError("weighting must be 'pairs' or 'uniform'");
    }
    return eval::gauc(samples, weighting == "pairs" ? eval::GaucWeighting::kPairs
                                                    : eval::GaucWeighting::kUniform);
  }, py::arg("scores"), py::arg("labels"), py::arg("users"), py::arg("weighting") = "pairs");
  m.def("topk", [](Array query, Array items, std::vector<std::string> ids, std::size_t k) {
    if (items.ndim() != 2 || query.ndim() != 1 || query.shape(0) != items.shape(1)) {
      throw DimensionError("topk: expected query (D,) and items (N, D)");
    }
    tensor::Matrix rows(items.shape(0), items.shape(1));
    std::copy(items.data(), items.data() + items.size(), rows.data());
    if (ids.empty()) {
      for (Eigen::Index i = 0; i < rows.rows(); ++i) ids.push_back(std::to_string(i));
    }
    const eval::RetrievalIndex index(std::move(ids), std::move(rows));
    const auto got = eval::topk_retrieve(
        std::span<const double>(query.data(), static_cast<std::size_t>(query.size())), index, k);
    return got;
  }, py::arg("query"), py::arg("items"), py::arg("ids") = std::vector<std::string>{}, py::arg("k") = 10,
     "Row indices of the k nearest items (Euclidean), ties by id.");
  m.def("recall_at_k", [](const std::vector<std::size_t>& retrieved, const std::vector<std::size_t>& pos) {
    return eval::recall_at_k(retrieved, pos);
  }, py::arg("retrieved"), py::arg("positives"));

  // pipeline
  py::class_<config::RunConfig>(m, "RunConfig")
      .def_property_readonly("csv", [](const config::RunConfig& c) { return c.csv; })
      .def_property_readonly("bundle", [](const config::RunConfig& c) { return c.bundle; })
      .def_property_readonly("checkpoint", [](const config::RunConfig& c) { return c.checkpoint; })
      .def_property_readonly("kind", [](const config::RunConfig& c) {
        return std::string(model::to_string(c.train.kind));
      })
      .def_property_readonly("runs", [](const config::RunConfig& c) { return c.runs; })
      .def_property_readonly("echo", [](const config::RunConfig& c) { return c.train.echo(); });
  m.def("load_config", &config::load_run_config, py::arg("path"),
        py::arg("overrides") = std::vector<std::string>{});

  py::class_<data::DatasetBundle>(m, "Bundle")
      .def_property_readonly("T", &data::DatasetBundle::T)
      .def_property_readonly("feedback", [](const data::DatasetBundle& b) { return b.schema.ordered_names(); })
      .def_property_readonly("users", [](const data::DatasetBundle& b) { return b.users; })
      .def_property_readonly("items", [](const data::DatasetBundle& b) { return b.items; })
      .def("size", [](const data::DatasetBundle& b, const std::string& split) {
        return split_of(b, split).size();
      }, py::arg("split"))
      .def("labels", [](const data::DatasetBundle& b, const std::string& split) {
        std::vector<int> ks;
        for (const auto& l : split_of(b, split).labels) ks.push_back(l.k);
        return ks;
      }, py::arg("split"))
      .def("fingerprint", &data::DatasetBundle::fingerprint)
      .def("save", [](const data::DatasetBundle& b, const std::filesystem::path& p) { data::write_bundle(p, b); },
           py::arg("path"));
  m.def("prepare", [](const config::RunConfig& rc) {
    return data::prepare_bundle(data::read_interactions_csv(rc.csv, rc.ingest), rc.prepare);
  }, py::arg("config"), "Ingest the configured CSV into a bundle.");
  m.def("read_bundle", &data::read_bundle, py::arg("path"));

  py::class_<training::Checkpoint>(m, "Checkpoint")
      .def_property_readonly("kind", [](const training::Checkpoint& c) {
        return std::string(model::to_string(c.model.spec().kind));
      })
      .def_property_readonly("thresholds", [](const training::Checkpoint& c) { return c.model.spec().thresholds; })
      .def_property_readonly("best_metric", [](const training::Checkpoint& c) { return c.best_metric; })
      .def_property_readonly("best_epoch", [](const training::Checkpoint& c) { return c.best_epoch; })
      .def_property_readonly("config", [](const training::Checkpoint& c) { return c.config_echo; })
      .def("scores", [](const training::Checkpoint& c, const data::DatasetBundle& b, const std::string& split) {
        const auto& s = split_of(b, split);
        return to_numpy(c.model.scores(s.user_features, s.item_features));
      }, py::arg("bundle"), py::arg("split") = "test", "n x T matrix; column c-1 scores level c.")
      .def("embeddings", [](const training::Checkpoint& c, const data::DatasetBundle& b, const std::string& side,
                            int set) {
        if (side != "user" && side != "item") throw ArgumentError("side must be 'user' or 'item'");
        const auto s = side == "user" ? encoders::Side::kUser : encoders::Side::kItem;
        return to_numpy(c.model.embeddings(s, eval::entity_features(b, s), set));
      }, py::arg("bundle"), py::arg("side"), py::arg("set") = 0)
      .def("evaluate", [](const training::Checkpoint& c, const data::DatasetBundle& b, const std::string& split,
                          std::vector<std::size_t> ks) {
        eval::EvalOptions opts;
        opts.recall_k = std::move(ks);
        return report_dict(eval::evaluate_model(c.model, b, split_of(b, split), opts));
      }, py::arg("bundle"), py::arg("split") = "test",
         py::arg("recall_k") = std::vector<std::size_t>{5, 10, 15, 20})
      .def("save", [](const training::Checkpoint& c, const std::filesystem::path& p) {
        training::save_checkpoint(p, c);
      }, py::arg("path"));
  m.def("load_checkpoint", &training::load_checkpoint, py::arg("path"));

  m.def("train", [](const data::DatasetBundle& b, const config::RunConfig& rc) {
    std::vector<std::string> log;
    training::TrainResult res;
    {
      py::gil_scoped_release release;
      res = training::train(b, rc.train, [&](const std::string& line) { log.push_back(line); });
    }
    if (res.diverged) throw DivergenceError(res.divergence);
    return py::make_tuple(std::move(res.checkpoint), log);
  }, py::arg("bundle"), py::arg("config"), "Returns (checkpoint, epoch log lines).");
  m.def("multi_run", [](const data::DatasetBundle& b, const config::RunConfig& rc, int runs) {
    eval::MetricReport rep;
    {
      py::gil_scoped_release release;
      rep = training::multi_run(b, rc.train, runs, rc.eval);
    }
    return report_dict(rep);
  }, py::arg("bundle"), py::arg("config"), py::arg("runs"));

  m.def("write_synthetic_csv", [](const std::filesystem::path& path, int users, int items, int samples_per_user,
                                  int feedback, std::uint64_t seed) {
    synthetic::SyntheticOptions o;
    o.n_users = users;
    o.n_items = items;
    o.samples_per_user = samples_per_user;
    o.num_feedback = feedback;
    o.seed = seed;
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write '" + path.string() + "'");
    synthetic::write_csv(out, synthetic::generate(o));
  }, py::arg("path"), py::arg("users") = 300, py::arg("items") = 200, py::arg("samples_per_user") = 60,
     py::arg("feedback") = 2, py::arg("seed") = 1);
}
