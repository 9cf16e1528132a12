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

#include "gnolr/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gnolr/binary_io.hpp"
#include "gnolr/errors.hpp"

namespace gnolr::eval {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw MetricError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double s : scores) {
    if (!std::isfinite(s)) throw MetricError("auc: non-finite score");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Count (positive, negative) pairs ordered correctly, ties worth one half.
  double correct = 0.0;
  std::int64_t neg_below = 0;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t pos_here = 0;
    std::int64_t neg_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? pos_here : neg_here) += 1;
      ++j;
    }
    correct += static_cast<double>(pos_here) * static_cast<double>(neg_below) +
               0.5 * static_cast<double>(pos_here) * static_cast<double>(neg_here);
    neg_below += neg_here;
    n_pos += pos_here;
    n_neg += neg_here;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw MetricError("auc is undefined for single-class input");
  return correct / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc(std::span<const ScoredSample> samples) {
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (const auto& x : samples) {
    s.push_back(x.score);
    y.push_back(x.label);
  }
  return auc(s, y);
}

double gauc(std::span<const ScoredSample> samples, GaucWeighting weighting) {
  std::map<std::int64_t, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < samples.size(); ++i) by_user[samples[i].user].push_back(i);
  double num = 0.0;
  double den = 0.0;
  for (const auto& [user, rows] : by_user) {
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    std::int64_t pos = 0;
    for (std::size_t r : rows) {
      s.push_back(samples[r].score);
      y.push_back(samples[r].label);
      pos += samples[r].label != 0 ? 1 : 0;
    }
    const auto neg = static_cast<std::int64_t>(rows.size()) - pos;
    if (pos == 0 || neg == 0) continue;
    const double w = weighting == GaucWeighting::kPairs
                         ? static_cast<double>(pos) * static_cast<double>(neg)
                         : 1.0;
    num += w * auc(s, y);
    den += w;
  }
  if (den == 0.0) throw MetricError("gauc: no user has both positive and negative samples");
  return num / den;
}

bool id_less(const std::string& a, const std::string& b) {
  std::int64_t x = 0;
  std::int64_t y = 0;
  const auto rx = std::from_chars(a.data(), a.data() + a.size(), x);
  const auto ry = std::from_chars(b.data(), b.data() + b.size(), y);
  const bool nx = !a.empty() && rx.ec == std::errc() && rx.ptr == a.data() + a.size();
  const bool ny = !b.empty() && ry.ec == std::errc() && ry.ptr == b.data() + b.size();
  if (nx && ny) return x != y ? x < y : a < b;
  if (nx != ny) return nx;  // numbers first
  return a < b;
}

RetrievalIndex::RetrievalIndex(std::vector<std::string> ids, Matrix rows)
    : ids_(std::move(ids)), rows_(std::move(rows)) {
  if (static_cast<Eigen::Index>(ids_.size()) != rows_.rows()) {
    throw DimensionError("retrieval index: one id per row required");
  }
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return id_less(ids_[a], ids_[b]); });
  id_rank_.assign(ids_.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) id_rank_[order[i]] = i;
}

void RetrievalIndex::check_norms(double expected_squared_norm, double tol) const {
  for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
    const double sq = rows_.row(r).squaredNorm();
    if (std::abs(sq - expected_squared_norm) > tol) {
      throw MetricError("index row '" + ids_[static_cast<std::size_t>(r)] +
                        "' has squared norm " + std::to_string(sq) + ", expected " +
                        std::to_string(expected_squared_norm));
    }
  }
}

std::vector<std::size_t> topk_retrieve(std::span<const double> user, const RetrievalIndex& index,
                                       std::size_t K) {
  if (static_cast<Eigen::Index>(user.size()) != index.dim()) {
    throw DimensionError("query has dimension " + std::to_string(user.size()) + ", index " +
                         std::to_string(index.dim()));
  }
  const std::size_t n = index.size();
  K = std::min(K, n);
  if (K == 0) return {};
  const Eigen::Map<const tensor::RowVector> q(user.data(), static_cast<Eigen::Index>(user.size()));
  std::vector<double> dist(n);
  for (std::size_t r = 0; r < n; ++r) {
    dist[r] = (index.rows().row(static_cast<Eigen::Index>(r)) - q).squaredNorm();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(K), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dist[a] != dist[b]) return dist[a] < dist[b];
                      return index.id_rank(a) < index.id_rank(b);
                    });
  order.resize(K);
  return order;
}

double recall_at_k(std::span<const std::size_t> retrieved, std::span<const std::size_t> positives) {
  if (positives.empty()) throw MetricError("recall: empty positive set");
  std::vector<std::size_t> pos(positives.begin(), positives.end());
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  std::size_t hit = 0;
  for (std::size_t r : retrieved) {
    if (std::binary_search(pos.begin(), pos.end(), r)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(pos.size());
}

AngleHistogram angle_histogram(const Matrix& users, const Matrix& items,
                               std::span<const std::uint8_t> labels) {
  if (users.rows() != items.rows() || users.cols() != items.cols() ||
      static_cast<std::size_t>(users.rows()) != labels.size()) {
    throw DimensionError("angle histogram: users, items and labels must align");
  }
  AngleHistogram hist{};
  for (Eigen::Index r = 0; r < users.rows(); ++r) {
    const double nu = users.row(r).norm();
    const double ni = items.row(r).norm();
    const double cosv =
        (nu > 0.0 && ni > 0.0) ? users.row(r).dot(items.row(r)) / (nu * ni) : 0.0;
    const double deg = std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    const int bin = std::clamp(static_cast<int>(std::floor(deg)), 0, 179);
    auto& b = hist[static_cast<std::size_t>(bin)];
    (labels[static_cast<std::size_t>(r)] != 0 ? b.pos : b.neg) += 1;
  }
  return hist;
}

void write_angle_csv(std::ostream& out, const AngleHistogram& hist) {
  out << "bin_deg,pos,neg\n";
  for (std::size_t b = 0; b < hist.size(); ++b) {
    out << b << ',' << hist[b].pos << ',' << hist[b].neg << '\n';
  }
}

std::string MetricReport::flat() const {
  std::map<std::string, std::string> lines;
  for (const auto& [k, v] : metrics) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    lines[k] = buf;
  }
  for (const auto& [k, v] : info) lines[k] = v;
  std::string out;
  for (const auto& [k, v] : lines) out += k + "=" + v + "\n";
  return out;
}

std::string MetricReport::json() const {
  nlohmann::json root = nlohmann::json::object();
  for (const auto& [k, v] : metrics) {
    // "<metric>_t<c>[.<stat>]" nests as metric -> t<c> -> stat.
    std::vector<std::string> path;
    std::string head = k;
    std::string tail;
    if (const auto dot = k.find('.'); dot != std::string::npos) {
      head = k.substr(0, dot);
      tail = k.substr(dot + 1);
    }
    const auto cut = head.rfind("_t");
    const bool tagged = cut != std::string::npos && cut > 0 && cut + 2 < head.size() &&
                        head.find_first_not_of("0123456789", cut + 2) == std::string::npos;
    if (tagged) {
      path = {head.substr(0, cut), head.substr(cut + 1)};
    } else {
      path = {head};
    }
    if (!tail.empty()) path.push_back(tail);
    nlohmann::json* node = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
    (*node)[path.back()] = v;
  }
  for (const auto& [k, v] : info) root["info"][k] = v;
  return root.dump(2) + "\n";
}

encoders::IdMatrix entity_features(const data::DatasetBundle& bundle, encoders::Side side) {
  const bool user = side == encoders::Side::kUser;
  const std::size_t n = user ? bundle.users.size() : bundle.items.size();
  const auto cols = static_cast<Eigen::Index>(user ? bundle.user_columns.size()
                                                   : bundle.item_columns.size());
  encoders::IdMatrix out = encoders::IdMatrix::Zero(static_cast<Eigen::Index>(n), cols);
  std::vector<bool> seen(n, false);
  for (const data::Split* s : {&bundle.train, &bundle.validation, &bundle.test}) {
    const auto& entity = user ? s->user : s->item;
    const auto& feats = user ? s->user_features : s->item_features;
    for (std::size_t r = 0; r < s->size(); ++r) {
      const auto e = static_cast<std::size_t>(entity[r]);
      if (seen[e]) continue;
      seen[e] = true;
      out.row(static_cast<Eigen::Index>(e)) = feats.row(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

MetricReport evaluate_model(const model::Model& mdl, const data::DatasetBundle& bundle,
                            const data::Split& split, const EvalOptions& opts) {
  MetricReport report;
  const int T = mdl.spec().T;
  if (split.T != T) throw ConfigError("split and model disagree on the number of feedback types");
  const Matrix scores = mdl.scores(split.user_features, split.item_features, opts.threads);
  const auto names = bundle.schema.ordered_names();
  for (int c = 1; c <= T; ++c) {
    const std::string tag = "t" + std::to_string(c);
    if (static_cast<std::size_t>(c - 1) < names.size()) report.info["target_" + tag] = names[c - 1];
    std::vector<ScoredSample> samples(split.size());
    for (std::size_t r = 0; r < split.size(); ++r) {
      samples[r].score = scores(static_cast<Eigen::Index>(r), c - 1);
      samples[r].label = split.labels[r].k > c ? 1 : 0;
      samples[r].user = split.user[r];
    }
    try {
      report.metrics["auc_" + tag] = auc(samples);
    } catch (const MetricError&) {
      report.info["auc_" + tag] = "undefined";
    }
    if (opts.gauc) {
      try {
        report.metrics["gauc_" + tag] = gauc(samples, opts.gauc_weighting);
      } catch (const MetricError&) {
        report.info["gauc_" + tag] = "undefined";
      }
    }
  }
  if (!opts.recall || opts.recall_k.empty()) return report;

  for (int c = 1; c <= T; ++c) {
    const auto r = recall_for_target(mdl, bundle, split, c, mdl.embedding_set_for_target(c),
                                     opts.recall_k, opts.threads);
    if (r.empty()) continue;
    for (std::size_t j = 0; j < opts.recall_k.size(); ++j) {
      report.metrics["recall@" + std::to_string(opts.recall_k[j]) + "_t" + std::to_string(c)] =
          r[j];
    }
  }
  return report;
}

std::vector<double> recall_for_target(const model::Model& mdl, const data::DatasetBundle& bundle,
                                      const data::Split& split, int c, int set,
                                      std::span<const std::size_t> ks, int threads) {
  if (ks.empty()) return {};
  std::map<std::int64_t, std::vector<std::size_t>> positives;
  for (std::size_t r = 0; r < split.size(); ++r) {
    if (split.labels[r].k > c) {
      positives[split.user[r]].push_back(static_cast<std::size_t>(split.item[r]));
    }
  }
  if (positives.empty()) return {};
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  const Matrix user_emb =
      mdl.embeddings(encoders::Side::kUser, entity_features(bundle, encoders::Side::kUser), set);
  const RetrievalIndex index(
      bundle.items,
      mdl.embeddings(encoders::Side::kItem, entity_features(bundle, encoders::Side::kItem), set));
  std::vector<std::int64_t> users;
  for (const auto& [u, items] : positives) users.push_back(u);
  Matrix per_user(static_cast<Eigen::Index>(users.size()), static_cast<Eigen::Index>(ks.size()));
  encoders::parallel_for(users.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto row = user_emb.row(static_cast<Eigen::Index>(users[i]));
      const auto top = topk_retrieve(
          std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), index, k_max);
      const auto& pos = positives.at(users[i]);
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const std::size_t k = std::min(ks[j], top.size());
        per_user(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            recall_at_k(std::span<const std::size_t>(top.data(), k), pos);
      }
    }
  });
  std::vector<double> out(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    out[j] = per_user.col(static_cast<Eigen::Index>(j)).mean();
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const std::string> ids,
                      const Matrix& rows, int T) {
  if (static_cast<Eigen::Index>(ids.size()) != rows.rows()) {
    throw DimensionError("embedding export: one id per row required");
  }
  std::string out = "#gnolr-emb v1 dim=" + std::to_string(rows.cols()) +
                    " T=" + std::to_string(T) + "\n";
  char buf[40];
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r].find_first_of("\t\n\r") != std::string::npos) {
      throw FormatError("identifier '" + ids[r] + "' contains a tab or newline");
    }
    out += ids[r];
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      // Export precision is single: 9 significant digits round-trip a float.
      std::snprintf(buf, sizeof buf, "\t%.9g",
                    static_cast<double>(static_cast<float>(rows(static_cast<Eigen::Index>(r), c))));
      out += buf;
    }
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  const std::string src = path.string();
  if (!std::getline(in, line)) throw FormatError(src + ": empty embedding file");
  int dim = 0;
  EmbeddingFile file;
  if (std::sscanf(line.c_str(), "#gnolr-emb v1 dim=%d T=%d", &dim, &file.T) != 2 || dim < 1 ||
      file.T < 1) {
    throw FormatError(src + ": bad embedding header '" + line + "'");
  }
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(src + ":" + std::to_string(line_no) + ": no values");
    ids.push_back(line.substr(0, tab));
    int count = 0;
    while (tab != std::string::npos) {
      const std::size_t next = line.find('\t', tab + 1);
      const std::string field = line.substr(tab + 1, next == std::string::npos ? std::string::npos
                                                                               : next - tab - 1);
      float v = 0.0F;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw FormatError(src + ":" + std::to_string(line_no) + ": bad value '" + field + "'");
      }
      values.push_back(static_cast<double>(v));
      ++count;
      tab = next;
    }
    if (count != dim) {
      throw FormatError(src + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values, found " + std::to_string(count));
    }
  }
  Matrix rows(static_cast<Eigen::Index>(ids.size()), dim);
  std::copy(values.begin(), values.end(), rows.data());
  file.index = RetrievalIndex(std::move(ids), std::move(rows));
  return file;
}

}  // namespace gnolr::eval
