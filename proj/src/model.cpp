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

#include "gnolr/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gnolr/errors.hpp"

namespace gnolr::model {

namespace {

struct KindName {
  ModelKind kind;
  std::string_view name;
};
constexpr KindName kKindNames[] = {
    {ModelKind::kGnolr, "gnolr"},         {ModelKind::kGnolrListwise, "gnolr_l"},
    {ModelKind::kGnolrV0, "gnolr_v0"},    {ModelKind::kGnolrV1, "gnolr_v1"},
    {ModelKind::kNeuralOlr, "neural_olr"}, {ModelKind::kBce, "bce"},
    {ModelKind::kNsb, "nsb"},
};

bool is_nested(ModelKind k) {
  return k == ModelKind::kGnolr || k == ModelKind::kGnolrListwise || k == ModelKind::kGnolrV1;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  for (const auto& kn : kKindNames) {
    if (kn.name == lower) return kn.kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

int ModelSpec::num_pairs() const {
  switch (kind) {
    case ModelKind::kNeuralOlr:
    case ModelKind::kBce:
      return 1;
    default:
      return T;
  }
}

double ModelSpec::positive_weight(int task) const {
  if (positive_weights.empty()) return 1.0;
  if (positive_weights.size() == 1) return positive_weights[0];
  return positive_weights.at(static_cast<std::size_t>(task));
}

bool ModelSpec::uses_thresholds() const {
  return kind != ModelKind::kBce && kind != ModelKind::kNsb;
}

loss::GnolrHyper ModelSpec::hyper() const {
  loss::GnolrHyper h;
  h.thresholds = ordinal::ThresholdSet(thresholds);
  h.gamma = gamma;
  h.clip_floor = clip_floor;
  return h;
}

void ModelSpec::validate() const {
  if (T < 1) throw ConfigError("model needs at least one feedback type");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
  tower.validate();
  if (user_vocab.empty() || item_vocab.empty()) {
    throw ConfigError("model needs at least one user and one item feature");
  }
  if (uses_thresholds()) {
    if (static_cast<int>(thresholds.size()) != T) {
      throw ConfigError("expected " + std::to_string(T) + " thresholds, got " +
                        std::to_string(thresholds.size()));
    }
    hyper().validate();
  }
  if (kind == ModelKind::kBce && (effective_bce_target() < 1 || effective_bce_target() > T)) {
    throw ConfigError("bce target must lie in 1.." + std::to_string(T));
  }
  const std::size_t expected = kind == ModelKind::kNsb ? static_cast<std::size_t>(T) : 1;
  if (!positive_weights.empty() && positive_weights.size() != 1 &&
      positive_weights.size() != expected) {
    throw ConfigError("expected 1 or " + std::to_string(expected) + " positive weights");
  }
  for (double w : positive_weights) {
    if (!(w >= 1.0)) throw ConfigError("positive weights must be >= 1");
  }
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.uses_thresholds()) hyper_ = spec_.hyper();
  tensor::Rng rng(seed);
  stack_ = encoders::TwinTowerStack(spec_.num_pairs(), spec_.user_vocab, spec_.item_vocab,
                                    spec_.embedding_dim, spec_.tower, rng);
  has_head_ = (spec_.kind == ModelKind::kBce || spec_.kind == ModelKind::kNsb) &&
              spec_.head == baselines::HeadMode::kAffine;
  const auto p = static_cast<Eigen::Index>(spec_.num_pairs());
  head_w_ = Parameter("head.w", Matrix::Ones(1, p));
  head_b_ = Parameter("head.b", Matrix::Zero(1, p));
}

double Model::sample_loss(std::span<const double> cos, const data::Split& split, std::size_t row,
                          std::span<double> d_cos, std::vector<double>* d_w,
                          std::vector<double>* d_b) const {
  const auto k = split.labels[row];
  switch (spec_.kind) {
    case ModelKind::kGnolr:
    case ModelKind::kGnolrListwise: {
      const auto kernels = encoders::nested_kernels_from_cosines(cos);
      const auto g = loss::gnolr_total_loss_grad(k, kernels, hyper_);
      const auto dc = encoders::cosine_grads_from_nested(g.d_kernels);
      std::copy(dc.begin(), dc.end(), d_cos.begin());
      return g.loss;
    }
    case ModelKind::kGnolrV1: {
      const auto kernels = encoders::nested_kernels_from_cosines(cos);
      const auto g = loss::plain_olr_loss_grad(k, kernels, hyper_);
      const auto dc = encoders::cosine_grads_from_nested(g.d_kernels);
      std::copy(dc.begin(), dc.end(), d_cos.begin());
      return g.loss;
    }
    case ModelKind::kGnolrV0: {
      const auto g = loss::plain_olr_loss_grad(k, cos, hyper_);
      std::copy(g.d_kernels.begin(), g.d_kernels.end(), d_cos.begin());
      return g.loss;
    }
    case ModelKind::kNeuralOlr: {
      const auto g = baselines::neural_olr_forward_loss(cos[0], k, hyper_);
      d_cos[0] = g.d_input;
      return g.loss;
    }
    case ModelKind::kBce:
    case ModelKind::kNsb: {
      baselines::LogitHead head;
      head.mode = spec_.head;
      head.w.assign(head_w_.value.data(), head_w_.value.data() + head_w_.value.size());
      head.b.assign(head_b_.value.data(), head_b_.value.data() + head_b_.value.size());
      baselines::HeadGrad g;
      if (spec_.kind == ModelKind::kBce) {
        const std::uint8_t bit = split.bit(row, spec_.effective_bce_target() - 1);
        g = baselines::bce_forward_loss(cos[0], bit, head, spec_.positive_weight(0));
      } else {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(spec_.T));
        std::vector<double> weights(bits.size());
        for (int t = 0; t < spec_.T; ++t) {
          bits[static_cast<std::size_t>(t)] = split.bit(row, t);
          weights[static_cast<std::size_t>(t)] = spec_.positive_weight(t);
        }
        g = baselines::nsb_forward_loss(cos, bits, head, weights);
      }
      std::copy(g.d_cosines.begin(), g.d_cosines.end(), d_cos.begin());
      if (d_w != nullptr) {
        for (std::size_t t = 0; t < g.d_w.size(); ++t) {
          (*d_w)[t] += g.d_w[t];
          (*d_b)[t] += g.d_b[t];
        }
      }
      return g.loss;
    }
  }
  throw ArgumentError("unhandled model kind");
}

Model::Pass Model::evaluate(const data::Split& split, const data::Batch& batch, int threads,
                            bool need_grad) const {
  if (split.T != spec_.T) {
    throw ConfigError("data has " + std::to_string(split.T) + " feedback types, model expects " +
                      std::to_string(spec_.T));
  }
  Pass pass;
  const std::size_t n = batch.rows.size();
  if (n == 0) return pass;
  const IdMatrix u = data::gather_rows(split.user_features, batch.rows);
  const IdMatrix i = data::gather_rows(split.item_features, batch.rows);
  const Matrix cos = stack_.forward(u, i, need_grad ? &pass.cache : nullptr, threads);
  const auto P = static_cast<std::size_t>(cos.cols());
  pass.d_cos = Matrix::Zero(cos.rows(), cos.cols());
  pass.d_w.assign(P, 0.0);
  pass.d_b.assign(P, 0.0);

  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    std::span<const double> c(cos.row(ri).data(), P);
    std::span<double> d(pass.d_cos.row(ri).data(), P);
    total += sample_loss(c, split, batch.rows[r], d, &pass.d_w, &pass.d_b);
  }
  pass.loss = total * inv_n;
  pass.d_cos *= inv_n;
  for (std::size_t t = 0; t < P; ++t) {
    pass.d_w[t] *= inv_n;
    pass.d_b[t] *= inv_n;
  }

  if (spec_.kind == ModelKind::kGnolrListwise && batch.num_lists() > 0) {
    const std::size_t L = batch.num_lists();
    const double inv_l = 1.0 / static_cast<double>(L);
    double list_total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t b0 = batch.list_offsets[l];
      const std::size_t b1 = batch.list_offsets[l + 1];
      std::vector<double> logits;
      std::vector<std::uint8_t> pos;
      for (std::size_t r = b0; r < b1; ++r) {
        // gamma * T * K(E^T) = gamma * sum of the per-pair cosines
        logits.push_back(hyper_.gamma * cos.row(static_cast<Eigen::Index>(r)).sum());
        pos.push_back(split.labels[batch.rows[r]].k > 1 ? 1 : 0);
      }
      const auto res = loss::listnet_from_logits(logits, pos, spec_.listnet_logged);
      list_total += res.loss;
      for (std::size_t r = b0; r < b1; ++r) {
        pass.d_cos.row(static_cast<Eigen::Index>(r)).array() +=
            res.d_logits[r - b0] * hyper_.gamma * inv_l;
      }
    }
    pass.loss = loss::combined_loss(pass.loss, list_total * inv_l);
  }
  return pass;
}

double Model::loss_and_grad(const data::Split& split, const data::Batch& batch, int threads) {
  Pass pass = evaluate(split, batch, threads, true);
  if (batch.rows.empty()) return 0.0;
  stack_.backward(pass.cache, pass.d_cos, threads);
  if (has_head_) {
    for (std::size_t t = 0; t < pass.d_w.size(); ++t) {
      head_w_.grad(0, static_cast<Eigen::Index>(t)) += pass.d_w[t];
      head_b_.grad(0, static_cast<Eigen::Index>(t)) += pass.d_b[t];
    }
  }
  return pass.loss;
}

double Model::loss(const data::Split& split, const data::Batch& batch, int threads) const {
  return evaluate(split, batch, threads, false).loss;
}

Matrix Model::scores(const IdMatrix& user_ids, const IdMatrix& item_ids, int threads) const {
  const Matrix cos = stack_.forward(user_ids, item_ids, nullptr, threads);
  const int T = spec_.T;
  Matrix out(cos.rows(), T);
  for (Eigen::Index r = 0; r < cos.rows(); ++r) {
    std::span<const double> c(cos.row(r).data(), static_cast<std::size_t>(cos.cols()));
    switch (spec_.kind) {
      case ModelKind::kGnolr:
      case ModelKind::kGnolrListwise:
      case ModelKind::kGnolrV1: {
        const auto kernels = encoders::nested_kernels_from_cosines(c);
        for (int t = 1; t <= T; ++t) out(r, t - 1) = loss::task_score(t, kernels, hyper_);
        break;
      }
      case ModelKind::kGnolrV0:
        for (int t = 1; t <= T; ++t) out(r, t - 1) = loss::task_score(t, c, hyper_);
        break;
      case ModelKind::kNeuralOlr: {
        const std::vector<double> kernels(static_cast<std::size_t>(T), c[0]);
        for (int t = 1; t <= T; ++t) out(r, t - 1) = loss::task_score(t, kernels, hyper_);
        break;
      }
      case ModelKind::kBce:
      case ModelKind::kNsb:
        for (int t = 0; t < T; ++t) {
          const int pair = spec_.kind == ModelKind::kBce ? 0 : t;
          double logit = c[static_cast<std::size_t>(pair)];
          if (spec_.head == baselines::HeadMode::kAffine) {
            logit = head_w_.value(0, pair) * logit + head_b_.value(0, pair);
          }
          out(r, t) = tensor::stable_sigmoid(logit);
        }
        break;
    }
  }
  return out;
}

int Model::num_embedding_sets() const {
  return (spec_.kind == ModelKind::kNsb || spec_.kind == ModelKind::kGnolrV0) ? spec_.T : 1;
}

int Model::embedding_set_for_target(int c) const {
  if (c < 1 || c > spec_.T) throw ArgumentError("target outside 1..T");
  return num_embedding_sets() == 1 ? 0 : c - 1;
}

Matrix Model::embeddings(Side side, const IdMatrix& ids, int set) const {
  if (set < 0 || set >= num_embedding_sets()) throw ArgumentError("embedding set out of range");
  if (!is_nested(spec_.kind)) return stack_.encode(side, num_embedding_sets() == 1 ? 0 : set, ids);
  // Unified space: concatenation E^T of all unit sub-embeddings.
  const int P = stack_.num_pairs();
  const int d = stack_.output_dim();
  Matrix out(ids.rows(), static_cast<Eigen::Index>(P) * d);
  for (int p = 0; p < P; ++p) {
    out.middleCols(static_cast<Eigen::Index>(p) * d, d) = stack_.encode(side, p, ids);
  }
  return out;
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = stack_.parameters();
  if (has_head_) {
    out.push_back(&head_w_);
    out.push_back(&head_b_);
  }
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out = stack_.parameters();
  if (has_head_) {
    out.push_back(&head_w_);
    out.push_back(&head_b_);
  }
  return out;
}

}  // namespace gnolr::model
