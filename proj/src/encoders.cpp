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

#include "gnolr/encoders.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>

#include "gnolr/errors.hpp"

namespace gnolr::encoders {

void TowerConfig::validate() const {
  if (hidden_sizes.empty()) throw ConfigError("tower needs at least one layer");
  for (int w : hidden_sizes) {
    if (w < 1) throw ConfigError("tower layer widths must be >= 1");
  }
  if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("leaky slope must lie in (0,1)");
}

EmbeddingTableSet::EmbeddingTableSet(std::span<const std::int64_t> user_vocab,
                                     std::span<const std::int64_t> item_vocab, int dim,
                                     Rng& rng)
    : dim_(dim) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  auto build = [&](std::span<const std::int64_t> vocab, const char* prefix,
                   std::vector<Parameter>& out) {
    for (std::size_t f = 0; f < vocab.size(); ++f) {
      if (vocab[f] < 1) throw ConfigError("embedding vocabulary must have at least one row");
      out.emplace_back(std::string(prefix) + std::to_string(f),
                       tensor::uniform(vocab[f], dim, -0.05, 0.05, rng));
    }
  };
  build(user_vocab, "emb.user.", user_);
  build(item_vocab, "emb.item.", item_);
}

namespace {

std::int32_t resolve_row(std::int32_t id, Eigen::Index rows) {
  return (id < 0 || id >= rows) ? kOovRow : id;
}

}  // namespace

Matrix EmbeddingTableSet::lookup(Side side, const IdMatrix& ids) const {
  const auto& t = tables(side);
  if (ids.cols() != static_cast<Eigen::Index>(t.size())) {
    throw DimensionError("expected " + std::to_string(t.size()) + " feature ids per row, got " +
                         std::to_string(ids.cols()));
  }
  Matrix out(ids.rows(), static_cast<Eigen::Index>(t.size()) * dim_);
  for (Eigen::Index r = 0; r < ids.rows(); ++r) {
    for (std::size_t f = 0; f < t.size(); ++f) {
      const auto& table = t[f].value;
      const std::int32_t row = resolve_row(ids(r, static_cast<Eigen::Index>(f)), table.rows());
      out.row(r).segment(static_cast<Eigen::Index>(f) * dim_, dim_) = table.row(row);
    }
  }
  return out;
}

void EmbeddingTableSet::accumulate_grad(Side side, const IdMatrix& ids, const Matrix& d_input) {
  auto& t = tables(side);
  for (Eigen::Index r = 0; r < ids.rows(); ++r) {
    for (std::size_t f = 0; f < t.size(); ++f) {
      auto& table = t[f];
      const std::int32_t row =
          resolve_row(ids(r, static_cast<Eigen::Index>(f)), table.value.rows());
      table.grad.row(row) += d_input.row(r).segment(static_cast<Eigen::Index>(f) * dim_, dim_);
    }
  }
}

std::vector<double> embed_features(std::span<const std::int32_t> ids,
                                   std::span<const Parameter> tables) {
  if (ids.size() != tables.size()) {
    throw DimensionError("expected " + std::to_string(tables.size()) + " feature ids, got " +
                         std::to_string(ids.size()));
  }
  std::vector<double> out;
  for (std::size_t f = 0; f < tables.size(); ++f) {
    const auto& table = tables[f].value;
    const std::int32_t row = resolve_row(ids[f], table.rows());
    for (Eigen::Index c = 0; c < table.cols(); ++c) out.push_back(table(row, c));
  }
  return out;
}

Tower::Tower(const std::string& name, int input_dim, const TowerConfig& cfg, Rng& rng)
    : cfg_(cfg), input_dim_(input_dim) {
  cfg_.validate();
  if (input_dim < 1) throw ConfigError("tower input width must be >= 1");
  int fan_in = input_dim;
  for (std::size_t l = 0; l < cfg_.hidden_sizes.size(); ++l) {
    const int fan_out = cfg_.hidden_sizes[l];
    const std::string layer = name + ".l" + std::to_string(l);
    weights_.emplace_back(layer + ".w", tensor::glorot_uniform(fan_in, fan_out, rng));
    biases_.emplace_back(layer + ".b", Matrix::Zero(1, fan_out));
    fan_in = fan_out;
  }
}

Matrix Tower::forward(const Matrix& x, Cache* cache) const {
  if (x.cols() != input_dim_) {
    throw DimensionError("tower expects input width " + std::to_string(input_dim_) + ", got " +
                         std::to_string(x.cols()));
  }
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix h = x;
  const std::size_t layers = weights_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = tensor::matmul_forward(h, weights_[l].value);
    z.rowwise() += biases_[l].value.row(0);
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(z);
    }
    h = (l + 1 < layers) ? tensor::leaky_relu(z, cfg_.slope) : std::move(z);
  }
  tensor::NormalizedRows out = tensor::normalize_rows(h);
  Matrix unit = out.unit;
  if (cache != nullptr) cache->output = std::move(out);
  return unit;
}

Matrix Tower::backward(const Cache& cache, const Matrix& d_output) {
  Matrix dz = tensor::normalize_rows_backward(d_output, cache.output);
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const tensor::MatmulGrads g = tensor::matmul_backward(dz, cache.inputs[l], weights_[l].value);
    weights_[l].grad += g.b;
    biases_[l].grad.row(0) += dz.colwise().sum();
    if (l == 0) return g.a;
    dz = tensor::leaky_relu_backward(g.a, cache.pre_activations[l - 1], cfg_.slope);
  }
  return dz;
}

std::vector<Parameter*> Tower::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Parameter*> Tower::parameters() const {
  std::vector<const Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

TowerOutput tower_forward(std::span<const double> input, const Tower& tower) {
  Matrix x(1, static_cast<Eigen::Index>(input.size()));
  for (std::size_t i = 0; i < input.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = input[i];
  Tower::Cache cache;
  const Matrix unit = tower.forward(x, &cache);
  TowerOutput out;
  out.unit.assign(unit.data(), unit.data() + unit.size());
  out.degenerate = cache.output.degenerate_rows > 0;
  return out;
}

std::vector<double> NestedEmbedding::prefix(int c) const {
  if (c < 1 || c > T()) {
    throw ArgumentError("prefix length " + std::to_string(c) + " outside 1.." +
                        std::to_string(T()));
  }
  std::vector<double> out;
  for (int j = 0; j < c; ++j) {
    const auto& s = subs[static_cast<std::size_t>(j)];
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

double nested_kernel(const NestedEmbedding& user, const NestedEmbedding& item, int c) {
  if (user.T() != item.T()) throw DimensionError("nested embeddings differ in depth");
  if (c < 1 || c > user.T()) {
    throw ArgumentError("kernel level " + std::to_string(c) + " outside 1.." +
                        std::to_string(user.T()));
  }
  double sum = 0.0;
  for (int j = 0; j < c; ++j) {
    const auto& u = user.subs[static_cast<std::size_t>(j)];
    const auto& v = item.subs[static_cast<std::size_t>(j)];
    if (u.size() != v.size()) throw DimensionError("sub-embedding widths differ");
    for (std::size_t d = 0; d < u.size(); ++d) sum += u[d] * v[d];
  }
  return sum / c;
}

std::vector<double> nested_kernels_from_cosines(std::span<const double> cosines) {
  std::vector<double> out(cosines.size());
  double running = 0.0;
  for (std::size_t j = 0; j < cosines.size(); ++j) {
    running += cosines[j];
    out[j] = running / static_cast<double>(j + 1);
  }
  return out;
}

std::vector<double> cosine_grads_from_nested(std::span<const double> d_kernels) {
  std::vector<double> out(d_kernels.size());
  double running = 0.0;
  for (std::size_t c = d_kernels.size(); c-- > 0;) {
    running += d_kernels[c] / static_cast<double>(c + 1);
    out[c] = running;
  }
  return out;
}

TwinTowerStack::TwinTowerStack(int num_pairs, std::span<const std::int64_t> user_vocab,
                               std::span<const std::int64_t> item_vocab, int embedding_dim,
                               const TowerConfig& cfg, Rng& rng)
    : cfg_(cfg), tables_(user_vocab, item_vocab, embedding_dim, rng) {
  if (num_pairs < 1) throw ConfigError("at least one tower pair is required");
  cfg_.validate();
  for (int p = 0; p < num_pairs; ++p) {
    user_towers_.emplace_back("tower.user." + std::to_string(p),
                              tables_.input_width(Side::kUser), cfg_, rng);
    item_towers_.emplace_back("tower.item." + std::to_string(p),
                              tables_.input_width(Side::kItem), cfg_, rng);
  }
}

Matrix TwinTowerStack::forward(const IdMatrix& user_ids, const IdMatrix& item_ids, Cache* cache,
                               int threads) const {
  if (user_ids.rows() != item_ids.rows()) throw DimensionError("user/item batch sizes differ");
  const Matrix xu = tables_.lookup(Side::kUser, user_ids);
  const Matrix xi = tables_.lookup(Side::kItem, item_ids);
  const auto pairs = static_cast<std::size_t>(num_pairs());
  std::vector<Tower::Cache> ucache(pairs);
  std::vector<Tower::Cache> icache(pairs);
  std::vector<Matrix> uunit(pairs);
  std::vector<Matrix> iunit(pairs);
  Matrix cos(user_ids.rows(), num_pairs());
  parallel_for(pairs, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      uunit[p] = user_towers_[p].forward(xu, &ucache[p]);
      iunit[p] = item_towers_[p].forward(xi, &icache[p]);
      cos.col(static_cast<Eigen::Index>(p)) = uunit[p].cwiseProduct(iunit[p]).rowwise().sum();
    }
  });
  for (std::size_t p = 0; p < pairs; ++p) {
    degenerate_ += ucache[p].output.degenerate_rows + icache[p].output.degenerate_rows;
  }
  if (cache != nullptr) {
    cache->user_ids = user_ids;
    cache->item_ids = item_ids;
    cache->user = std::move(ucache);
    cache->item = std::move(icache);
    cache->user_units = std::move(uunit);
    cache->item_units = std::move(iunit);
  }
  return cos;
}

void TwinTowerStack::backward(const Cache& cache, const Matrix& d_cosines, int threads) {
  const auto pairs = static_cast<std::size_t>(num_pairs());
  if (d_cosines.cols() != num_pairs() || d_cosines.rows() != cache.user_ids.rows()) {
    throw DimensionError("cosine gradient shape does not match the forward batch");
  }
  std::vector<Matrix> dxu(pairs);
  std::vector<Matrix> dxi(pairs);
  parallel_for(pairs, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto scale = d_cosines.col(static_cast<Eigen::Index>(p)).array();
      const Matrix du = (cache.item_units[p].array().colwise() * scale).matrix();
      const Matrix di = (cache.user_units[p].array().colwise() * scale).matrix();
      dxu[p] = user_towers_[p].backward(cache.user[p], du);
      dxi[p] = item_towers_[p].backward(cache.item[p], di);
    }
  });
  Matrix su = dxu[0];
  Matrix si = dxi[0];
  for (std::size_t p = 1; p < pairs; ++p) {
    su += dxu[p];
    si += dxi[p];
  }
  tables_.accumulate_grad(Side::kUser, cache.user_ids, su);
  tables_.accumulate_grad(Side::kItem, cache.item_ids, si);
}

Matrix TwinTowerStack::encode(Side side, int pair, const IdMatrix& ids) const {
  if (pair < 0 || pair >= num_pairs()) {
    throw ArgumentError("tower pair " + std::to_string(pair) + " outside 0.." +
                        std::to_string(num_pairs() - 1));
  }
  const Matrix x = tables_.lookup(side, ids);
  const Tower& tower = side == Side::kUser ? user_towers_[static_cast<std::size_t>(pair)]
                                           : item_towers_[static_cast<std::size_t>(pair)];
  Tower::Cache cache;
  Matrix unit = tower.forward(x, &cache);
  degenerate_ += cache.output.degenerate_rows;
  return unit;
}

std::vector<Parameter*> TwinTowerStack::parameters() {
  std::vector<Parameter*> out;
  for (Side side : {Side::kUser, Side::kItem}) {
    for (auto& t : tables_.tables(side)) out.push_back(&t);
  }
  for (auto& t : user_towers_) {
    for (Parameter* p : t.parameters()) out.push_back(p);
  }
  for (auto& t : item_towers_) {
    for (Parameter* p : t.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> TwinTowerStack::parameters() const {
  std::vector<const Parameter*> out;
  for (Side side : {Side::kUser, Side::kItem}) {
    for (const auto& t : tables_.tables(side)) out.push_back(&t);
  }
  for (const auto& t : user_towers_) {
    for (const Parameter* p : t.parameters()) out.push_back(p);
  }
  for (const auto& t : item_towers_) {
    for (const Parameter* p : t.parameters()) out.push_back(p);
  }
  return out;
}

NestedPair nested_forward(std::span<const std::int32_t> user_ids,
                          std::span<const std::int32_t> item_ids, const TwinTowerStack& stack) {
  IdMatrix u(1, static_cast<Eigen::Index>(user_ids.size()));
  IdMatrix i(1, static_cast<Eigen::Index>(item_ids.size()));
  for (std::size_t f = 0; f < user_ids.size(); ++f) u(0, static_cast<Eigen::Index>(f)) = user_ids[f];
  for (std::size_t f = 0; f < item_ids.size(); ++f) i(0, static_cast<Eigen::Index>(f)) = item_ids[f];
  NestedPair out;
  for (int p = 0; p < stack.num_pairs(); ++p) {
    const Matrix eu = stack.encode(Side::kUser, p, u);
    const Matrix ei = stack.encode(Side::kItem, p, i);
    out.user.subs.emplace_back(eu.data(), eu.data() + eu.size());
    out.item.subs.emplace_back(ei.data(), ei.data() + ei.size());
  }
  return out;
}

void parallel_for(std::size_t total, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(total, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    fn(0, total);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&fn, &errors, w, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace gnolr::encoders
