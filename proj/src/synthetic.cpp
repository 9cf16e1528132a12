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

#include "gnolr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gnolr/errors.hpp"

namespace gnolr::synthetic {

namespace {

using Latents = std::vector<std::vector<double>>;

Latents draw_latents(int n, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Latents out(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& v : out) {
    for (auto& x : v) x = g(rng);
  }
  return out;
}

int cluster_of(const std::vector<double>& v, int n_clusters) {
  const auto width = std::min<std::size_t>(v.size(), static_cast<std::size_t>(n_clusters));
  return static_cast<int>(std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(width)) -
                          v.begin());
}

// Value exceeded by roughly `rate` of xs.
double upper_quantile(std::vector<double> xs, double rate) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto idx = static_cast<std::size_t>(
      std::clamp((1.0 - rate) * static_cast<double>(xs.size()), 0.0,
                 static_cast<double>(xs.size() - 1)));
  return xs[idx];
}

}  // namespace

data::RawTable generate(const SyntheticOptions& o) {
  if (o.n_users < 1 || o.n_items < 1 || o.latent_dim < 1 || o.samples_per_user < 1 ||
      o.num_feedback < 1 || o.n_clusters < 1) {
    throw ConfigError("synthetic sizes must be positive");
  }
  if (!(o.base_rate > 0.0 && o.base_rate < 1.0) || !(o.keep_rate > 0.0 && o.keep_rate < 1.0)) {
    throw ConfigError("synthetic rates must lie in (0,1)");
  }
  std::mt19937_64 rng(o.seed);
  const Latents users = draw_latents(o.n_users, o.latent_dim, rng);
  const Latents items = draw_latents(o.n_items, o.latent_dim, rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(o.latent_dim));

  struct Draw {
    int user;
    int item;
    double affinity;
  };
  std::vector<Draw> draws;
  const int per_user = std::min(o.samples_per_user, o.n_items);
  std::vector<int> pool(static_cast<std::size_t>(o.n_items));
  std::iota(pool.begin(), pool.end(), 0);
  for (int u = 0; u < o.n_users; ++u) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int j = 0; j < per_user; ++j) {
      const int i = pool[static_cast<std::size_t>(j)];
      double s = 0.0;
      for (int d = 0; d < o.latent_dim; ++d) {
        s += users[static_cast<std::size_t>(u)][static_cast<std::size_t>(d)] *
             items[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
      }
      draws.push_back({u, i, s * scale});
    }
  }
  std::shuffle(draws.begin(), draws.end(), rng);

  // Level t fires when a fresh noisy copy of the affinity clears a threshold
  // chosen among the samples that reached level t-1.
  const std::size_t n = draws.size();
  const auto T = static_cast<std::size_t>(o.num_feedback);
  std::vector<std::vector<std::uint8_t>> bits(n, std::vector<std::uint8_t>(T, 0));
  std::normal_distribution<double> noise(0.0, o.noise);
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> noisy(alive.size());
    for (std::size_t j = 0; j < alive.size(); ++j) noisy[j] = draws[alive[j]].affinity + noise(rng);
    const double thr = upper_quantile(noisy, t == 0 ? o.base_rate : o.keep_rate);
    std::vector<std::size_t> next;
    for (std::size_t j = 0; j < alive.size(); ++j) {
      if (noisy[j] > thr) {
        bits[alive[j]][t] = 1;
        next.push_back(alive[j]);
      }
    }
    alive = std::move(next);
  }

  data::RawTable table;
  table.user_feature_names = {"user_id", "uf_cluster"};
  table.item_feature_names = {"item_id", "if_cluster"};
  for (std::size_t t = 0; t < T; ++t) table.feedback_names.push_back("fb" + std::to_string(t + 1));
  for (std::size_t r = 0; r < n; ++r) {
    const Draw& d = draws[r];
    data::RawInteraction x;
    x.user_id = std::to_string(d.user);
    x.item_id = std::to_string(d.item);
    x.timestamp = static_cast<std::int64_t>(r);
    x.user_features = {x.user_id,
                       std::to_string(cluster_of(users[static_cast<std::size_t>(d.user)], o.n_clusters))};
    x.item_features = {x.item_id,
                       std::to_string(cluster_of(items[static_cast<std::size_t>(d.item)], o.n_clusters))};
    x.feedback = bits[r];
    table.rows.push_back(std::move(x));
  }
  return table;
}

void write_csv(std::ostream& out, const data::RawTable& table) {
  out << "user_id,item_id,timestamp,uf_cluster,if_cluster";
  for (const auto& f : table.feedback_names) out << ',' << f;
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.user_id << ',' << r.item_id << ',' << r.timestamp << ',' << r.user_features.at(1)
        << ',' << r.item_features.at(1);
    for (auto b : r.feedback) out << ',' << static_cast<int>(b);
    out << '\n';
  }
}

}  // namespace gnolr::synthetic
