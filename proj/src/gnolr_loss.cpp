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

#include "gnolr/gnolr_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gnolr/errors.hpp"
#include "gnolr/tensor.hpp"

namespace gnolr::loss {

using tensor::softplus;
using tensor::stable_sigmoid;

namespace {

void check_kernels(std::span<const double> kernels, const GnolrHyper& hyper) {
  if (static_cast<int>(kernels.size()) != hyper.T()) {
    throw ArgumentError("expected " + std::to_string(hyper.T()) + " kernel values, got " +
                        std::to_string(kernels.size()));
  }
}

void check_label(OrdinalLabel k, int T) {
  if (k.k < 1 || k.k > T + 1) {
    throw ArgumentError("category " + std::to_string(k.k) + " outside 1.." +
                        std::to_string(T + 1));
  }
}

// Log-odds argument z_c = a_c - c * gamma * K_c.
double boundary_logit(int c, double kernel, const GnolrHyper& hyper) {
  return hyper.thresholds.threshold(c) - c * hyper.gamma * kernel;
}

double sigmoid_slope(double z) {
  const double s = stable_sigmoid(z);
  return s * (1.0 - s);
}

// Negative log-likelihood of category k under boundaries z_1..z_m, with
// P(k <= m+1) = 1. Probabilities below the floor are clamped and pass no
// gradient. Accumulates dL/dz into dz.
double category_nll(int k, std::span<const double> z, double floor, std::span<double> dz) {
  const int m = static_cast<int>(z.size());
  const double clipped = -std::log(floor);
  if (k == 1) {
    const double p = stable_sigmoid(z[0]);
    if (p < floor) return clipped;
    dz[0] += -stable_sigmoid(-z[0]);
    return softplus(-z[0]);
  }
  if (k == m + 1) {
    const double p = stable_sigmoid(-z[m - 1]);
    if (p < floor) return clipped;
    dz[m - 1] += stable_sigmoid(z[m - 1]);
    return softplus(z[m - 1]);
  }
  const double p = stable_sigmoid(z[k - 1]) - stable_sigmoid(z[k - 2]);
  if (p < floor) return clipped;
  dz[k - 1] += -sigmoid_slope(z[k - 1]) / p;
  dz[k - 2] += sigmoid_slope(z[k - 2]) / p;
  return -std::log(p);
}

LossGrad to_kernel_grad(double loss, std::span<const double> dz, const GnolrHyper& hyper) {
  LossGrad out;
  out.loss = loss;
  out.d_kernels.resize(dz.size());
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const int c = static_cast<int>(i) + 1;
    out.d_kernels[i] = dz[i] * (-c * hyper.gamma);
  }
  return out;
}

std::vector<double> boundary_logits(std::span<const double> kernels, const GnolrHyper& hyper) {
  std::vector<double> z(kernels.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    z[i] = boundary_logit(static_cast<int>(i) + 1, kernels[i], hyper);
  }
  return z;
}

}  // namespace

void GnolrHyper::validate() const {
  if (T() < 1) throw ConfigError("at least one ordinal threshold is required");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
  if (!(clip_floor > 0.0) || !(clip_floor < 1.0)) throw ConfigError("clip_floor must lie in (0,1)");
}

double cumulative_prob(int c, double kernel_value, const GnolrHyper& hyper) {
  const int T = hyper.T();
  if (c < 0 || c > T + 1) {
    throw ArgumentError("category " + std::to_string(c) + " outside 0.." + std::to_string(T + 1));
  }
  if (c == 0) return 0.0;
  if (c == T + 1) return 1.0;
  return stable_sigmoid(boundary_logit(c, kernel_value, hyper));
}

CategoryDistribution category_distribution(std::span<const double> kernels,
                                           const GnolrHyper& hyper) {
  check_kernels(kernels, hyper);
  const int T = hyper.T();
  CategoryDistribution dist;
  dist.probs.resize(static_cast<std::size_t>(T) + 1);
  double prev = 0.0;
  for (int c = 1; c <= T; ++c) {
    const double cur = cumulative_prob(c, kernels[static_cast<std::size_t>(c - 1)], hyper);
    dist.probs[static_cast<std::size_t>(c - 1)] = cur - prev;
    prev = cur;
  }
  dist.probs[static_cast<std::size_t>(T)] =
      stable_sigmoid(-boundary_logit(T, kernels[static_cast<std::size_t>(T - 1)], hyper));
  return dist;
}

LossGrad subtask_loss_grad(int t, OrdinalLabel k, std::span<const double> kernels,
                           const GnolrHyper& hyper) {
  check_kernels(kernels, hyper);
  const int T = hyper.T();
  check_label(k, T);
  const OrdinalLabel remapped = ordinal::remap_for_subtask(k, t, T);
  const std::vector<double> z = boundary_logits(kernels, hyper);
  std::vector<double> dz(kernels.size(), 0.0);
  const double loss = category_nll(remapped.k, std::span<const double>(z).first(t),
                                   hyper.clip_floor, std::span<double>(dz).first(t));
  return to_kernel_grad(loss, dz, hyper);
}

double subtask_loss(int t, OrdinalLabel k, std::span<const double> kernels,
                    const GnolrHyper& hyper) {
  return subtask_loss_grad(t, k, kernels, hyper).loss;
}

LossGrad gnolr_total_loss_grad(OrdinalLabel k, std::span<const double> kernels,
                               const GnolrHyper& hyper) {
  check_kernels(kernels, hyper);
  const int T = hyper.T();
  check_label(k, T);
  const std::vector<double> z = boundary_logits(kernels, hyper);
  std::vector<double> dz(kernels.size(), 0.0);
  double loss = 0.0;
  for (int t = 1; t <= T; ++t) {
    const int remapped = std::min(k.k, t + 1);
    loss += category_nll(remapped, std::span<const double>(z).first(t), hyper.clip_floor,
                         std::span<double>(dz).first(t));
  }
  return to_kernel_grad(loss, dz, hyper);
}

double gnolr_total_loss(OrdinalLabel k, std::span<const double> kernels,
                        const GnolrHyper& hyper) {
  return gnolr_total_loss_grad(k, kernels, hyper).loss;
}

LossGrad plain_olr_loss_grad(OrdinalLabel k, std::span<const double> kernels,
                             const GnolrHyper& hyper) {
  check_kernels(kernels, hyper);
  check_label(k, hyper.T());
  const std::vector<double> z = boundary_logits(kernels, hyper);
  std::vector<double> dz(kernels.size(), 0.0);
  const double loss = category_nll(k.k, z, hyper.clip_floor, dz);
  return to_kernel_grad(loss, dz, hyper);
}

double task_score(int c, std::span<const double> kernels, const GnolrHyper& hyper) {
  check_kernels(kernels, hyper);
  if (c < 1 || c > hyper.T()) {
    throw ArgumentError("task " + std::to_string(c) + " outside 1.." + std::to_string(hyper.T()));
  }
  return stable_sigmoid(-boundary_logit(c, kernels[static_cast<std::size_t>(c - 1)], hyper));
}

ListNetResult listnet_from_logits(std::span<const double> logits,
                                  std::span<const std::uint8_t> positive, bool logged) {
  if (logits.size() != positive.size()) throw ArgumentError("listnet logits/labels size mismatch");
  ListNetResult out;
  out.d_logits.assign(logits.size(), 0.0);
  if (logits.empty()) return out;
  const std::size_t n_pos =
      static_cast<std::size_t>(std::count_if(positive.begin(), positive.end(),
                                             [](std::uint8_t p) { return p != 0; }));
  if (n_pos == 0) return out;

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double s : logits) denom += std::exp(s - max_logit);
  const double log_denom = max_logit + std::log(denom);
  std::vector<double> prob(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) prob[i] = std::exp(logits[i] - log_denom);

  if (logged) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (positive[i]) out.loss += log_denom - logits[i];
      out.d_logits[i] = static_cast<double>(n_pos) * prob[i] - (positive[i] ? 1.0 : 0.0);
    }
    return out;
  }
  double pos_mass = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (positive[i]) pos_mass += prob[i];
  }
  out.loss = -pos_mass;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.d_logits[i] = prob[i] * pos_mass - (positive[i] ? prob[i] : 0.0);
  }
  return out;
}

double listnet_loss(std::span<const ItemList> lists, const GnolrHyper& hyper, bool logged) {
  if (lists.empty()) return 0.0;
  const double scale = hyper.gamma * hyper.T();
  double total = 0.0;
  std::vector<double> logits;
  std::vector<std::uint8_t> pos;
  for (const ItemList& list : lists) {
    logits.clear();
    pos.clear();
    for (const ListItem& item : list) {
      logits.push_back(scale * item.unified_kernel);
      pos.push_back(item.positive ? 1 : 0);
    }
    total += listnet_from_logits(logits, pos, logged).loss;
  }
  return total / static_cast<double>(lists.size());
}

ScalarGrad bce_loss_grad(double logit, int label, double positive_weight) {
  if (label != 0 && label != 1) throw ArgumentError("bce label must be 0 or 1");
  if (!(positive_weight >= 1.0)) throw ArgumentError("positive weight must be >= 1");
  if (label == 1) {
    return {positive_weight * softplus(-logit), -positive_weight * stable_sigmoid(-logit)};
  }
  return {softplus(logit), stable_sigmoid(logit)};
}

double bce_loss(double logit, int label, double positive_weight) {
  return bce_loss_grad(logit, label, positive_weight).loss;
}

ScalarGrad neural_olr_loss_grad(OrdinalLabel k, double shared_kernel, const GnolrHyper& hyper) {
  const std::vector<double> kernels(static_cast<std::size_t>(hyper.T()), shared_kernel);
  const LossGrad g = plain_olr_loss_grad(k, kernels, hyper);
  double d = 0.0;
  for (double v : g.d_kernels) d += v;
  return {g.loss, d};
}

double neural_olr_loss(OrdinalLabel k, double shared_kernel, const GnolrHyper& hyper) {
  return neural_olr_loss_grad(k, shared_kernel, hyper).loss;
}

}  // namespace gnolr::loss
