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

// Generalized proportional-odds probabilities and the losses built on them.
//
// Kernel arguments are nested kernel values K(E^1), ..., K(E^T), one per
// category boundary, each in [-1, 1]. The cumulative probability of category
// c is P(k <= c) = sigmoid(a_c - c * gamma * K(E^c)); categories 0 and T+1 are
// pinned to 0 and 1.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gnolr/feedback_ordinal.hpp"

namespace gnolr::loss {

using ordinal::OrdinalLabel;
using ordinal::ThresholdSet;

struct GnolrHyper {
  ThresholdSet thresholds;
  double gamma = 1.0;
  double clip_floor = 1e-6;

  int T() const { return thresholds.size(); }
  void validate() const;
};

struct CategoryDistribution {
  std::vector<double> probs;  // P(k = c), c = 1..T+1 (index c-1)
};

// Value of a loss together with its gradient with respect to the kernel
// values that produced it.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> d_kernels;
};

double cumulative_prob(int c, double kernel_value, const GnolrHyper& hyper);

CategoryDistribution category_distribution(std::span<const double> kernels,
                                           const GnolrHyper& hyper);

// Subtask t sees categories 1..t+1 with everything above t+1 merged into t+1.
double subtask_loss(int t, OrdinalLabel k, std::span<const double> kernels,
                    const GnolrHyper& hyper);
LossGrad subtask_loss_grad(int t, OrdinalLabel k, std::span<const double> kernels,
                           const GnolrHyper& hyper);

// Sum of subtask losses t = 1..T for one sample.
double gnolr_total_loss(OrdinalLabel k, std::span<const double> kernels,
                        const GnolrHyper& hyper);
LossGrad gnolr_total_loss_grad(OrdinalLabel k, std::span<const double> kernels,
                               const GnolrHyper& hyper);

// Single negative log-likelihood over all T+1 categories, no subtasks. Used
// by the ablation variants.
LossGrad plain_olr_loss_grad(OrdinalLabel k, std::span<const double> kernels,
                             const GnolrHyper& hyper);

// P(k > c) = 1 - sigmoid(a_c - c * gamma * K(E^c)); c = T is the unified
// preference score.
double task_score(int c, std::span<const double> kernels, const GnolrHyper& hyper);

struct ListNetResult {
  double loss = 0.0;
  std::vector<double> d_logits;
};

// -sum over positives of log softmax(logits)[p]; a list with no positives
// contributes nothing. With `logged == false` the softmax ratio enters
// without the log.
ListNetResult listnet_from_logits(std::span<const double> logits,
                                  std::span<const std::uint8_t> positive, bool logged = true);

struct ListItem {
  double unified_kernel = 0.0;  // K(E^T)
  bool positive = false;
};
using ItemList = std::vector<ListItem>;

// Mean over lists of the ListNet loss on logits gamma * T * K(E^T).
double listnet_loss(std::span<const ItemList> lists, const GnolrHyper& hyper,
                    bool logged = true);

inline double combined_loss(double pointwise, double listwise) { return pointwise + listwise; }

// Loss of a scalar input and its derivative.
struct ScalarGrad {
  double loss = 0.0;
  double d_input = 0.0;
};
// positive_weight multiplies the y = 1 term only.
double bce_loss(double logit, int label, double positive_weight = 1.0);
ScalarGrad bce_loss_grad(double logit, int label, double positive_weight = 1.0);

// Shared-encoder ordinal regression: every boundary uses the same kernel,
// scaled by c * gamma as in the nested model.
double neural_olr_loss(OrdinalLabel k, double shared_kernel, const GnolrHyper& hyper);
ScalarGrad neural_olr_loss_grad(OrdinalLabel k, double shared_kernel, const GnolrHyper& hyper);

}  // namespace gnolr::loss
