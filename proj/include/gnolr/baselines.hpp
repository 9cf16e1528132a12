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

// Per-sample objectives of the reference models. Each one maps the per-pair
// cosines of a sample to a loss and the gradient with respect to those
// cosines (and to the logit head, when there is one).

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gnolr/gnolr_loss.hpp"

namespace gnolr::baselines {

enum class BaselineKind { kBce, kNeuralOlr, kNsb };

enum class HeadMode {
  kAffine,     // logit = w * cos + b
  kRawCosine,  // logit = cos
};

// Scalar logit heads, one per task.
struct LogitHead {
  HeadMode mode = HeadMode::kAffine;
  std::vector<double> w;
  std::vector<double> b;

  double logit(int task, double cosine) const {
    if (mode == HeadMode::kRawCosine) return cosine;
    return w[static_cast<std::size_t>(task)] * cosine + b[static_cast<std::size_t>(task)];
  }
};

struct HeadGrad {
  double loss = 0.0;
  std::vector<double> d_cosines;
  std::vector<double> d_w;
  std::vector<double> d_b;
};

// Sum over tasks t of bce(logit_t, bits[t], weights[t]); task t reads only
// cosines[t].
HeadGrad nsb_forward_loss(std::span<const double> cosines, std::span<const std::uint8_t> bits,
                          const LogitHead& head, std::span<const double> weights);

// Single task on cosines[0].
HeadGrad bce_forward_loss(double cosine, std::uint8_t bit, const LogitHead& head, double weight);

loss::ScalarGrad neural_olr_forward_loss(double cosine, loss::OrdinalLabel k,
                                         const loss::GnolrHyper& hyper);

}  // namespace gnolr::baselines
