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

#include "gnolr/baselines.hpp"

#include "gnolr/errors.hpp"

namespace gnolr::baselines {

HeadGrad nsb_forward_loss(std::span<const double> cosines, std::span<const std::uint8_t> bits,
                          const LogitHead& head, std::span<const double> weights) {
  const std::size_t n = cosines.size();
  if (bits.size() != n || weights.size() != n) {
    throw DimensionError("nsb: cosines, bits and weights must have one entry per task");
  }
  HeadGrad out;
  out.d_cosines.assign(n, 0.0);
  out.d_w.assign(n, 0.0);
  out.d_b.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const int task = static_cast<int>(t);
    const auto g = loss::bce_loss_grad(head.logit(task, cosines[t]), bits[t], weights[t]);
    out.loss += g.loss;
    if (head.mode == HeadMode::kRawCosine) {
      out.d_cosines[t] = g.d_input;
    } else {
      out.d_cosines[t] = g.d_input * head.w[t];
      out.d_w[t] = g.d_input * cosines[t];
      out.d_b[t] = g.d_input;
    }
  }
  return out;
}

HeadGrad bce_forward_loss(double cosine, std::uint8_t bit, const LogitHead& head, double weight) {
  const double c[1] = {cosine};
  const std::uint8_t y[1] = {bit};
  const double w[1] = {weight};
  return nsb_forward_loss(c, y, head, w);
}

loss::ScalarGrad neural_olr_forward_loss(double cosine, loss::OrdinalLabel k,
                                         const loss::GnolrHyper& hyper) {
  return loss::neural_olr_loss_grad(k, cosine, hyper);
}

}  // namespace gnolr::baselines
