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

// Synthetic interaction logs with a planted progressive preference: every
// user and item has a latent vector, the deeper feedback fires on a noisy
// subset of the shallower one, and both depend on the same affinity.

#pragma once

#include <cstdint>
#include <ostream>

#include "gnolr/data.hpp"

namespace gnolr::synthetic {

struct SyntheticOptions {
  int n_users = 300;
  int n_items = 200;
  int latent_dim = 4;
  int samples_per_user = 60;
  int n_clusters = 4;       // coarse uf_/if_ features derived from the latents
  int num_feedback = 2;     // levels, each a noisy subset of the previous one
  double base_rate = 0.3;   // rough positive rate of the first level
  double keep_rate = 0.35;  // rough fraction of level-t positives reaching t+1
  double noise = 0.3;       // std of the per-level affinity noise
  std::uint64_t seed = 1;
};

// Feedback columns are named "fb1".."fbT" from shallow to deep.
data::RawTable generate(const SyntheticOptions& opts);

// Same table as CSV with the columns user_id,item_id,timestamp,uf_cluster,
// if_cluster,fb1..fbT.
void write_csv(std::ostream& out, const data::RawTable& table);

}  // namespace gnolr::synthetic
