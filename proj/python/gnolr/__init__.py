# Copyright (c) 2026 The GNOLR Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python interface to the GNOLR engine."""

from ._gnolr import (
    Bundle,
    Checkpoint,
    ConfigError,
    GnolrError,
    IngestionError,
    MetricError,
    RunConfig,
    ThresholdError,
    UsageError,
    auc,
    bce_loss,
    category_distribution,
    estimate_thresholds,
    gauc,
    gnolr_loss,
    listnet_loss,
    load_checkpoint,
    load_config,
    map_to_ordinal,
    multi_run,
    prepare,
    read_bundle,
    recall_at_k,
    remap_for_subtask,
    task_score,
    thresholds_from_counts,
    topk,
    train,
    write_synthetic_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
