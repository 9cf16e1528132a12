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

// INI run configuration: [data], [model], [train] and [eval] sections with
// "key = value" lines and "#" comments. Lists are written [a, b, c].

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnolr/data.hpp"
#include "gnolr/eval.hpp"
#include "gnolr/training.hpp"

namespace gnolr::config {

struct IniValue {
  std::string text;
  std::string where;  // "file:line" or "override"
};
using IniSection = std::map<std::string, IniValue>;
using IniFile = std::map<std::string, IniSection>;

IniFile parse_ini(std::string_view text, const std::string& source = "<memory>");
std::vector<std::string> parse_list(std::string_view value);

struct RunConfig {
  // [data]
  std::filesystem::path csv;
  std::filesystem::path bundle;
  data::IngestOptions ingest;
  data::PrepareOptions prepare;
  // [model] and [train]
  training::TrainConfig train;
  std::filesystem::path checkpoint;
  // [eval]
  eval::EvalOptions eval;
  std::string eval_split = "test";
  std::filesystem::path report;
  int runs = 1;
};

// Applies "section.key=value" overrides on top of the file. Relative paths in
// the file resolve against its directory, those in overrides against the
// working directory.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {},
                           const std::string& source = "<memory>");
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

}  // namespace gnolr::config
