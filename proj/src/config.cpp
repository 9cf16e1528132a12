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

#include "gnolr/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <thread>

#include "gnolr/binary_io.hpp"
#include "gnolr/errors.hpp"

namespace gnolr::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const IniValue& v, const std::string& key, const std::string& what) {
  throw ConfigError(v.where + ": " + key + ": " + what + " (got '" + v.text + "')");
}

double as_double(const IniValue& v, const std::string& key) {
  double x = 0.0;
  const auto& t = v.text;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) bad(v, key, "expected a number");
  return x;
}

long long as_int(const IniValue& v, const std::string& key) {
  long long x = 0;
  const auto& t = v.text;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) bad(v, key, "expected an integer");
  return x;
}

bool as_bool(const IniValue& v, const std::string& key) {
  if (v.text == "true" || v.text == "1" || v.text == "yes") return true;
  if (v.text == "false" || v.text == "0" || v.text == "no") return false;
  bad(v, key, "expected true or false");
}

std::vector<double> as_doubles(const IniValue& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : parse_list(v.text)) out.push_back(as_double({item, v.where}, key));
  return out;
}

template <typename Int>
std::vector<Int> as_ints(const IniValue& v, const std::string& key) {
  std::vector<Int> out;
  for (const auto& item : parse_list(v.text)) {
    out.push_back(static_cast<Int>(as_int({item, v.where}, key)));
  }
  return out;
}

}  // namespace

std::vector<std::string> parse_list(std::string_view value) {
  std::string s = trim(value);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(trim(std::string_view(s).substr(pos, comma == std::string::npos ? std::string::npos
                                                                                   : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

IniFile parse_ini(std::string_view text, const std::string& source) {
  IniFile ini;
  std::string section;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      ini[section];
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      if (section.empty()) throw ConfigError(where + ": key outside of a section");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      if (ini[section].contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      ini[section][key] = IniValue{trim(std::string_view(line).substr(eq + 1)), where};
    }
    if (end == text.size()) break;
  }
  return ini;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides, const std::string& source) {
  IniFile ini = parse_ini(text, source);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + o + "' must look like section.key=value");
    }
    ini[trim(o.substr(0, dot))][trim(o.substr(dot + 1, eq - dot - 1))] =
        IniValue{trim(o.substr(eq + 1)), "override"};
  }

  RunConfig rc;
  rc.train.threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  using Handler = std::function<void(const IniValue&, const std::string&)>;
  auto path_of = [&](const IniValue& v) {
    std::filesystem::path p(v.text);
    if (p.is_relative() && v.where != "override") p = base_dir / p;
    return p;
  };
  auto& t = rc.train;
  const std::map<std::string, std::map<std::string, Handler>> handlers{
      {"data",
       {
           {"csv", [&](auto& v, auto&) { rc.csv = path_of(v); }},
           {"bundle", [&](auto& v, auto&) { rc.bundle = path_of(v); }},
           {"feedback", [&](auto& v, auto&) { rc.ingest.feedback = parse_list(v.text); }},
           {"numeric",
            [&](auto& v, auto&) {
              const auto xs = parse_list(v.text);
              rc.ingest.numeric_columns = {xs.begin(), xs.end()};
            }},
           {"rating_column", [&](auto& v, auto&) { rc.ingest.rating_column = v.text; }},
           {"rating_threshold",
            [&](auto& v, auto& k) { rc.ingest.rating_threshold = as_double(v, k); }},
           {"user_key", [&](auto& v, auto&) { rc.ingest.user_key_columns = parse_list(v.text); }},
           {"id_features", [&](auto& v, auto& k) { rc.ingest.id_features = as_bool(v, k); }},
           {"train_fraction", [&](auto& v, auto& k) { rc.prepare.train_fraction = as_double(v, k); }},
           {"validation_fraction",
            [&](auto& v, auto& k) { rc.prepare.validation_fraction_of_train = as_double(v, k); }},
           {"n_bins", [&](auto& v, auto& k) { rc.prepare.n_bins = static_cast<int>(as_int(v, k)); }},
       }},
      {"model",
       {
           {"kind", [&](auto& v, auto&) { t.kind = model::parse_model_kind(v.text); }},
           {"thresholds",
            [&](auto& v, auto& k) {
              t.thresholds = v.text == "auto" ? std::vector<double>{} : as_doubles(v, k);
            }},
           {"threshold_population",
            [&](auto& v, auto& k) {
              if (v.text == "train") {
                t.population = training::ThresholdPopulation::kTrain;
              } else if (v.text == "all") {
                t.population = training::ThresholdPopulation::kAll;
              } else {
                bad(v, k, "expected train or all");
              }
            }},
           {"gamma", [&](auto& v, auto& k) { t.gamma = as_double(v, k); }},
           {"clip_floor", [&](auto& v, auto& k) { t.clip_floor = as_double(v, k); }},
           {"embedding_dim", [&](auto& v, auto& k) { t.embedding_dim = static_cast<int>(as_int(v, k)); }},
           {"hidden", [&](auto& v, auto& k) { t.tower.hidden_sizes = as_ints<int>(v, k); }},
           {"slope", [&](auto& v, auto& k) { t.tower.slope = as_double(v, k); }},
           {"head",
            [&](auto& v, auto& k) {
              if (v.text == "affine") {
                t.head = baselines::HeadMode::kAffine;
              } else if (v.text == "raw") {
                t.head = baselines::HeadMode::kRawCosine;
              } else {
                bad(v, k, "expected affine or raw");
              }
            }},
           {"bce_target", [&](auto& v, auto& k) { t.bce_target = static_cast<int>(as_int(v, k)); }},
           {"positive_weights", [&](auto& v, auto& k) { t.positive_weights = as_doubles(v, k); }},
           {"listnet",
            [&](auto& v, auto& k) {
              if (v.text != "logged" && v.text != "unlogged") bad(v, k, "expected logged or unlogged");
              t.listnet_logged = v.text == "logged";
            }},
       }},
      {"train",
       {
           {"epochs", [&](auto& v, auto& k) { t.epochs = static_cast<int>(as_int(v, k)); }},
           {"batch_size",
            [&](auto& v, auto& k) { t.batch_size = static_cast<std::size_t>(as_int(v, k)); }},
           {"list_batch_size",
            [&](auto& v, auto& k) { t.list_batch_size = static_cast<std::size_t>(as_int(v, k)); }},
           {"max_list_len",
            [&](auto& v, auto& k) { t.max_list_len = static_cast<std::size_t>(as_int(v, k)); }},
           {"lr", [&](auto& v, auto& k) { t.optimizer.learning_rate = as_double(v, k); }},
           {"beta1", [&](auto& v, auto& k) { t.optimizer.beta1 = as_double(v, k); }},
           {"beta2", [&](auto& v, auto& k) { t.optimizer.beta2 = as_double(v, k); }},
           {"epsilon", [&](auto& v, auto& k) { t.optimizer.epsilon = as_double(v, k); }},
           {"seed", [&](auto& v, auto& k) { t.seed = static_cast<std::uint64_t>(as_int(v, k)); }},
           {"threads", [&](auto& v, auto& k) { t.threads = static_cast<int>(as_int(v, k)); }},
           {"patience", [&](auto& v, auto& k) { t.patience = static_cast<int>(as_int(v, k)); }},
           {"checkpoint", [&](auto& v, auto&) { rc.checkpoint = path_of(v); }},
       }},
      {"eval",
       {
           {"split", [&](auto& v, auto&) { rc.eval_split = v.text; }},
           {"recall_k", [&](auto& v, auto& k) { rc.eval.recall_k = as_ints<std::size_t>(v, k); }},
           {"recall", [&](auto& v, auto& k) { rc.eval.recall = as_bool(v, k); }},
           {"gauc", [&](auto& v, auto& k) { rc.eval.gauc = as_bool(v, k); }},
           {"gauc_weighting",
            [&](auto& v, auto& k) {
              if (v.text == "pairs") {
                rc.eval.gauc_weighting = eval::GaucWeighting::kPairs;
              } else if (v.text == "uniform") {
                rc.eval.gauc_weighting = eval::GaucWeighting::kUniform;
              } else {
                bad(v, k, "expected pairs or uniform");
              }
            }},
           {"report", [&](auto& v, auto&) { rc.report = path_of(v); }},
           {"runs", [&](auto& v, auto& k) { rc.runs = static_cast<int>(as_int(v, k)); }},
       }},
  };

  for (const auto& [section, keys] : ini) {
    const auto hs = handlers.find(section);
    if (hs == handlers.end()) throw ConfigError(source + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto h = hs->second.find(key);
      if (h == hs->second.end()) {
        throw ConfigError(value.where + ": unknown key '" + section + "." + key + "'");
      }
      h->second(value, section + "." + key);
    }
  }
  rc.eval.threads = t.threads;
  if (rc.runs < 1) throw ConfigError("eval.runs must be >= 1");
  if (rc.eval_split != "train" && rc.eval_split != "validation" && rc.eval_split != "test") {
    throw ConfigError("eval.split must be train, validation or test");
  }
  for (std::size_t k : rc.eval.recall_k) {
    if (k < 1) throw ConfigError("eval.recall_k entries must be >= 1");
  }
  t.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file '" + path.string() + "' does not exist");
  }
  return parse_run_config(io::read_file(path), path.parent_path(), overrides, path.string());
}

}  // namespace gnolr::config
