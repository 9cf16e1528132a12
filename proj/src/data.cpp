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

#include "gnolr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gnolr/binary_io.hpp"
#include "gnolr/errors.hpp"

namespace gnolr::data {

namespace {

constexpr std::string_view kBundleMagic = "GNB1";
constexpr std::uint32_t kBundleVersion = 1;

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Splits one CSV record; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no,
                                        const std::string& source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_started_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_started_quoted = false;
    } else if (ch == '"' && cur.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) {
    throw IngestionError(source + ":" + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string line_error(const std::string& source, std::size_t line_no, const std::string& what) {
  return source + ":" + std::to_string(line_no) + ": " + what;
}

}  // namespace

BinningSpec fit_bins(std::span<const double> train_values, int n_bins) {
  if (n_bins < 1) throw ArgumentError("n_bins must be >= 1");
  if (train_values.empty()) throw IngestionError("cannot fit bins without training values");
  std::vector<double> sorted(train_values.begin(), train_values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto bins = static_cast<std::size_t>(n_bins);
  BinningSpec spec;
  for (std::size_t i = 1; i < bins; ++i) {
    // nearest rank: ceil(i * n / bins), 1-based
    std::size_t rank = (i * n + bins - 1) / bins;
    rank = std::clamp<std::size_t>(rank, 1, n);
    const double b = sorted[rank - 1];
    if (spec.cut_points.empty() || spec.cut_points.back() != b) spec.cut_points.push_back(b);
  }
  return spec;
}

int apply_bins(double value, const BinningSpec& spec) {
  const auto it = std::lower_bound(spec.cut_points.begin(), spec.cut_points.end(), value);
  return static_cast<int>(it - spec.cut_points.begin());
}

int binarize_ratings(double rating, double threshold) { return rating > threshold ? 1 : 0; }

std::int64_t FeatureColumn::rows() const {
  if (kind == FeatureKind::kCategorical) return static_cast<std::int64_t>(vocabulary.size()) + 1;
  return n_bins + 1;
}

std::int32_t FeatureColumn::encode(std::string_view raw) const {
  if (kind == FeatureKind::kNumeric) {
    double v = 0.0;
    if (!parse_double(raw, v)) return encoders::kOovRow;
    return apply_bins(v, bins) + 1;
  }
  const auto it = index_.find(std::string(raw));
  return it == index_.end() ? encoders::kOovRow : it->second;
}

void FeatureColumn::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    index_.emplace(vocabulary[i], static_cast<std::int32_t>(i + 1));
  }
}

RawTable parse_interactions_csv(std::string_view text, const IngestOptions& opts,
                                const std::string& source) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty() || lines[0].empty()) throw IngestionError(source + ": missing CSV header");

  const std::vector<std::string> header = split_csv_line(lines[0], 1, source);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second) {
      throw IngestionError(source + ": duplicate column '" + header[i] + "'");
    }
  }
  auto require = [&](const std::string& name) {
    const auto it = col.find(name);
    if (it == col.end()) throw IngestionError(source + ": missing required column '" + name + "'");
    return it->second;
  };
  const std::size_t c_user = require("user_id");
  const std::size_t c_item = require("item_id");
  const std::size_t c_time = require("timestamp");

  std::vector<std::size_t> c_user_key;
  for (const auto& k : opts.user_key_columns) c_user_key.push_back(require(k));
  if (c_user_key.empty()) c_user_key.push_back(c_user);

  RawTable table;
  std::vector<std::size_t> c_uf;
  std::vector<std::size_t> c_if;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("uf_", 0) == 0) {
      table.user_feature_names.push_back(header[i]);
      c_uf.push_back(i);
    } else if (header[i].rfind("if_", 0) == 0) {
      table.item_feature_names.push_back(header[i]);
      c_if.push_back(i);
    }
  }
  for (const auto& name : opts.numeric_columns) {
    if (name.rfind("uf_", 0) != 0 && name.rfind("if_", 0) != 0) {
      throw ConfigError("numeric column '" + name + "' is not a uf_/if_ feature column");
    }
    require(name);
  }
  table.numeric_columns = opts.numeric_columns;

  std::vector<std::size_t> c_feedback;
  std::size_t c_rating = 0;
  const bool rating_mode = !opts.rating_column.empty();
  if (rating_mode) {
    c_rating = require(opts.rating_column);
    table.feedback_names = opts.feedback.empty() ? std::vector<std::string>{"positive"}
                                                 : opts.feedback;
    if (table.feedback_names.size() != 1) {
      throw ConfigError("rating-derived data has exactly one feedback type");
    }
  } else {
    if (opts.feedback.empty()) throw ConfigError("no feedback columns declared");
    for (const auto& f : opts.feedback) c_feedback.push_back(require(f));
    table.feedback_names = opts.feedback;
  }

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::size_t line_no = ln + 1;
    std::vector<std::string> f = split_csv_line(lines[ln], line_no, source);
    if (f.size() != header.size()) {
      throw IngestionError(line_error(source, line_no,
                                      "expected " + std::to_string(header.size()) +
                                          " fields, found " + std::to_string(f.size())));
    }
    RawInteraction r;
    std::string key;
    for (std::size_t i = 0; i < c_user_key.size(); ++i) {
      if (i > 0) key.push_back('|');
      key += f[c_user_key[i]];
    }
    r.user_id = std::move(key);
    r.item_id = f[c_item];
    if (r.user_id.empty() || r.item_id.empty()) {
      throw IngestionError(line_error(source, line_no, "empty user_id or item_id"));
    }
    if (!parse_int64(f[c_time], r.timestamp)) {
      throw IngestionError(line_error(source, line_no, "missing or malformed timestamp '" +
                                                           f[c_time] + "'"));
    }
    for (std::size_t c : c_uf) r.user_features.push_back(f[c]);
    for (std::size_t c : c_if) r.item_features.push_back(f[c]);
    if (rating_mode) {
      double rating = 0.0;
      if (!parse_double(f[c_rating], rating)) {
        throw IngestionError(line_error(source, line_no, "malformed rating '" + f[c_rating] + "'"));
      }
      r.feedback.push_back(static_cast<std::uint8_t>(binarize_ratings(rating, opts.rating_threshold)));
    } else {
      for (std::size_t i = 0; i < c_feedback.size(); ++i) {
        const std::string& v = f[c_feedback[i]];
        if (v != "0" && v != "1") {
          throw IngestionError(line_error(source, line_no, "feedback '" + opts.feedback[i] +
                                                               "' must be 0 or 1, got '" + v + "'"));
        }
        r.feedback.push_back(v == "1" ? 1 : 0);
      }
    }
    table.rows.push_back(std::move(r));
  }
  if (opts.id_features) {
    table.user_feature_names.insert(table.user_feature_names.begin(), "user_id");
    table.item_feature_names.insert(table.item_feature_names.begin(), "item_id");
    for (auto& r : table.rows) {
      r.user_features.insert(r.user_features.begin(), r.user_id);
      r.item_features.insert(r.item_features.begin(), r.item_id);
    }
  }
  return table;
}

RawTable read_interactions_csv(const std::filesystem::path& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open CSV '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_interactions_csv(ss.str(), opts, path.string());
}

SplitIndices chronological_split(std::span<const std::int64_t> timestamps,
                                 double train_fraction, double validation_fraction_of_train) {
  if (timestamps.empty()) throw IngestionError("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0,1)");
  }
  if (!(validation_fraction_of_train >= 0.0 && validation_fraction_of_train < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0,1)");
  }
  std::vector<std::size_t> order(timestamps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return timestamps[a] < timestamps[b];
  });
  const auto n = static_cast<double>(order.size());
  // The epsilon keeps exact products such as 0.7 * 10 from flooring to 6.
  const auto n_history = static_cast<std::size_t>(std::floor(n * train_fraction + 1e-9));
  const auto n_fit = static_cast<std::size_t>(
      std::floor(static_cast<double>(n_history) * (1.0 - validation_fraction_of_train) + 1e-9));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_fit));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_fit),
                        order.begin() + static_cast<std::ptrdiff_t>(n_history));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_history), order.end());
  return out;
}

std::vector<std::int64_t> DatasetBundle::vocab_sizes(Side side) const {
  const auto& cols = side == Side::kUser ? user_columns : item_columns;
  std::vector<std::int64_t> out;
  for (const auto& c : cols) out.push_back(c.rows());
  return out;
}

const Split& DatasetBundle::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "validation") return validation;
  if (name == "test") return test;
  throw ArgumentError("unknown split '" + std::string(name) + "'");
}

std::string DatasetBundle::fingerprint() const {
  std::ostringstream ss;
  ss << "T=" << T() << ";feedback=";
  for (const auto& n : schema.ordered_names()) ss << n << ',';
  for (const auto* cols : {&user_columns, &item_columns}) {
    ss << (cols == &user_columns ? ";user=" : ";item=");
    for (const auto& c : *cols) {
      ss << c.name << '/' << (c.kind == FeatureKind::kNumeric ? 'n' : 'c') << c.rows() << ',';
    }
  }
  return ss.str();
}

DatasetBundle prepare_bundle(const RawTable& raw, const PrepareOptions& opts) {
  std::vector<std::int64_t> ts;
  ts.reserve(raw.rows.size());
  for (const auto& r : raw.rows) ts.push_back(r.timestamp);
  const SplitIndices idx =
      chronological_split(ts, opts.train_fraction, opts.validation_fraction_of_train);
  if (idx.train.empty()) throw IngestionError("training split is empty");

  DatasetBundle b;
  auto fit_columns = [&](const std::vector<std::string>& names, Side side,
                         auto value_of) -> std::vector<FeatureColumn> {
    std::vector<FeatureColumn> cols;
    for (std::size_t f = 0; f < names.size(); ++f) {
      FeatureColumn c;
      c.name = names[f];
      c.side = side;
      c.n_bins = opts.n_bins;
      c.kind = raw.numeric_columns.contains(names[f]) ? FeatureKind::kNumeric
                                                      : FeatureKind::kCategorical;
      if (c.kind == FeatureKind::kNumeric) {
        std::vector<double> values;
        for (std::size_t r : idx.train) {
          double v = 0.0;
          if (parse_double(value_of(raw.rows[r], f), v)) values.push_back(v);
        }
        if (values.empty()) {
          throw IngestionError("numeric feature '" + c.name + "' has no training values");
        }
        c.bins = fit_bins(values, opts.n_bins);
      } else {
        std::unordered_map<std::string, std::int32_t> seen;
        for (std::size_t r : idx.train) {
          const std::string& v = value_of(raw.rows[r], f);
          if (seen.emplace(v, static_cast<std::int32_t>(seen.size() + 1)).second) {
            c.vocabulary.push_back(v);
          }
        }
      }
      c.reindex();
      cols.push_back(std::move(c));
    }
    return cols;
  };
  b.user_columns = fit_columns(raw.user_feature_names, Side::kUser,
                               [](const RawInteraction& r, std::size_t f) -> const std::string& {
                                 return r.user_features[f];
                               });
  b.item_columns = fit_columns(raw.item_feature_names, Side::kItem,
                               [](const RawInteraction& r, std::size_t f) -> const std::string& {
                                 return r.item_features[f];
                               });

  const std::size_t T = raw.feedback_names.size();
  std::vector<std::int64_t> counts(T, 0);
  for (std::size_t r : idx.train) {
    for (std::size_t t = 0; t < T; ++t) counts[t] += raw.rows[r].feedback[t];
  }
  b.schema = ordinal::make_schema(raw.feedback_names, counts);

  std::unordered_map<std::string, std::int64_t> user_index;
  std::unordered_map<std::string, std::int64_t> item_index;
  for (const auto* part : {&idx.train, &idx.validation, &idx.test}) {
    for (std::size_t r : *part) {
      if (user_index.emplace(raw.rows[r].user_id, static_cast<std::int64_t>(b.users.size())).second) {
        b.users.push_back(raw.rows[r].user_id);
      }
      if (item_index.emplace(raw.rows[r].item_id, static_cast<std::int64_t>(b.items.size())).second) {
        b.items.push_back(raw.rows[r].item_id);
      }
    }
  }

  auto build = [&](const std::vector<std::size_t>& rows) {
    Split s;
    s.T = static_cast<int>(T);
    const auto n = static_cast<Eigen::Index>(rows.size());
    s.user_features.resize(n, static_cast<Eigen::Index>(b.user_columns.size()));
    s.item_features.resize(n, static_cast<Eigen::Index>(b.item_columns.size()));
    s.feedback.reserve(rows.size() * T);
    for (Eigen::Index i = 0; i < n; ++i) {
      const RawInteraction& r = raw.rows[rows[static_cast<std::size_t>(i)]];
      s.user.push_back(user_index.at(r.user_id));
      s.item.push_back(item_index.at(r.item_id));
      s.timestamp.push_back(r.timestamp);
      for (std::size_t f = 0; f < b.user_columns.size(); ++f) {
        s.user_features(i, static_cast<Eigen::Index>(f)) = b.user_columns[f].encode(r.user_features[f]);
      }
      for (std::size_t f = 0; f < b.item_columns.size(); ++f) {
        s.item_features(i, static_cast<Eigen::Index>(f)) = b.item_columns[f].encode(r.item_features[f]);
      }
      const auto bits = ordinal::to_sparsity_order(r.feedback, b.schema.order);
      s.feedback.insert(s.feedback.end(), bits.begin(), bits.end());
      s.labels.push_back(ordinal::map_to_ordinal(bits, static_cast<int>(T)));
    }
    return s;
  };
  b.train = build(idx.train);
  b.validation = build(idx.validation);
  b.test = build(idx.test);
  return b;
}

namespace {

void put_ids(io::BinaryWriter& w, const IdMatrix& m) {
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  w.put_array<std::int32_t>(std::span<const std::int32_t>(m.data(), static_cast<std::size_t>(m.size())));
}

IdMatrix get_ids(io::BinaryReader& r) {
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  const auto data = r.get_array<std::int32_t>();
  if (data.size() != rows * cols) r.fail("id matrix size mismatch");
  IdMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

void put_split(io::BinaryWriter& w, const Split& s) {
  w.put<std::int32_t>(s.T);
  w.put_array<std::int64_t>(s.user);
  w.put_array<std::int64_t>(s.item);
  w.put_array<std::int64_t>(s.timestamp);
  put_ids(w, s.user_features);
  put_ids(w, s.item_features);
  w.put_array<std::uint8_t>(s.feedback);
  std::vector<std::int32_t> labels;
  for (const auto& l : s.labels) labels.push_back(l.k);
  w.put_array<std::int32_t>(labels);
}

Split get_split(io::BinaryReader& r) {
  Split s;
  s.T = r.get<std::int32_t>();
  s.user = r.get_array<std::int64_t>();
  s.item = r.get_array<std::int64_t>();
  s.timestamp = r.get_array<std::int64_t>();
  s.user_features = get_ids(r);
  s.item_features = get_ids(r);
  s.feedback = r.get_array<std::uint8_t>();
  for (std::int32_t k : r.get_array<std::int32_t>()) s.labels.push_back(OrdinalLabel{k});
  const std::size_t n = s.labels.size();
  if (s.user.size() != n || s.item.size() != n || s.timestamp.size() != n ||
      static_cast<std::size_t>(s.user_features.rows()) != n ||
      static_cast<std::size_t>(s.item_features.rows()) != n ||
      s.feedback.size() != n * static_cast<std::size_t>(s.T)) {
    r.fail("inconsistent split arrays");
  }
  return s;
}

void put_columns(io::BinaryWriter& w, const std::vector<FeatureColumn>& cols) {
  w.put<std::uint64_t>(cols.size());
  for (const auto& c : cols) {
    w.put_string(c.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(c.side));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(c.kind));
    w.put<std::int32_t>(c.n_bins);
    w.put<std::uint64_t>(c.vocabulary.size());
    for (const auto& v : c.vocabulary) w.put_string(v);
    w.put_array<double>(c.bins.cut_points);
  }
}

std::vector<FeatureColumn> get_columns(io::BinaryReader& r) {
  std::vector<FeatureColumn> cols(r.get<std::uint64_t>());
  for (auto& c : cols) {
    c.name = r.get_string();
    c.side = static_cast<Side>(r.get<std::uint8_t>());
    c.kind = static_cast<FeatureKind>(r.get<std::uint8_t>());
    c.n_bins = r.get<std::int32_t>();
    c.vocabulary.resize(r.get<std::uint64_t>());
    for (auto& v : c.vocabulary) v = r.get_string();
    c.bins.cut_points = r.get_array<double>();
    c.reindex();
  }
  return cols;
}

}  // namespace

FeatureLayout layout_of(const DatasetBundle& b) {
  return FeatureLayout{b.schema, b.user_columns, b.item_columns};
}

void put_layout(io::BinaryWriter& w, const FeatureLayout& layout) {
  w.put<std::uint64_t>(layout.schema.names.size());
  for (const auto& n : layout.schema.names) w.put_string(n);
  w.put_array<std::int64_t>(layout.schema.positive_counts);
  std::vector<std::uint64_t> order(layout.schema.order.begin(), layout.schema.order.end());
  w.put_array<std::uint64_t>(order);
  put_columns(w, layout.user_columns);
  put_columns(w, layout.item_columns);
}

FeatureLayout get_layout(io::BinaryReader& r) {
  FeatureLayout layout;
  std::vector<std::string> names(r.get<std::uint64_t>());
  for (auto& n : names) n = r.get_string();
  std::vector<std::int64_t> counts = r.get_array<std::int64_t>();
  const std::vector<std::uint64_t> order = r.get_array<std::uint64_t>();
  if (counts.size() != names.size()) r.fail("feedback names and counts differ in length");
  layout.schema = ordinal::make_schema(std::move(names), std::move(counts));
  if (order.size() != layout.schema.order.size() ||
      !std::equal(order.begin(), order.end(), layout.schema.order.begin())) {
    r.fail("stored feedback order does not match the stored counts");
  }
  layout.user_columns = get_columns(r);
  layout.item_columns = get_columns(r);
  return layout;
}

std::string serialize_bundle(const DatasetBundle& b) {
  io::BinaryWriter w;
  w.put_magic(kBundleMagic);
  w.put<std::uint32_t>(kBundleVersion);
  put_layout(w, layout_of(b));
  for (const auto* names : {&b.users, &b.items}) {
    w.put<std::uint64_t>(names->size());
    for (const auto& n : *names) w.put_string(n);
  }
  put_split(w, b.train);
  put_split(w, b.validation);
  put_split(w, b.test);
  return w.bytes();
}

DatasetBundle deserialize_bundle(std::string bytes, const std::string& source) {
  io::BinaryReader r(std::move(bytes), source);
  r.expect_magic(kBundleMagic);
  if (r.get<std::uint32_t>() != kBundleVersion) r.fail("unsupported bundle version");
  DatasetBundle b;
  FeatureLayout layout = get_layout(r);
  b.schema = std::move(layout.schema);
  b.user_columns = std::move(layout.user_columns);
  b.item_columns = std::move(layout.item_columns);
  for (auto* names_out : {&b.users, &b.items}) {
    names_out->resize(r.get<std::uint64_t>());
    for (auto& n : *names_out) n = r.get_string();
  }
  b.train = get_split(r);
  b.validation = get_split(r);
  b.test = get_split(r);
  if (!r.at_end()) r.fail("trailing bytes");
  return b;
}

void write_bundle(const std::filesystem::path& path, const DatasetBundle& bundle) {
  io::write_file_atomic(path, serialize_bundle(bundle));
}

DatasetBundle read_bundle(const std::filesystem::path& path) {
  return deserialize_bundle(io::read_file(path), path.string());
}

IdMatrix gather_rows(const IdMatrix& ids, std::span<const std::size_t> rows) {
  IdMatrix out(static_cast<Eigen::Index>(rows.size()), ids.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = ids.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Lists build_lists(const Split& split, std::size_t max_len, std::mt19937_64& rng) {
  if (max_len < 1) throw ArgumentError("max list length must be >= 1");
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < split.size(); ++r) groups[split.user[r]].push_back(r);
  Lists lists;
  for (auto& [user, rows] : groups) {
    if (rows.size() <= max_len) {
      lists.push_back(std::move(rows));
      continue;
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t begin = 0; begin < rows.size(); begin += max_len) {
      const std::size_t end = std::min(rows.size(), begin + max_len);
      lists.emplace_back(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                         rows.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return lists;
}

std::vector<Batch> make_batches(BatchMode mode, const Split& split, const Lists& lists,
                                std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Batch> batches;
  if (mode == BatchMode::kPointwise) {
    std::vector<std::size_t> perm(split.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t begin = 0; begin < perm.size(); begin += batch_size) {
      const std::size_t end = std::min(perm.size(), begin + batch_size);
      Batch b;
      b.rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                    perm.begin() + static_cast<std::ptrdiff_t>(end));
      batches.push_back(std::move(b));
    }
    return batches;
  }
  std::vector<std::size_t> perm(lists.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t begin = 0; begin < perm.size(); begin += batch_size) {
    const std::size_t end = std::min(perm.size(), begin + batch_size);
    Batch b;
    b.list_offsets.push_back(0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& list = lists[perm[i]];
      b.rows.insert(b.rows.end(), list.begin(), list.end());
      b.list_offsets.push_back(b.rows.size());
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace gnolr::data
