#pragma once

// Tabular cohort data: schema, immutable column store, ingestion,
// preprocessing (z-scores, one-hot), fold planning and a synthetic generator.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fsel/csv.hpp"
#include "fsel/errors.hpp"
#include "fsel/format.hpp"
#include "fsel/rng.hpp"

namespace fsel {

enum class Role { Numeric, Nominal, Target, Ignored };

// The five attribute groups of the cohort schema.
enum class Group { School, Admission, Cost, Student, Family };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::Numeric: return "numeric";
    case Role::Nominal: return "nominal";
    case Role::Target: return "target";
    case Role::Ignored: return "ignored";
  }
  return "?";
}

inline std::string_view to_string(Group g) {
  switch (g) {
    case Group::School: return "school";
    case Group::Admission: return "admission";
    case Group::Cost: return "cost";
    case Group::Student: return "student";
    case Group::Family: return "family";
  }
  return "?";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::Numeric, Role::Nominal, Role::Target, Role::Ignored})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

inline std::optional<Group> parse_group(std::string_view s) {
  for (Group g : {Group::School, Group::Admission, Group::Cost, Group::Student, Group::Family})
    if (to_string(g) == s) return g;
  return std::nullopt;
}

struct ColumnSpec {
  std::string name;
  Role role = Role::Numeric;
  Group group = Group::School;

  bool operator==(const ColumnSpec&) const = default;
};

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"", "NULL", "PrivacySuppressed"};
  return tokens;
}

struct AttributeSchema {
  std::vector<ColumnSpec> columns;
  std::set<std::string> missing_tokens = default_missing_tokens();

  bool operator==(const AttributeSchema&) const = default;

  // Throws ConfigError unless exactly one target exists and names are unique.
  void validate() const {
    std::set<std::string> seen;
    std::size_t targets = 0;
    for (const auto& c : columns) {
      if (c.name.empty()) throw ConfigError("schema: empty column name");
      if (!seen.insert(c.name).second) throw ConfigError("schema: duplicate column '" + c.name + "'");
      if (c.role == Role::Target) ++targets;
    }
    if (targets != 1) throw ConfigError("schema: expected exactly one target column, found " + std::to_string(targets));
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return i;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Income classes

enum class IncomeClass : int { VeryLow = 0, Low = 1, Middle = 2, High = 3 };

inline constexpr int kIncomeClassCount = 4;

inline std::string_view to_string(IncomeClass c) {
  switch (c) {
    case IncomeClass::VeryLow: return "VeryLow";
    case IncomeClass::Low: return "Low";
    case IncomeClass::Middle: return "Middle";
    case IncomeClass::High: return "High";
  }
  return "?";
}

// Half-open bands [0, 25000), [25000, 37500), [37500, 50000), [50000, inf).
inline IncomeClass discretize_income(double mean_income) {
  if (!std::isfinite(mean_income) || mean_income < 0.0)
    throw DataError("income must be finite and non-negative");
  if (mean_income < 25000.0) return IncomeClass::VeryLow;
  if (mean_income < 37500.0) return IncomeClass::Low;
  if (mean_income < 50000.0) return IncomeClass::Middle;
  return IncomeClass::High;
}

// ---------------------------------------------------------------------------
// Dataset

// A schema attribute that survives into the data (not target, not ignored).
// Feature columns refer back to it so votes can be counted per attribute.
struct Attribute {
  std::string name;
  Group group = Group::School;
  bool nominal = false;

  bool operator==(const Attribute&) const = default;
};

// One model-facing column. Numeric features keep values; nominal features keep
// category codes plus their dictionary. One-hot indicators are numeric 0/1.
struct Feature {
  std::string name;
  std::size_t parent = 0;
  bool nominal = false;
  bool indicator = false;
  std::vector<double> values;
  std::vector<int> codes;
  std::vector<std::string> categories;

  bool operator==(const Feature&) const = default;

  double at(std::size_t row) const { return nominal ? static_cast<double>(codes[row]) : values[row]; }
  std::size_t size() const { return nominal ? codes.size() : values.size(); }
};

struct Provenance {
  // Attribute indices planted with class signal (synthetic data only).
  std::vector<std::size_t> informative;

  bool operator==(const Provenance&) const = default;
};

class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Attribute> attributes, std::vector<Feature> features, std::vector<int> labels,
          std::vector<std::string> class_names, Provenance provenance = {}, AttributeSchema schema = {})
      : schema_(std::move(schema)),
        attributes_(std::move(attributes)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        class_names_(std::move(class_names)),
        provenance_(std::move(provenance)) {
    const int k = class_count();
    if (k < 1) throw std::invalid_argument("dataset: no classes");
    for (int y : labels_)
      if (y < 0 || y >= k) throw std::invalid_argument("dataset: label out of range");
    for (const auto& f : features_) {
      if (f.size() != labels_.size()) throw std::invalid_argument("dataset: column '" + f.name + "' has wrong length");
      if (f.parent >= attributes_.size()) throw std::invalid_argument("dataset: bad parent for '" + f.name + "'");
    }
  }

  std::size_t n_rows() const { return labels_.size(); }
  std::size_t n_features() const { return features_.size(); }
  std::size_t n_attributes() const { return attributes_.size(); }
  int class_count() const { return static_cast<int>(class_names_.size()); }

  const AttributeSchema& schema() const { return schema_; }
  std::span<const Attribute> attributes() const { return attributes_; }
  const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }
  std::span<const Feature> features() const { return features_; }
  const Feature& feature(std::size_t j) const { return features_.at(j); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const Provenance& provenance() const { return provenance_; }

  std::size_t parent_of(std::size_t feature) const { return features_.at(feature).parent; }

  // Feature columns belonging to any of the given attributes, in column order.
  std::vector<std::size_t> features_of(std::span<const std::size_t> attrs) const {
    std::vector<char> want(attributes_.size(), 0);
    for (auto a : attrs) want.at(a) = 1;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < features_.size(); ++j)
      if (want[features_[j].parent]) out.push_back(j);
    return out;
  }

  // Sorted, de-duplicated parent attributes of a feature set.
  std::vector<std::size_t> parents_of(std::span<const std::size_t> feats) const {
    std::set<std::size_t> s;
    for (auto j : feats) s.insert(parent_of(j));
    return {s.begin(), s.end()};
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count()), 0);
    for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  Dataset select_rows(std::span<const std::size_t> rows) const {
    std::vector<Feature> feats = features_;
    for (std::size_t j = 0; j < feats.size(); ++j) {
      auto& f = feats[j];
      const auto& src = features_[j];
      if (f.nominal) {
        f.codes.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) f.codes[i] = src.codes.at(rows[i]);
      } else {
        f.values.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) f.values[i] = src.values.at(rows[i]);
      }
    }
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = labels_.at(rows[i]);
    return Dataset(attributes_, std::move(feats), std::move(labels), class_names_, provenance_, schema_);
  }

  // Keeps only the listed feature columns; the attribute table is unchanged.
  Dataset select_features(std::span<const std::size_t> feats) const {
    std::vector<Feature> out;
    out.reserve(feats.size());
    for (auto j : feats) out.push_back(features_.at(j));
    return Dataset(attributes_, std::move(out), labels_, class_names_, provenance_, schema_);
  }

  Dataset with_features(std::vector<Feature> feats) const {
    return Dataset(attributes_, std::move(feats), labels_, class_names_, provenance_, schema_);
  }

  bool operator==(const Dataset&) const = default;

 private:
  AttributeSchema schema_;
  std::vector<Attribute> attributes_;
  std::vector<Feature> features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  Provenance provenance_;
};

inline std::vector<std::string> income_class_names() {
  return {"VeryLow", "Low", "Middle", "High"};
}

// ---------------------------------------------------------------------------
// Ingestion

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline Dataset dataset_from_rows(const std::vector<csv::Row>& rows, const AttributeSchema& schema,
                                 const std::string& origin = "input") {
  schema.validate();
  if (rows.empty()) throw DataError(origin + ": missing header row");
  const auto& header = rows.front();

  std::vector<std::size_t> schema_to_csv(schema.columns.size());
  {
    std::set<std::string> header_names;
    for (const auto& h : header)
      if (!header_names.insert(h).second) throw DataError(origin + ": duplicate header column '" + h + "'");
    for (const auto& h : header)
      if (!schema.index_of(h)) throw DataError(origin + ": header column '" + h + "' not covered by schema");
    for (std::size_t s = 0; s < schema.columns.size(); ++s) {
      auto it = std::find(header.begin(), header.end(), schema.columns[s].name);
      if (it == header.end()) throw DataError(origin + ": header lacks schema column '" + schema.columns[s].name + "'");
      schema_to_csv[s] = static_cast<std::size_t>(it - header.begin());
    }
  }

  std::vector<Attribute> attributes;
  std::vector<Feature> features;
  std::vector<std::size_t> feature_src;
  std::optional<std::size_t> target_src;
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const auto& c = schema.columns[s];
    if (c.role == Role::Target) target_src = schema_to_csv[s];
    if (c.role != Role::Numeric && c.role != Role::Nominal) continue;
    Feature f;
    f.name = c.name;
    f.parent = attributes.size();
    f.nominal = c.role == Role::Nominal;
    attributes.push_back({c.name, c.group, f.nominal});
    features.push_back(std::move(f));
    feature_src.push_back(schema_to_csv[s]);
  }

  std::vector<std::unordered_map<std::string, int>> dictionaries(features.size());
  std::vector<int> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError(origin + ": row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(header.size()));
    auto missing = [&](std::size_t col) { return schema.missing_tokens.count(std::string(detail::trim(row[col]))) > 0; };
    bool drop = missing(*target_src);
    for (std::size_t j = 0; j < features.size() && !drop; ++j) drop = missing(feature_src[j]);
    if (drop) continue;

    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto& tok = row[feature_src[j]];
      if (features[j].nominal) continue;
      if (!detail::parse_double(tok))
        throw DataError(origin + ": row " + std::to_string(r + 1) + ": non-numeric value '" + tok + "' in column '" +
                        features[j].name + "'");
    }
    const auto income = detail::parse_double(row[*target_src]);
    if (!income) throw DataError(origin + ": row " + std::to_string(r + 1) + ": non-numeric target '" + row[*target_src] + "'");
    labels.push_back(static_cast<int>(discretize_income(*income)));

    for (std::size_t j = 0; j < features.size(); ++j) {
      auto& f = features[j];
      const std::string tok(detail::trim(row[feature_src[j]]));
      if (f.nominal) {
        auto [it, inserted] = dictionaries[j].try_emplace(tok, static_cast<int>(f.categories.size()));
        if (inserted) f.categories.push_back(tok);
        f.codes.push_back(it->second);
      } else {
        f.values.push_back(*detail::parse_double(tok));
      }
    }
  }
  if (labels.empty()) throw DataError(origin + ": no rows left after dropping missing values");
  return Dataset(std::move(attributes), std::move(features), std::move(labels), income_class_names(), {}, schema);
}

// Reads a CSV with a header row. Rows with a missing token in any used column
// are dropped; the target column is discretized into income classes.
inline Dataset load_csv(const std::filesystem::path& path, const AttributeSchema& schema) {
  return dataset_from_rows(csv::read_file(path), schema, path.string());
}

// ---------------------------------------------------------------------------
// Standardization

struct ColumnScale {
  std::string name;
  double mean = 0.0;
  double sd = 1.0;

  bool operator==(const ColumnScale&) const = default;
};

struct StandardizationParams {
  std::vector<ColumnScale> columns;
  std::vector<std::string> dropped;

  const ColumnScale* find(std::string_view name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline ColumnScale fit_scale(const Feature& f) {
  const auto n = f.values.size();
  if (n < 2) throw DataError("cannot standardize '" + f.name + "' with fewer than 2 rows");
  double mean = 0.0;
  for (double v : f.values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : f.values) ss += (v - mean) * (v - mean);
  return {f.name, mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

// Applies previously fitted params; columns without params pass through.
inline Dataset apply_standardization(const Dataset& d, const StandardizationParams& params) {
  std::vector<Feature> out;
  for (const auto& f : d.features()) {
    if (std::find(params.dropped.begin(), params.dropped.end(), f.name) != params.dropped.end()) continue;
    Feature g = f;
    if (!f.nominal && !f.indicator) {
      if (const auto* s = params.find(f.name)) {
        for (double& v : g.values) v = (v - s->mean) / s->sd;
      }
    }
    out.push_back(std::move(g));
  }
  return d.with_features(std::move(out));
}

// z-scores every numeric (non-indicator) column using the sample sd.
// Constant columns raise DataError unless drop_constants is set.
inline std::pair<Dataset, StandardizationParams> standardize(const Dataset& d, bool drop_constants = false) {
  StandardizationParams params;
  for (const auto& f : d.features()) {
    if (f.nominal || f.indicator) continue;
    auto s = fit_scale(f);
    if (!(s.sd > 0.0)) {
      if (!drop_constants) throw DataError("column '" + f.name + "' is constant and cannot be standardized");
      params.dropped.push_back(f.name);
      continue;
    }
    params.columns.push_back(std::move(s));
  }
  return {apply_standardization(d, params), params};
}

// ---------------------------------------------------------------------------
// One-hot encoding

inline Dataset one_hot_encode(const Dataset& d) {
  std::vector<Feature> out;
  for (const auto& f : d.features()) {
    if (!f.nominal) {
      out.push_back(f);
      continue;
    }
    for (std::size_t c = 0; c < f.categories.size(); ++c) {
      Feature g;
      g.name = f.name + "=" + f.categories[c];
      g.parent = f.parent;
      g.indicator = true;
      g.values.resize(f.codes.size());
      for (std::size_t i = 0; i < f.codes.size(); ++i) g.values[i] = f.codes[i] == static_cast<int>(c) ? 1.0 : 0.0;
      out.push_back(std::move(g));
    }
  }
  return d.with_features(std::move(out));
}

// ---------------------------------------------------------------------------
// Fold planning

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;
  bool stratified = false;

  bool operator==(const FoldPlan&) const = default;

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) rows.push_back(i);
    return rows;
  }

  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) rows.push_back(i);
    return rows;
  }
};

// Shuffles rows (per class when stratified), concatenates them class by class
// and deals them round-robin, so fold sizes and per-class counts both differ by
// at most one.
inline FoldPlan make_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed, bool stratified) {
  if (k < 2) throw std::invalid_argument("make_folds: k must be at least 2");
  if (labels.size() < k) throw std::invalid_argument("make_folds: more folds than rows");

  Rng rng(derive_seed(seed, {0xF01D}));
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  if (stratified) {
    const int max_label = *std::max_element(labels.begin(), labels.end());
    for (int c = 0; c <= max_label; ++c) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == c) rows.push_back(i);
      rng.shuffle(rows.begin(), rows.end());
      order.insert(order.end(), rows.begin(), rows.end());
    }
  } else {
    order.resize(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
  }

  FoldPlan plan{k, std::vector<std::size_t>(labels.size()), seed, stratified};
  for (std::size_t pos = 0; pos < order.size(); ++pos) plan.assignments[order[pos]] = pos % k;
  return plan;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  std::size_t n_rows = 1500;
  std::size_t n_informative = 5;
  std::size_t n_noise = 25;
  int class_count = 4;
  std::uint64_t seed = 0;
  // Distance between adjacent class means on an informative column, in units
  // of the within-class sd.
  double separation = 1.0;
};

// Informative columns are N(mu[c][j], 1) with mu[c][j] = separation * pi_j(c),
// where pi_j is a column-specific cyclic shift of the class order, so every
// pair of classes is separated on some column and no single column carries all
// the signal. Noise columns are N(0, 1) independent of the class. Planted and
// noise columns are interleaved at seed-chosen positions.
inline Dataset synth_generate(const SynthSpec& spec) {
  if (spec.class_count < 2 || spec.class_count > 4) throw std::invalid_argument("synth: class_count must be 2, 3 or 4");
  if (spec.n_informative < 1) throw std::invalid_argument("synth: need at least one informative column");
  if (spec.n_rows < static_cast<std::size_t>(spec.class_count))
    throw std::invalid_argument("synth: fewer rows than classes");

  const std::size_t d = spec.n_informative + spec.n_noise;
  const auto k = static_cast<std::size_t>(spec.class_count);
  Rng rng(derive_seed(spec.seed, {0x5717}));

  std::vector<int> labels(spec.n_rows);
  for (std::size_t i = 0; i < spec.n_rows; ++i) labels[i] = static_cast<int>(i % k);
  rng.shuffle(labels.begin(), labels.end());

  std::vector<std::size_t> slots(d);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  rng.shuffle(slots.begin(), slots.end());
  std::vector<char> is_informative(d, 0);
  for (std::size_t j = 0; j < spec.n_informative; ++j) is_informative[slots[j]] = 1;

  std::vector<Attribute> attributes;
  std::vector<Feature> features;
  Provenance prov;
  std::size_t informative_seen = 0;
  for (std::size_t a = 0; a < d; ++a) {
    Feature f;
    f.name = "x" + std::to_string(a);
    f.parent = a;
    f.values.resize(spec.n_rows);
    if (is_informative[a]) {
      const std::size_t shift = informative_seen++ % k;
      for (std::size_t i = 0; i < spec.n_rows; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        const double mu = spec.separation * static_cast<double>((c + shift) % k);
        f.values[i] = mu + rng.normal();
      }
      prov.informative.push_back(a);
    } else {
      for (std::size_t i = 0; i < spec.n_rows; ++i) f.values[i] = rng.normal();
    }
    attributes.push_back({f.name, Group::School, false});
    features.push_back(std::move(f));
  }

  std::vector<std::string> names;
  if (k == 4) {
    names = income_class_names();
  } else {
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
  }
  return Dataset(std::move(attributes), std::move(features), std::move(labels), std::move(names), std::move(prov));
}

// Representative mean income for each class, inside its band.
inline double representative_income(int cls) {
  static constexpr double kIncome[kIncomeClassCount] = {20000.0, 30000.0, 42500.0, 60000.0};
  if (cls < 0 || cls >= kIncomeClassCount) throw std::invalid_argument("representative_income: class out of range");
  return kIncome[cls];
}

// Schema for a numeric-only dataset with an `income` target column.
inline AttributeSchema numeric_schema(const Dataset& d, const std::string& target = "income") {
  AttributeSchema s;
  for (const auto& a : d.attributes()) s.columns.push_back({a.name, Role::Numeric, a.group});
  s.columns.push_back({target, Role::Target, Group::School});
  return s;
}

// Header plus one row per instance; the class is written back as a
// representative income so the file round-trips through load_csv.
inline std::vector<csv::Row> income_csv_rows(const Dataset& d, const std::string& target = "income") {
  if (d.class_count() != kIncomeClassCount) throw std::invalid_argument("income_csv_rows: need four income classes");
  std::vector<csv::Row> rows;
  csv::Row header;
  for (const auto& f : d.features()) {
    if (f.nominal || f.indicator) throw std::invalid_argument("income_csv_rows: numeric columns only");
    header.push_back(f.name);
  }
  header.push_back(target);
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    csv::Row r;
    for (const auto& f : d.features()) r.push_back(fmt17(f.values[i]));
    r.push_back(fmt17(representative_income(d.labels()[i])));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fsel
