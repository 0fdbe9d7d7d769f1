#pragma once

// Pipeline configuration: line-oriented `key = value` text grouped under
// `[section]` headers. Schema entries are `column.<name> = <role>,<group>`.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsel/classifiers.hpp"
#include "fsel/consensus.hpp"
#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/errors.hpp"
#include "fsel/filters.hpp"
#include "fsel/format.hpp"
#include "fsel/search.hpp"

namespace fsel {

struct PipelineConfig {
  // [data]
  std::string data_path;
  // [schema]
  AttributeSchema schema;
  // [preprocess]
  bool fold_safe = false;
  bool drop_constants = false;
  BinningSpec binning;
  // [selection]
  SelectorKind method = SelectorKind::Ga;
  std::size_t selection_folds = 10;
  std::size_t inner_folds = 5;
  ConsensusConfig consensus;
  GaConfig ga;
  ForwardConfig forward;
  // [evaluation]
  std::vector<ClassifierSpec> classifiers{LogisticRegressionSpec{}, NaiveBayesSpec{}, KnnSpec{1}, KnnSpec{10},
                                          DecisionTreeSpec{}, OneRuleSpec{}};
  std::size_t evaluation_folds = 10;
  std::uint64_t seed = 1;
  std::optional<double> reference_accuracy;
  double reference_tolerance = 0.08;
  // [output]
  std::string output_dir = "out";

  bool operator==(const PipelineConfig&) const = default;

  void validate() const {
    schema.validate();
    if (selection_folds < 2) throw ConfigError("selection.folds must be at least 2");
    if (evaluation_folds < 2) throw ConfigError("evaluation.folds must be at least 2");
    if (inner_folds < 2) throw ConfigError("selection.inner_folds must be at least 2");
    if (binning.n_bins < 2) throw ConfigError("preprocess.bins must be at least 2");
    consensus.validate();
    ga.validate();
    if (!(forward.min_improvement >= 0)) throw ConfigError("forward.min_improvement must be non-negative");
    if (classifiers.empty()) throw ConfigError("evaluation.classifiers must list at least one classifier");
    for (const auto& c : classifiers) fsel::validate(c);
    if (!(reference_tolerance >= 0)) throw ConfigError("evaluation.reference_tolerance must be non-negative");
  }
};

using ConfigSection = std::pair<std::string, std::vector<std::pair<std::string, std::string>>>;

namespace detail {

inline std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim_copy(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace detail

// "lr ridge=1e-08 max_iter=200 tol=1e-08", "knn k=10", "tree", ...
inline ClassifierSpec parse_classifier(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  in >> name;
  std::vector<std::pair<std::string, std::string>> params;
  for (std::string tok; in >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("classifier '" + std::string(text) + "': expected key=value, got '" + tok + "'");
    params.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  auto num = [&](const std::string& v) {
    auto d = detail::parse_double(v);
    if (!d) throw ConfigError("classifier '" + std::string(text) + "': bad number '" + v + "'");
    return *d;
  };
  auto count = [&](const std::string& v) {
    const double d = num(v);
    if (d < 0 || d != std::floor(d)) throw ConfigError("classifier '" + std::string(text) + "': bad count '" + v + "'");
    return static_cast<std::size_t>(d);
  };
  auto unknown = [&](const std::string& k) { return ConfigError("classifier '" + name + "': unknown parameter '" + k + "'"); };

  ClassifierSpec spec;
  if (name == "lr") {
    LogisticRegressionSpec s;
    for (const auto& [k, v] : params) {
      if (k == "ridge") s.ridge = num(v);
      else if (k == "max_iter") s.max_iter = count(v);
      else if (k == "tol") s.tol = num(v);
      else throw unknown(k);
    }
    spec = s;
  } else if (name == "nb") {
    NaiveBayesSpec s;
    for (const auto& [k, v] : params) {
      if (k == "var_floor") s.var_floor = num(v);
      else throw unknown(k);
    }
    spec = s;
  } else if (name == "knn") {
    KnnSpec s;
    for (const auto& [k, v] : params) {
      if (k == "k") s.k = count(v);
      else throw unknown(k);
    }
    spec = s;
  } else if (name == "tree") {
    DecisionTreeSpec s;
    for (const auto& [k, v] : params) {
      if (k == "min_leaf") s.min_leaf = count(v);
      else if (k == "max_depth") s.max_depth = count(v);
      else throw unknown(k);
    }
    spec = s;
  } else if (name == "oner") {
    OneRuleSpec s;
    for (const auto& [k, v] : params) {
      if (k == "bins") s.binning.n_bins = count(v);
      else throw unknown(k);
    }
    spec = s;
  } else {
    throw ConfigError("unknown classifier '" + name + "'");
  }
  validate(spec);
  return spec;
}

inline std::string format_classifier(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticRegressionSpec>)
          return "lr ridge=" + fmt17(s.ridge) + " max_iter=" + std::to_string(s.max_iter) + " tol=" + fmt17(s.tol);
        else if constexpr (std::is_same_v<T, NaiveBayesSpec>) return "nb var_floor=" + fmt17(s.var_floor);
        else if constexpr (std::is_same_v<T, KnnSpec>) return "knn k=" + std::to_string(s.k);
        else if constexpr (std::is_same_v<T, DecisionTreeSpec>)
          return "tree min_leaf=" + std::to_string(s.min_leaf) + " max_depth=" + std::to_string(s.max_depth);
        else return "oner bins=" + std::to_string(s.binning.n_bins);
      },
      spec);
}

inline std::optional<SelectorKind> parse_selector_kind(std::string_view s) {
  for (auto k : {SelectorKind::FilterPanel, SelectorKind::Forward, SelectorKind::Ga})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

// Canonical section/key order used for serialization and report echoes.
inline std::vector<ConfigSection> config_sections(const PipelineConfig& c) {
  std::vector<ConfigSection> out;
  out.push_back({"data", {{"path", c.data_path}}});

  ConfigSection schema{"schema", {}};
  {
    csv::Row tokens(c.schema.missing_tokens.begin(), c.schema.missing_tokens.end());
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) joined += ",";
      joined += "\"";
      for (char ch : tokens[i]) joined += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      joined += "\"";
    }
    schema.second.emplace_back("missing_tokens", joined);
  }
  for (const auto& col : c.schema.columns) {
    std::string v(to_string(col.role));
    if (col.role == Role::Numeric || col.role == Role::Nominal) v += "," + std::string(to_string(col.group));
    schema.second.emplace_back("column." + col.name, v);
  }
  out.push_back(std::move(schema));

  out.push_back({"preprocess",
                 {{"fold_safe", detail::bool_str(c.fold_safe)},
                  {"drop_constants", detail::bool_str(c.drop_constants)},
                  {"bins", std::to_string(c.binning.n_bins)}}});

  out.push_back({"selection",
                 {{"method", std::string(to_string(c.method))},
                  {"folds", std::to_string(c.selection_folds)},
                  {"inner_folds", std::to_string(c.inner_folds)},
                  {"fold_threshold", fmt17(c.consensus.fold_threshold)},
                  {"method_threshold", std::to_string(c.consensus.method_threshold)},
                  {"filter_top_k", std::to_string(c.consensus.filter_top_k)},
                  {"ga.population", std::to_string(c.ga.population_size)},
                  {"ga.crossover_rate", fmt17(c.ga.crossover_rate)},
                  {"ga.mutation_rate", fmt17(c.ga.mutation_rate)},
                  {"ga.generations", std::to_string(c.ga.generations)},
                  {"ga.tournament_size", std::to_string(c.ga.tournament_size)},
                  {"ga.elitism", std::to_string(c.ga.elitism)},
                  {"forward.min_improvement", fmt17(c.forward.min_improvement)},
                  {"forward.max_subset_size", std::to_string(c.forward.max_subset_size.value_or(0))}}});

  std::string classifiers;
  for (std::size_t i = 0; i < c.classifiers.size(); ++i) {
    if (i) classifiers += "; ";
    classifiers += format_classifier(c.classifiers[i]);
  }
  ConfigSection eval{"evaluation",
                     {{"classifiers", classifiers},
                      {"folds", std::to_string(c.evaluation_folds)},
                      {"seed", std::to_string(c.seed)}}};
  if (c.reference_accuracy) eval.second.emplace_back("reference_accuracy", fmt17(*c.reference_accuracy));
  eval.second.emplace_back("reference_tolerance", fmt17(c.reference_tolerance));
  out.push_back(std::move(eval));

  out.push_back({"output", {{"dir", c.output_dir}}});
  return out;
}

inline std::string serialize_config(const PipelineConfig& c) {
  std::string text;
  for (const auto& [section, entries] : config_sections(c)) {
    if (!text.empty()) text += "\n";
    text += "[" + section + "]\n";
    for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
  }
  return text;
}

// Throws ConfigError with the offending line number.
inline PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  c.schema.columns.clear();
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};

  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = detail::trim_copy(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    auto fail = [&](const std::string& msg) { return ConfigError("config line " + std::to_string(line_no) + ": " + msg); };
    if (line.front() == '[') {
      if (line.back() != ']') throw fail("malformed section header");
      section = detail::trim_copy(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("expected key = value");
    const std::string key = detail::trim_copy(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim_copy(std::string_view(line).substr(eq + 1));

    auto number = [&]() {
      auto d = detail::parse_double(value);
      if (!d) throw fail("'" + key + "' expects a number, got '" + value + "'");
      return *d;
    };
    auto count = [&]() {
      const double d = number();
      if (d < 0 || d != std::floor(d) || d > 9.0e15) throw fail("'" + key + "' expects a non-negative integer");
      return static_cast<std::size_t>(d);
    };
    auto boolean = [&]() {
      if (value == "true") return true;
      if (value == "false") return false;
      throw fail("'" + key + "' expects true or false");
    };
    auto unknown = [&]() { return fail("unknown key '" + key + "' in section [" + section + "]"); };

    if (section == "data") {
      if (key == "path") c.data_path = value;
      else throw unknown();
    } else if (section == "schema") {
      if (key == "missing_tokens") {
        c.schema.missing_tokens.clear();
        if (!value.empty()) {
          const auto rows = csv::parse(value);
          if (rows.size() != 1) throw fail("malformed missing_tokens list");
          for (const auto& t : rows[0]) c.schema.missing_tokens.insert(t);
        }
      } else if (key.rfind("column.", 0) == 0) {
        ColumnSpec col;
        col.name = key.substr(7);
        const auto parts = detail::split(value, ',');
        auto role = parse_role(parts[0]);
        if (!role) throw fail("unknown role '" + parts[0] + "'");
        col.role = *role;
        if (parts.size() > 2) throw fail("expected <role>,<group>");
        if (parts.size() == 2) {
          auto group = parse_group(parts[1]);
          if (!group) throw fail("unknown group '" + parts[1] + "'");
          col.group = *group;
        } else if (col.role == Role::Numeric || col.role == Role::Nominal) {
          throw fail("attribute column '" + col.name + "' needs a group");
        }
        if (col.role == Role::Target || col.role == Role::Ignored) col.group = Group::School;
        c.schema.columns.push_back(std::move(col));
      } else {
        throw unknown();
      }
    } else if (section == "preprocess") {
      if (key == "fold_safe") c.fold_safe = boolean();
      else if (key == "drop_constants") c.drop_constants = boolean();
      else if (key == "bins") c.binning.n_bins = count();
      else throw unknown();
    } else if (section == "selection") {
      if (key == "method") {
        auto m = parse_selector_kind(value);
        if (!m) throw fail("unknown selection method '" + value + "' (expected filters, forward or ga)");
        c.method = *m;
      } else if (key == "folds") c.selection_folds = count();
      else if (key == "inner_folds") c.inner_folds = count();
      else if (key == "fold_threshold") c.consensus.fold_threshold = number();
      else if (key == "method_threshold") c.consensus.method_threshold = count();
      else if (key == "filter_top_k") c.consensus.filter_top_k = count();
      else if (key == "ga.population") c.ga.population_size = count();
      else if (key == "ga.crossover_rate") c.ga.crossover_rate = number();
      else if (key == "ga.mutation_rate") c.ga.mutation_rate = number();
      else if (key == "ga.generations") c.ga.generations = count();
      else if (key == "ga.tournament_size") c.ga.tournament_size = count();
      else if (key == "ga.elitism") c.ga.elitism = count();
      else if (key == "forward.min_improvement") c.forward.min_improvement = number();
      else if (key == "forward.max_subset_size") {
        const auto n = count();
        c.forward.max_subset_size = n ? std::optional<std::size_t>(n) : std::nullopt;
      } else throw unknown();
    } else if (section == "evaluation") {
      if (key == "classifiers") {
        c.classifiers.clear();
        for (const auto& item : detail::split(value, ';')) {
          if (item.empty()) continue;
          try {
            c.classifiers.push_back(parse_classifier(item));
          } catch (const ConfigError& e) {
            throw fail(e.what());
          }
        }
      } else if (key == "folds") c.evaluation_folds = count();
      else if (key == "seed") {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size()) throw fail("'seed' expects an unsigned integer");
        c.seed = v;
      }
      else if (key == "reference_accuracy") c.reference_accuracy = number();
      else if (key == "reference_tolerance") c.reference_tolerance = number();
      else throw unknown();
    } else if (section == "output") {
      if (key == "dir") c.output_dir = value;
      else throw unknown();
    } else {
      throw fail("key outside a known section: [" + section + "]");
    }
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace fsel
