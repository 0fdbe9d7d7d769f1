#pragma once

// End-to-end pipeline: ingest -> preprocess -> consensus selection -> subset
// comparison, plus deterministic report emission (JSON, CSV, markdown).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsel/classifiers.hpp"
#include "fsel/config.hpp"
#include "fsel/consensus.hpp"
#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/evaluation.hpp"
#include "fsel/filters.hpp"
#include "fsel/format.hpp"
#include "fsel/search.hpp"

namespace fsel {

inline constexpr const char* kVersion = "0.1.0";

// Seeds for every randomized stage hang off the master seed.
struct StageSeeds {
  std::uint64_t selection_folds;
  std::uint64_t evaluation_folds;
  std::uint64_t ga;
  std::uint64_t forward;

  explicit StageSeeds(std::uint64_t master)
      : selection_folds(derive_seed(master, {1})),
        evaluation_folds(derive_seed(master, {2})),
        ga(derive_seed(master, {3})),
        forward(derive_seed(master, {4})) {}
};

// Global z-scores (unless fold-safe) followed by one-hot encoding.
inline Dataset prepare_dataset(const Dataset& raw, const PipelineConfig& cfg) {
  if (cfg.fold_safe) return one_hot_encode(raw);
  return one_hot_encode(standardize(raw, cfg.drop_constants).first);
}

struct SelectionOutcome {
  SelectorKind method = SelectorKind::Ga;
  std::vector<std::size_t> subset;  // attribute ids
  VoteTally tally;
  std::optional<FilterPanelResult> panel;
  std::optional<SelectionRun> run;
};

inline SelectionOutcome run_selection(const Dataset& prepared, const PipelineConfig& cfg) {
  const StageSeeds seeds(cfg.seed);
  const auto plan = make_folds(prepared.labels(), cfg.selection_folds, seeds.selection_folds, true);

  // In fold-safe mode each round standardizes its own subsample.
  auto wrap = [&](Selector inner) -> Selector {
    if (!cfg.fold_safe) return inner;
    return [inner](const Dataset& sub, std::size_t r) {
      return inner(standardize(sub, true).first, r);
    };
  };

  SelectionOutcome out;
  out.method = cfg.method;
  switch (cfg.method) {
    case SelectorKind::FilterPanel: {
      cfg.consensus.validate();
      std::array<SelectionRun, 5> runs;
      for (std::size_t m = 0; m < kFilterMethods.size(); ++m)
        runs[m] = per_fold_select(prepared, SelectorKind::FilterPanel,
                                  wrap(top_k_filter_selector(kFilterMethods[m], cfg.consensus.filter_top_k, cfg.binning)),
                                  plan);
      auto panel = combine_filter_runs(std::move(runs), cfg.consensus);
      out.subset = panel.selected;
      out.tally = panel.tally;
      out.panel = std::move(panel);
      break;
    }
    case SelectorKind::Forward: {
      ForwardConfig fc = cfg.forward;
      fc.inner_folds = cfg.inner_folds;
      fc.seed = seeds.forward;
      out.run = per_fold_select(prepared, SelectorKind::Forward, wrap(forward_selector(fc)), plan);
      break;
    }
    case SelectorKind::Ga: {
      GaConfig gc = cfg.ga;
      gc.seed = seeds.ga;
      FitnessOptions fo;
      fo.inner_folds = cfg.inner_folds;
      out.run = per_fold_select(prepared, SelectorKind::Ga, wrap(ga_selector(gc, fo)), plan);
      break;
    }
  }
  if (out.run) {
    out.tally = tally_votes(*out.run);
    out.subset = consensus_subset(out.tally, cfg.consensus.fold_threshold);
  }
  return out;
}

inline std::vector<std::size_t> all_attributes(const Dataset& d) {
  std::vector<std::size_t> a(d.n_attributes());
  std::iota(a.begin(), a.end(), std::size_t{0});
  return a;
}

inline ComparisonTable run_comparison(const Dataset& prepared, std::span<const NamedSubset> subsets,
                                      const PipelineConfig& cfg) {
  const StageSeeds seeds(cfg.seed);
  const auto plan = make_folds(prepared.labels(), cfg.evaluation_folds, seeds.evaluation_folds, true);
  CvOptions opts;
  opts.fold_safe = cfg.fold_safe;
  opts.drop_constants = true;
  return compare_subsets(prepared, subsets, cfg.classifiers, plan, opts);
}

struct ReferenceCheck {
  double reference = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool consistent = false;
};

struct PipelineResults {
  PipelineConfig config;
  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;
  std::vector<std::size_t> class_counts;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::optional<SelectionOutcome> selection;
  std::optional<ComparisonTable> comparison;
  std::optional<ReferenceCheck> reference;
};

inline std::string subset_label(SelectorKind k) {
  switch (k) {
    case SelectorKind::FilterPanel: return "filter-methods";
    case SelectorKind::Forward: return "forward-selection";
    case SelectorKind::Ga: return "genetic-algorithm";
  }
  return "selected";
}

inline PipelineResults describe(const Dataset& prepared, const PipelineConfig& cfg) {
  PipelineResults res;
  res.config = cfg;
  for (const auto& a : prepared.attributes()) res.attribute_names.push_back(a.name);
  res.class_names = prepared.class_names();
  res.class_counts = prepared.class_counts();
  res.n_rows = prepared.n_rows();
  res.n_features = prepared.n_features();
  return res;
}

// Phase one and phase two on an already loaded dataset.
inline PipelineResults run_pipeline(const Dataset& raw, const PipelineConfig& cfg) {
  cfg.validate();
  const Dataset prepared = prepare_dataset(raw, cfg);
  PipelineResults res = describe(prepared, cfg);
  res.selection = run_selection(prepared, cfg);

  std::vector<NamedSubset> subsets;
  if (!res.selection->subset.empty()) subsets.push_back({subset_label(cfg.method), res.selection->subset});
  subsets.push_back({"all-attributes", all_attributes(prepared)});
  res.comparison = run_comparison(prepared, subsets, cfg);

  if (cfg.reference_accuracy) {
    for (const auto& row : res.comparison->rows) {
      if (row.subset == subsets.front().name && row.algorithm == "LogisticRegression") {
        const double diff = std::abs(row.metrics.accuracy - *cfg.reference_accuracy);
        res.reference = ReferenceCheck{*cfg.reference_accuracy, row.metrics.accuracy, cfg.reference_tolerance,
                                       diff <= cfg.reference_tolerance};
        break;
      }
    }
  }
  return res;
}

inline PipelineResults run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.data_path.empty()) throw ConfigError("data.path is required");
  return run_pipeline(load_csv(cfg.data_path, cfg.schema), cfg);
}

// ---------------------------------------------------------------------------
// Report emission

enum class ReportFormat { Json, Markdown, Csv };

namespace detail {

inline std::string markdown_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s = "|";
    for (const auto& c : cells) s += " " + c + " |";
    return s + "\n";
  };
  std::string out = line(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

inline nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = round6(m.accuracy);
  j["precision"] = round6(m.precision);
  j["recall"] = round6(m.recall);
  j["f_measure"] = round6(m.f1);
  return j;
}

}  // namespace detail

// Files produced for one format, as (file name, contents). Throws if the
// results carry nothing to report.
inline std::vector<std::pair<std::string, std::string>> render_report(const PipelineResults& r, ReportFormat format) {
  if (!r.selection && !r.comparison) throw std::invalid_argument("emit_report: results are empty");
  std::vector<std::pair<std::string, std::string>> files;
  const auto& names = r.attribute_names;

  switch (format) {
    case ReportFormat::Csv: {
      if (r.selection) {
        files.emplace_back("selection.csv", csv::format(tally_rows(r.selection->tally, names, r.selection->subset)));
        if (r.selection->run) {
          std::vector<csv::Row> rows{{"round", "step", "best_fitness", "mean_fitness", "best_subset"}};
          for (std::size_t round = 0; round < r.selection->run->traces.size(); ++round) {
            const auto& t = r.selection->run->traces[round];
            if (!t) continue;
            for (const auto& rec : t->records)
              rows.push_back({std::to_string(round), std::to_string(rec.step), fmt6(rec.best_fitness),
                              fmt6(rec.mean_fitness), bits_string(rec.best)});
          }
          files.emplace_back("trace.csv", csv::format(rows));
        }
      }
      if (r.comparison) {
        files.emplace_back("comparison.csv", csv::format(comparison_rows(*r.comparison)));
        std::vector<csv::Row> fig{{"subset", "algorithm", "accuracy", "weighted_f1"}};
        for (const auto& row : r.comparison->rows)
          fig.push_back({row.subset, row.algorithm, fmt6(row.metrics.accuracy), fmt6(row.metrics.f1)});
        files.emplace_back("chart.csv", csv::format(fig));
      }
      break;
    }
    case ReportFormat::Markdown: {
      if (r.selection) {
        std::vector<std::vector<std::string>> rows;
        const auto& t = r.selection->tally;
        std::string md;
        if (!t.fractional) {
          for (auto a : r.selection->subset)
            rows.push_back({names[a], std::to_string(t.counts[a]), t.average_rank[a] ? fmt6(*t.average_rank[a]) : ""});
          md = detail::markdown_table({"Attribute", "Votes", "Average Rank"}, rows);
        } else {
          for (auto a : r.selection->subset) rows.push_back({names[a], fmt6(100.0 * t.votes[a]) + "%"});
          md = detail::markdown_table({"Attribute", "Votes"}, rows);
        }
        files.emplace_back("selection.md", md);
      }
      if (r.comparison) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : r.comparison->rows)
          rows.push_back({row.subset, std::to_string(row.size), row.algorithm, fmt6(row.metrics.accuracy),
                          fmt6(row.metrics.precision), fmt6(row.metrics.recall), fmt6(row.metrics.f1)});
        files.emplace_back("comparison.md",
                           detail::markdown_table({"Subset", "N", "Algorithm", "Accuracy", "Precision", "Recall", "F-measure"}, rows));
      }
      break;
    }
    case ReportFormat::Json: {
      nlohmann::ordered_json j;
      j["tool"] = "fsel";
      j["version"] = kVersion;
      j["seed"] = r.config.seed;
      nlohmann::ordered_json cfg;
      for (const auto& [section, entries] : config_sections(r.config)) {
        nlohmann::ordered_json s = nlohmann::ordered_json::object();
        for (const auto& [k, v] : entries) s[k] = v;
        cfg[section] = s;
      }
      j["config"] = cfg;
      nlohmann::ordered_json data;
      data["rows"] = r.n_rows;
      data["attributes"] = r.attribute_names.size();
      data["features"] = r.n_features;
      nlohmann::ordered_json counts = nlohmann::ordered_json::object();
      for (std::size_t c = 0; c < r.class_names.size(); ++c) counts[r.class_names[c]] = r.class_counts[c];
      data["class_counts"] = counts;
      j["data"] = data;
      if (r.selection) {
        const auto& s = *r.selection;
        nlohmann::ordered_json sel;
        sel["method"] = std::string(to_string(s.method));
        nlohmann::ordered_json subset = nlohmann::ordered_json::array();
        for (auto a : s.subset) subset.push_back(names[a]);
        sel["subset"] = subset;
        nlohmann::ordered_json votes = nlohmann::ordered_json::array();
        for (std::size_t a = 0; a < names.size(); ++a) {
          nlohmann::ordered_json v;
          v["attribute"] = names[a];
          if (s.tally.fractional) v["vote_fraction"] = round6(s.tally.votes[a]);
          else v["votes"] = s.tally.counts[a];
          if (s.tally.average_rank[a]) v["average_rank"] = round6(*s.tally.average_rank[a]);
          v["selected"] = std::find(s.subset.begin(), s.subset.end(), a) != s.subset.end();
          votes.push_back(v);
        }
        sel["votes"] = votes;
        j["selection"] = sel;
      }
      if (r.comparison) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : r.comparison->rows) {
          nlohmann::ordered_json o;
          o["subset"] = row.subset;
          o["n"] = row.size;
          o["algorithm"] = row.algorithm;
          const auto m = detail::metrics_json(row.metrics);
          for (auto it = m.begin(); it != m.end(); ++it) o[it.key()] = it.value();
          o["rank"] = row.rank;
          rows.push_back(o);
        }
        j["comparison"] = rows;
      }
      if (r.reference) {
        nlohmann::ordered_json ref;
        ref["accuracy"] = round6(r.reference->reference);
        ref["observed"] = round6(r.reference->observed);
        ref["tolerance"] = round6(r.reference->tolerance);
        ref["consistent"] = r.reference->consistent;
        j["reference"] = ref;
      }
      files.emplace_back("report.json", j.dump(2) + "\n");
      break;
    }
  }
  return files;
}

// Writes each file through a temporary sibling and a rename. Everything is
// rendered before the first write, so a rendering failure leaves no files.
inline std::vector<std::filesystem::path> write_files(const std::filesystem::path& dir,
                                                      const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create output directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> written;
  for (const auto& [name, contents] : files) {
    const auto target = dir / name;
    const auto tmp = dir / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write '" + tmp.string() + "'");
      out << contents;
      if (!out) throw DataError("error writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw DataError("cannot move '" + tmp.string() + "' into place: " + ec.message());
    written.push_back(target);
  }
  return written;
}

inline std::vector<std::filesystem::path> emit_report(const PipelineResults& r, ReportFormat format,
                                                      const std::filesystem::path& dir) {
  return write_files(dir, render_report(r, format));
}

// All three formats, rendered up front and written together.
inline std::vector<std::filesystem::path> emit_all(const PipelineResults& r, const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (auto f : {ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json}) {
    auto part = render_report(r, f);
    files.insert(files.end(), part.begin(), part.end());
  }
  return write_files(dir, files);
}

}  // namespace fsel
