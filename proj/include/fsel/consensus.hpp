#pragma once

// Cross-validated selection consensus: each selector runs on the rows outside
// one fold per round; votes and ranks are tallied per attribute and
// thresholded.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/filters.hpp"
#include "fsel/format.hpp"
#include "fsel/search.hpp"

namespace fsel {

enum class SelectorKind { FilterPanel, Forward, Ga };

inline std::string_view to_string(SelectorKind k) {
  switch (k) {
    case SelectorKind::FilterPanel: return "filters";
    case SelectorKind::Forward: return "forward";
    case SelectorKind::Ga: return "ga";
  }
  return "?";
}

// What a selector returns for one round: the chosen attributes (parent ids)
// plus, for rankers, the attribute-level ranked list it chose from.
struct RoundSelection {
  std::vector<std::size_t> attributes;
  std::optional<RankedList> ranking;
  std::optional<SearchTrace> trace;
};

// Called with the round's training subsample and the round index.
using Selector = std::function<RoundSelection(const Dataset&, std::size_t)>;

struct SelectionRun {
  SelectorKind kind = SelectorKind::Ga;
  std::size_t n_attributes = 0;
  std::vector<std::vector<std::size_t>> selected;  // per round, sorted
  std::vector<std::optional<RankedList>> rankings;  // per round
  std::vector<std::optional<SearchTrace>> traces;   // per round
  std::uint64_t seed = 0;

  bool operator==(const SelectionRun&) const = default;
};

// Runs `selector` once per fold r on every row not in fold r.
inline SelectionRun per_fold_select(const Dataset& d, SelectorKind kind, const Selector& selector,
                                    const FoldPlan& plan) {
  if (plan.assignments.size() != d.n_rows()) throw std::invalid_argument("per_fold_select: fold plan does not cover dataset");
  SelectionRun run;
  run.kind = kind;
  run.n_attributes = d.n_attributes();
  run.seed = plan.seed;
  for (std::size_t r = 0; r < plan.k; ++r) {
    const auto rows = plan.train_rows(r);
    RoundSelection sel;
    try {
      sel = selector(d.select_rows(rows), r);
    } catch (const DataError& e) {
      throw DataError("selection round " + std::to_string(r) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("selection round " + std::to_string(r) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("selection round " + std::to_string(r) + ": " + e.what());
    }
    std::sort(sel.attributes.begin(), sel.attributes.end());
    sel.attributes.erase(std::unique(sel.attributes.begin(), sel.attributes.end()), sel.attributes.end());
    for (auto a : sel.attributes)
      if (a >= d.n_attributes()) throw std::runtime_error("selection round " + std::to_string(r) + ": attribute out of range");
    run.selected.push_back(std::move(sel.attributes));
    run.rankings.push_back(std::move(sel.ranking));
    run.traces.push_back(std::move(sel.trace));
  }
  return run;
}

// votes[a] is a fraction of voters (fold tallies) or a count of methods
// (filter-panel tallies); average_rank is only filled for filter panels.
struct VoteTally {
  std::size_t voters = 0;
  bool fractional = true;
  std::vector<double> votes;
  std::vector<std::size_t> counts;
  std::vector<std::optional<double>> average_rank;

  bool operator==(const VoteTally&) const = default;
};

// Fraction of rounds whose selection contains each attribute. For ranked runs
// average_rank holds the attribute's rank averaged over rounds.
inline VoteTally tally_votes(const SelectionRun& run) {
  VoteTally t;
  t.voters = run.selected.size();
  t.counts.assign(run.n_attributes, 0);
  for (const auto& sel : run.selected)
    for (auto a : sel) ++t.counts.at(a);
  t.votes.resize(run.n_attributes);
  for (std::size_t a = 0; a < run.n_attributes; ++a)
    t.votes[a] = t.voters ? static_cast<double>(t.counts[a]) / static_cast<double>(t.voters) : 0.0;
  t.average_rank.assign(run.n_attributes, std::nullopt);
  const bool ranked = !run.rankings.empty() &&
                      std::all_of(run.rankings.begin(), run.rankings.end(), [](const auto& r) { return r.has_value(); });
  if (ranked) {
    for (std::size_t a = 0; a < run.n_attributes; ++a) {
      double sum = 0.0;
      std::size_t seen = 0;
      for (const auto& r : run.rankings)
        if (auto rk = r->rank_of(a)) {
          sum += static_cast<double>(*rk);
          ++seen;
        }
      if (seen) t.average_rank[a] = sum / static_cast<double>(seen);
    }
  }
  return t;
}

namespace detail {

// count >= threshold * voters, with slack for the decimal threshold.
inline bool meets(std::size_t count, std::size_t voters, double threshold) {
  return static_cast<double>(count) >= threshold * static_cast<double>(voters) - 1e-9;
}

}  // namespace detail

// Attributes whose vote share reaches the (inclusive) threshold. For method
// tallies the share is counts / number of methods.
inline std::vector<std::size_t> consensus_subset(const VoteTally& t, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("consensus_subset: threshold must be in (0,1]");
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < t.counts.size(); ++a)
    if (detail::meets(t.counts[a], t.voters, threshold)) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------
// Filter panel

struct ConsensusConfig {
  double fold_threshold = 0.6;
  std::size_t method_threshold = 3;
  std::size_t filter_top_k = 15;

  bool operator==(const ConsensusConfig&) const = default;

  void validate() const {
    if (!(fold_threshold > 0.0 && fold_threshold <= 1.0)) throw ConfigError("consensus: fold_threshold must be in (0,1]");
    if (method_threshold < 1 || method_threshold > kFilterMethods.size())
      throw ConfigError("consensus: method_threshold must be in 1..5");
    if (filter_top_k < 1) throw ConfigError("consensus: filter_top_k must be positive");
  }
};

struct FilterPanelResult {
  std::vector<std::size_t> selected;
  VoteTally tally;  // votes = number of methods, average_rank over voting methods
  std::array<SelectionRun, 5> runs;
  std::array<VoteTally, 5> method_tallies;
};

// Selector that ranks attributes with one filter and keeps the top k.
inline Selector top_k_filter_selector(FilterMethod method, std::size_t top_k, BinningSpec binning) {
  return [=](const Dataset& sub, std::size_t) {
    auto ranked = collapse_to_attributes(rank_attributes(sub, method, binning), sub);
    RoundSelection sel;
    sel.attributes = ranked.top(top_k);
    sel.ranking = std::move(ranked);
    return sel;
  };
}

// Combines per-method fold tallies: a method votes for an attribute selected
// in at least fold_threshold of its rounds; the panel keeps attributes with at
// least method_threshold votes. average_rank is the mean, over voting methods,
// of each method's fold-averaged rank.
inline FilterPanelResult combine_filter_runs(std::array<SelectionRun, 5> runs, const ConsensusConfig& cfg) {
  cfg.validate();
  FilterPanelResult res;
  const std::size_t n_attr = runs[0].n_attributes;
  res.tally.voters = runs.size();
  res.tally.fractional = false;
  res.tally.counts.assign(n_attr, 0);
  res.tally.votes.assign(n_attr, 0.0);
  res.tally.average_rank.assign(n_attr, std::nullopt);
  std::vector<double> rank_sum(n_attr, 0.0);
  for (std::size_t m = 0; m < runs.size(); ++m) {
    res.method_tallies[m] = tally_votes(runs[m]);
    const auto chosen = consensus_subset(res.method_tallies[m], cfg.fold_threshold);
    for (auto a : chosen) {
      ++res.tally.counts[a];
      rank_sum[a] += res.method_tallies[m].average_rank[a].value_or(0.0);
    }
  }
  for (std::size_t a = 0; a < n_attr; ++a) {
    res.tally.votes[a] = static_cast<double>(res.tally.counts[a]);
    if (res.tally.counts[a]) res.tally.average_rank[a] = rank_sum[a] / static_cast<double>(res.tally.counts[a]);
    if (res.tally.counts[a] >= cfg.method_threshold) res.selected.push_back(a);
  }
  res.runs = std::move(runs);
  return res;
}

inline FilterPanelResult filter_panel_table(const Dataset& d, const FoldPlan& plan, const ConsensusConfig& cfg,
                                            const BinningSpec& binning = {}) {
  cfg.validate();
  std::array<SelectionRun, 5> runs;
  for (std::size_t m = 0; m < kFilterMethods.size(); ++m)
    runs[m] = per_fold_select(d, SelectorKind::FilterPanel,
                              top_k_filter_selector(kFilterMethods[m], cfg.filter_top_k, binning), plan);
  return combine_filter_runs(std::move(runs), cfg);
}

// ---------------------------------------------------------------------------
// Wrapper selectors

inline Selector forward_selector(ForwardConfig cfg, LogisticRegressionSpec lr = {}) {
  return [=](const Dataset& sub, std::size_t round) {
    ForwardConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {0xF0, round});
    auto res = forward_select(sub, c, lr);
    return RoundSelection{sub.parents_of(res.subset), std::nullopt, std::move(res.trace)};
  };
}

inline Selector ga_selector(GaConfig cfg, FitnessOptions opts = {}) {
  return [=](const Dataset& sub, std::size_t round) {
    GaConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {0x6A, round});
    auto res = ga_select(sub, c, opts);
    return RoundSelection{sub.parents_of(bits_to_indices(res.best)), std::nullopt, std::move(res.trace)};
  };
}

// ---------------------------------------------------------------------------
// Table rows

// (attribute, votes, average_rank) for filter panels; (attribute,
// vote_percent) for fold tallies. Rows follow attribute order.
inline std::vector<csv::Row> tally_rows(const VoteTally& t, const std::vector<std::string>& names,
                                        std::span<const std::size_t> selected) {
  std::vector<csv::Row> rows;
  auto is_selected = [&](std::size_t a) { return std::find(selected.begin(), selected.end(), a) != selected.end(); };
  if (!t.fractional) {
    rows.push_back({"attribute", "votes", "average_rank", "selected"});
    for (std::size_t a = 0; a < t.counts.size(); ++a)
      rows.push_back({names.at(a), std::to_string(t.counts[a]), t.average_rank[a] ? fmt6(*t.average_rank[a]) : "",
                      is_selected(a) ? "1" : "0"});
  } else {
    rows.push_back({"attribute", "vote_percent", "selected"});
    for (std::size_t a = 0; a < t.counts.size(); ++a)
      rows.push_back({names.at(a), fmt6(100.0 * t.votes[a]), is_selected(a) ? "1" : "0"});
  }
  return rows;
}

}  // namespace fsel
