#pragma once

// Single-attribute merit scorers (OneR, ReliefF, chi-square, gain ratio,
// information gain) and attribute ranking.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/format.hpp"

namespace fsel {

enum class FilterMethod { OneR, Relief, ChiSquare, GainRatio, InfoGain };

inline constexpr std::array<FilterMethod, 5> kFilterMethods{FilterMethod::OneR, FilterMethod::Relief,
                                                           FilterMethod::ChiSquare, FilterMethod::GainRatio,
                                                           FilterMethod::InfoGain};

inline std::string_view to_string(FilterMethod m) {
  switch (m) {
    case FilterMethod::OneR: return "OneR";
    case FilterMethod::Relief: return "Relief";
    case FilterMethod::ChiSquare: return "ChiSquare";
    case FilterMethod::GainRatio: return "GainRatio";
    case FilterMethod::InfoGain: return "InfoGain";
  }
  return "?";
}

struct BinningSpec {
  std::size_t n_bins = 10;

  bool operator==(const BinningSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Equal-frequency binning

// Upper-inclusive cut points: a value v falls in bin b = #{cuts < v}.
// Cut j is the order statistic at position floor(j*n/n_bins) - 1; duplicate
// cuts collapse and a cut equal to the maximum is dropped.
inline std::vector<double> equal_frequency_cuts(std::span<const double> column, const BinningSpec& spec) {
  if (spec.n_bins < 2) throw std::invalid_argument("binning: n_bins must be at least 2");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> cuts;
  if (n == 0) return cuts;
  for (std::size_t j = 1; j < spec.n_bins; ++j) {
    const std::size_t pos = j * n / spec.n_bins;
    if (pos == 0) continue;
    const double c = sorted[pos - 1];
    if (c >= sorted.back()) continue;
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  return cuts;
}

inline int assign_bin(std::span<const double> cuts, double v) {
  return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

inline std::vector<int> bin_numeric(std::span<const double> column, const BinningSpec& spec) {
  if (column.empty()) throw std::invalid_argument("bin_numeric: empty column");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  if (*lo == *hi) throw std::invalid_argument("bin_numeric: constant column");
  const auto cuts = equal_frequency_cuts(column, spec);
  std::vector<int> bins(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) bins[i] = assign_bin(cuts, column[i]);
  return bins;
}

// Discrete view of a feature: nominal codes as-is, numerics binned, constant
// columns mapped to a single bin.
inline std::vector<int> discretize_feature(const Feature& f, const BinningSpec& spec) {
  if (f.nominal) return f.codes;
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  if (f.values.empty() || *lo == *hi) return std::vector<int>(f.values.size(), 0);
  return bin_numeric(f.values, spec);
}

// ---------------------------------------------------------------------------
// Contingency-table scorers

// Counts of (attribute value, class) pairs with values compacted to 0..r-1.
struct Contingency {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> counts;  // rows x cols
  double total = 0.0;

  double at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }

  static Contingency build(std::span<const int> attr, std::span<const int> labels) {
    if (attr.size() != labels.size()) throw std::invalid_argument("scorer: attribute and label lengths differ");
    if (attr.empty()) throw std::invalid_argument("scorer: empty input");
    std::vector<int> values(attr.begin(), attr.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const int max_label = *std::max_element(labels.begin(), labels.end());
    if (*std::min_element(labels.begin(), labels.end()) < 0) throw std::invalid_argument("scorer: negative label");
    Contingency t;
    t.rows = values.size();
    t.cols = static_cast<std::size_t>(max_label) + 1;
    t.counts.assign(t.rows * t.cols, 0.0);
    for (std::size_t i = 0; i < attr.size(); ++i) {
      const auto r = static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), attr[i]) - values.begin());
      t.counts[r * t.cols + static_cast<std::size_t>(labels[i])] += 1.0;
    }
    t.total = static_cast<double>(attr.size());
    return t;
  }

  std::vector<double> row_totals() const {
    std::vector<double> s(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) s[r] += at(r, c);
    return s;
  }

  std::vector<double> col_totals() const {
    std::vector<double> s(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) s[c] += at(r, c);
    return s;
  }
};

// Base-2 entropy of a count vector, 0 log 0 = 0.
inline double entropy_bits(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

namespace detail {

inline double conditional_class_entropy(const Contingency& t) {
  double h = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    std::span<const double> row(t.counts.data() + r * t.cols, t.cols);
    double nr = 0.0;
    for (double c : row) nr += c;
    h += nr / t.total * entropy_bits(row);
  }
  return h;
}

inline double info_gain(const Contingency& t) {
  const auto ct = t.col_totals();
  return std::max(0.0, entropy_bits(ct) - conditional_class_entropy(t));
}

}  // namespace detail

inline double info_gain(std::span<const int> attr, std::span<const int> labels) {
  return detail::info_gain(Contingency::build(attr, labels));
}

// IG / H(attr), 0 when the attribute is constant.
inline double gain_ratio(std::span<const int> attr, std::span<const int> labels) {
  const auto t = Contingency::build(attr, labels);
  const auto rt = t.row_totals();
  const double split = entropy_bits(rt);
  if (split <= 0.0) return 0.0;
  return std::clamp(detail::info_gain(t) / split, 0.0, 1.0);
}

inline double chi_square(std::span<const int> attr, std::span<const int> labels) {
  const auto t = Contingency::build(attr, labels);
  const auto rt = t.row_totals();
  const auto ct = t.col_totals();
  double chi = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      const double e = rt[r] * ct[c] / t.total;
      if (e <= 0.0) continue;
      const double diff = t.at(r, c) - e;
      chi += diff * diff / e;
    }
  }
  return chi;
}

// Majority class per attribute value; ties go to the lower class index.
inline std::vector<int> oner_rule(const Contingency& t) {
  std::vector<int> rule(t.rows, 0);
  for (std::size_t r = 0; r < t.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.cols; ++c)
      if (t.at(r, c) > t.at(r, best)) best = c;
    rule[r] = static_cast<int>(best);
  }
  return rule;
}

// Training accuracy of the value -> majority-class rule.
inline double oner_merit(std::span<const int> attr, std::span<const int> labels) {
  const auto t = Contingency::build(attr, labels);
  const auto rule = oner_rule(t);
  double correct = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) correct += t.at(r, static_cast<std::size_t>(rule[r]));
  return correct / t.total;
}

// ---------------------------------------------------------------------------
// ReliefF

struct ReliefConfig {
  std::size_t neighbors = 10;
};

// ReliefF over every instance. Neighbours are found by Euclidean distance on
// the raw feature values (numerics expected standardized, nominal mismatch
// counts 1). Weight updates use per-attribute diffs: |a-b|/range for numerics,
// 0/1 for nominals. Misses from class C are weighted by P(C)/(1-P(class_i)).
// Each neighbour sum is divided by the number of neighbours actually found
// (k, unless a class has fewer members) and the total by the instance count.
inline std::vector<double> relief_weights(const Dataset& d, const ReliefConfig& cfg = {}) {
  const std::size_t n = d.n_rows();
  const std::size_t p = d.n_features();
  if (n < 2) throw std::invalid_argument("relief: need at least two rows");
  const auto counts = d.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw std::invalid_argument("relief: need at least two classes");
  if (cfg.neighbors < 1) throw std::invalid_argument("relief: neighbors must be positive");

  const auto& y = d.labels();
  std::vector<double> range(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& f = d.feature(j);
    if (f.nominal) continue;
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    range[j] = *hi - *lo;
  }
  auto diff = [&](std::size_t j, std::size_t a, std::size_t b) {
    const auto& f = d.feature(j);
    if (f.nominal) return f.codes[a] == f.codes[b] ? 0.0 : 1.0;
    if (range[j] <= 0.0) return 0.0;
    return std::abs(f.values[a] - f.values[b]) / range[j];
  };

  // Row-major copy for distance evaluation.
  std::vector<double> x(n * p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) x[i * p + j] = d.feature(j).at(i);
  std::vector<char> is_nominal(p);
  for (std::size_t j = 0; j < p; ++j) is_nominal[j] = d.feature(j).nominal;

  const auto k_classes = static_cast<std::size_t>(d.class_count());
  std::vector<double> prior(k_classes);
  for (std::size_t c = 0; c < k_classes; ++c) prior[c] = static_cast<double>(counts[c]) / static_cast<double>(n);

  std::vector<double> w(p, 0.0);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = static_cast<std::size_t>(y[i]);
    const double miss_norm = 1.0 - prior[ci];
    for (std::size_t c = 0; c < k_classes; ++c) {
      if (counts[c] == 0) continue;
      cand.clear();
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i || static_cast<std::size_t>(y[r]) != c) continue;
        double dist = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
          double dj = is_nominal[j] ? (x[i * p + j] == x[r * p + j] ? 0.0 : 1.0) : x[i * p + j] - x[r * p + j];
          dist += dj * dj;
        }
        cand.emplace_back(dist, r);
      }
      if (cand.empty()) continue;
      const std::size_t m = std::min(cfg.neighbors, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(m), cand.end());
      const double scale = c == ci ? -1.0 / static_cast<double>(m)
                                   : prior[c] / miss_norm / static_cast<double>(m);
      for (std::size_t q = 0; q < m; ++q) {
        const std::size_t r = cand[q].second;
        for (std::size_t j = 0; j < p; ++j) w[j] += scale * diff(j, i, r);
      }
    }
  }
  for (double& v : w) v /= static_cast<double>(n);
  return w;
}

// ---------------------------------------------------------------------------
// Ranking

struct RankedEntry {
  std::size_t id = 0;  // feature index, or attribute index after collapsing
  double merit = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
  FilterMethod method = FilterMethod::InfoGain;
  std::vector<RankedEntry> entries;

  bool operator==(const RankedList&) const = default;

  std::optional<std::size_t> rank_of(std::size_t id) const {
    for (const auto& e : entries)
      if (e.id == id) return e.rank;
    return std::nullopt;
  }

  std::vector<std::size_t> top(std::size_t k) const {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < std::min(k, entries.size()); ++i) ids.push_back(entries[i].id);
    return ids;
  }
};

// Sorts by merit descending, ties by lower id, and assigns ranks 1..n.
inline RankedList make_ranked_list(FilterMethod method, std::span<const double> merits) {
  RankedList list{method, {}};
  for (std::size_t j = 0; j < merits.size(); ++j) list.entries.push_back({j, merits[j], 0});
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.merit > b.merit; });
  for (std::size_t r = 0; r < list.entries.size(); ++r) list.entries[r].rank = r + 1;
  return list;
}

inline std::vector<double> filter_merits(const Dataset& d, FilterMethod method, const BinningSpec& binning) {
  if (method == FilterMethod::Relief) {
    auto w = relief_weights(d);
    return w;
  }
  std::vector<double> merits(d.n_features());
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    const auto codes = discretize_feature(d.feature(j), binning);
    switch (method) {
      case FilterMethod::OneR: merits[j] = oner_merit(codes, d.labels()); break;
      case FilterMethod::ChiSquare: merits[j] = chi_square(codes, d.labels()); break;
      case FilterMethod::GainRatio: merits[j] = gain_ratio(codes, d.labels()); break;
      case FilterMethod::InfoGain: merits[j] = info_gain(codes, d.labels()); break;
      case FilterMethod::Relief: break;
    }
  }
  return merits;
}

// Ranks every feature column of d. Numerics are binned for the discrete
// scorers; ReliefF sees the raw (standardized) values.
inline RankedList rank_attributes(const Dataset& d, FilterMethod method, const BinningSpec& binning = {}) {
  return make_ranked_list(method, filter_merits(d, method, binning));
}

// Re-ranks at attribute level: an attribute's merit is the best merit among its
// feature columns (one-hot indicators share their parent).
inline RankedList collapse_to_attributes(const RankedList& list, const Dataset& d) {
  std::vector<std::optional<double>> best(d.n_attributes());
  for (const auto& e : list.entries) {
    auto& b = best[d.parent_of(e.id)];
    if (!b || e.merit > *b) b = e.merit;
  }
  RankedList out{list.method, {}};
  std::vector<std::pair<std::size_t, double>> present;
  for (std::size_t a = 0; a < best.size(); ++a)
    if (best[a]) present.emplace_back(a, *best[a]);
  std::stable_sort(present.begin(), present.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  for (std::size_t r = 0; r < present.size(); ++r) out.entries.push_back({present[r].first, present[r].second, r + 1});
  return out;
}

// CSV rows (method, attribute, merit, rank) with a header.
inline std::vector<csv::Row> ranked_list_rows(std::span<const RankedList> lists,
                                              const std::vector<std::string>& names) {
  std::vector<csv::Row> rows{{"method", "attribute", "merit", "rank"}};
  for (const auto& l : lists)
    for (const auto& e : l.entries)
      rows.push_back({std::string(to_string(l.method)), names.at(e.id), fmt6(e.merit), std::to_string(e.rank)});
  return rows;
}

}  // namespace fsel
