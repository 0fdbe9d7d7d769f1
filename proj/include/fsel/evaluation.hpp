#pragma once

// Confusion matrices, support-weighted precision/recall/F1 and pooled
// cross-validation over fold plans.

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsel/classifiers.hpp"
#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/format.hpp"

namespace fsel {

// counts[t][p]: rows of true class t predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0) : k_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t n_classes() const { return k_; }
  std::size_t& at(std::size_t truth, std::size_t pred) { return counts_.at(truth * k_ + pred); }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts_.at(truth * k_ + pred); }

  void add(int truth, int pred) { ++at(static_cast<std::size_t>(truth), static_cast<std::size_t>(pred)); }

  std::size_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t c = 0; c < k_; ++c) s += at(c, c);
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.k_ != k_) throw std::invalid_argument("confusion matrix size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths, int n_classes) {
  if (predictions.size() != truths.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("confusion_matrix: empty input");
  ConfusionMatrix cm(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], predictions[i]);
  return cm;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;  // support-weighted
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;

  bool operator==(const MetricsReport&) const = default;
};

// Zero denominators give 0. Weighted recall reduces to trace/total, and is
// computed that way so it equals accuracy bit for bit.
inline MetricsReport weighted_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw std::invalid_argument("weighted_metrics: empty confusion matrix");
  const std::size_t k = cm.n_classes();
  MetricsReport r;
  r.per_class.resize(k);
  const double n = static_cast<double>(total);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.at(c, c), row = 0, col = 0;
    for (std::size_t o = 0; o < k; ++o) {
      row += cm.at(c, o);
      col += cm.at(o, c);
    }
    auto& m = r.per_class[c];
    m.support = row;
    m.precision = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    const double w = static_cast<double>(row) / n;
    r.precision += w * m.precision;
    r.f1 += w * m.f1;
  }
  r.accuracy = static_cast<double>(cm.trace()) / n;
  r.recall = r.accuracy;
  return r;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvOptions {
  // Fit z-score parameters on each training fold instead of using the data as
  // given.
  bool fold_safe = false;
  bool drop_constants = true;
};

struct CvResult {
  MetricsReport metrics;
  ConfusionMatrix matrix;

  bool operator==(const CvResult&) const = default;
};

// Trains on the complement of each fold, predicts the fold and pools every
// prediction into one matrix.
inline CvResult cross_validate(const ClassifierSpec& spec, const Dataset& d, const FoldPlan& plan,
                               const CvOptions& opts = {}) {
  if (plan.assignments.size() != d.n_rows()) throw std::invalid_argument("cross_validate: fold plan does not cover dataset");
  ConfusionMatrix cm(static_cast<std::size_t>(d.class_count()));
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto train_rows = plan.train_rows(f);
    const auto test_rows = plan.test_rows(f);
    if (test_rows.empty()) continue;
    if (train_rows.empty()) throw DataError("cross_validate: fold " + std::to_string(f) + " leaves no training rows");
    Dataset train_set = d.select_rows(train_rows);
    Dataset test_set = d.select_rows(test_rows);
    if (opts.fold_safe) {
      auto [scaled, params] = standardize(train_set, opts.drop_constants);
      train_set = std::move(scaled);
      test_set = apply_standardization(test_set, params);
    }
    const auto model = train(spec, to_training_data(train_set));
    const auto test = to_training_data(test_set);
    for (std::size_t i = 0; i < test.x.rows(); ++i) cm.add(test.y[i], predict(model, test.x.row(i)).label);
  }
  return {weighted_metrics(cm), cm};
}

// ---------------------------------------------------------------------------
// Subset comparison

struct NamedSubset {
  std::string name;
  std::vector<std::size_t> attributes;
};

struct ComparisonRow {
  std::string subset;
  std::size_t size = 0;
  std::string algorithm;
  MetricsReport metrics;
  std::size_t rank = 0;  // 1 = best weighted F1, then accuracy

  bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // in (subset, spec) input order
};

inline ComparisonTable compare_subsets(const Dataset& d, std::span<const NamedSubset> subsets,
                                       std::span<const ClassifierSpec> specs, const FoldPlan& plan,
                                       const CvOptions& opts = {}) {
  ComparisonTable table;
  for (const auto& s : subsets) {
    if (s.attributes.empty()) throw std::invalid_argument("compare_subsets: subset '" + s.name + "' is empty");
    const auto feats = d.features_of(s.attributes);
    const Dataset restricted = d.select_features(feats);
    for (const auto& spec : specs) {
      auto cv = cross_validate(spec, restricted, plan, opts);
      table.rows.push_back({s.name, s.attributes.size(), spec_name(spec), std::move(cv.metrics), 0});
    }
  }
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ma = table.rows[a].metrics;
    const auto& mb = table.rows[b].metrics;
    if (ma.f1 != mb.f1) return ma.f1 > mb.f1;
    return ma.accuracy > mb.accuracy;
  });
  for (std::size_t r = 0; r < order.size(); ++r) table.rows[order[r]].rank = r + 1;
  return table;
}

inline std::vector<csv::Row> comparison_rows(const ComparisonTable& t) {
  std::vector<csv::Row> rows{{"subset", "n", "algorithm", "accuracy", "precision", "recall", "f_measure", "rank"}};
  for (const auto& r : t.rows)
    rows.push_back({r.subset, std::to_string(r.size), r.algorithm, fmt6(r.metrics.accuracy), fmt6(r.metrics.precision),
                    fmt6(r.metrics.recall), fmt6(r.metrics.f1), std::to_string(r.rank)});
  return rows;
}

}  // namespace fsel
