#pragma once

// One classifier per algorithm family behind a common train/predict contract:
// multinomial logistic regression, Gaussian naive Bayes, inverse-distance
// k-nearest-neighbours, an entropy decision tree and a one-attribute rule.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fsel/dataset.hpp"
#include "fsel/filters.hpp"

namespace fsel {

struct LogisticRegressionSpec {
  double ridge = 1e-8;
  std::size_t max_iter = 200;
  double tol = 1e-8;

  bool operator==(const LogisticRegressionSpec&) const = default;
};

struct NaiveBayesSpec {
  double var_floor = 1e-9;

  bool operator==(const NaiveBayesSpec&) const = default;
};

// Neighbours vote with weight 1/distance.
struct KnnSpec {
  std::size_t k = 1;

  bool operator==(const KnnSpec&) const = default;
};

struct DecisionTreeSpec {
  std::size_t min_leaf = 2;
  std::size_t max_depth = 25;

  bool operator==(const DecisionTreeSpec&) const = default;
};

struct OneRuleSpec {
  BinningSpec binning;

  bool operator==(const OneRuleSpec&) const = default;
};

using ClassifierSpec = std::variant<LogisticRegressionSpec, NaiveBayesSpec, KnnSpec, DecisionTreeSpec, OneRuleSpec>;

inline void validate(const ClassifierSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticRegressionSpec>) {
          if (!(s.ridge >= 0) || !(s.tol >= 0) || s.max_iter < 1) throw ConfigError("logistic regression: bad parameters");
        } else if constexpr (std::is_same_v<T, NaiveBayesSpec>) {
          if (!(s.var_floor > 0)) throw ConfigError("naive bayes: var_floor must be positive");
        } else if constexpr (std::is_same_v<T, KnnSpec>) {
          if (s.k < 1) throw ConfigError("knn: k must be at least 1");
        } else if constexpr (std::is_same_v<T, DecisionTreeSpec>) {
          if (s.min_leaf < 1) throw ConfigError("tree: min_leaf must be at least 1");
        } else {
          if (s.binning.n_bins < 2) throw ConfigError("oner: bins must be at least 2");
        }
      },
      spec);
}

// Short display name, e.g. "LogisticRegression" or "KNN(k=10)".
inline std::string spec_name(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticRegressionSpec>) return "LogisticRegression";
        else if constexpr (std::is_same_v<T, NaiveBayesSpec>) return "NaiveBayes";
        else if constexpr (std::is_same_v<T, KnnSpec>) return "KNN(k=" + std::to_string(s.k) + ")";
        else if constexpr (std::is_same_v<T, DecisionTreeSpec>) return "DecisionTree";
        else return "OneR";
      },
      spec);
}

// ---------------------------------------------------------------------------
// Dense row-major matrix

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> rows) const {
    Matrix m(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols_), cols_, m.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Model inputs: feature matrix, labels and per-column nominal flags.
struct TrainingData {
  Matrix x;
  std::vector<int> y;
  int n_classes = 0;
  std::vector<char> nominal;

  TrainingData select_rows(std::span<const std::size_t> rows) const {
    TrainingData t{x.select_rows(rows), std::vector<int>(rows.size()), n_classes, nominal};
    for (std::size_t i = 0; i < rows.size(); ++i) t.y[i] = y.at(rows[i]);
    return t;
  }
};

inline TrainingData to_training_data(const Dataset& d, std::span<const std::size_t> features) {
  TrainingData t{Matrix(d.n_rows(), features.size()), d.labels(), d.class_count(), {}};
  for (std::size_t c = 0; c < features.size(); ++c) {
    const auto& f = d.feature(features[c]);
    t.nominal.push_back(f.nominal);
    for (std::size_t i = 0; i < d.n_rows(); ++i) t.x(i, c) = f.at(i);
  }
  return t;
}

inline TrainingData to_training_data(const Dataset& d) {
  std::vector<std::size_t> all(d.n_features());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return to_training_data(d, all);
}

// ---------------------------------------------------------------------------
// Logistic regression internals

// Weights are n_classes x (n_features + 1), row-major, column 0 is the bias.
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

namespace detail {

// Per-row loss/gradient accumulation for a fixed class count. Weights are
// stored transposed, (n_features + 1) x K with row 0 the bias, so the class
// index is innermost.
template <std::size_t K>
inline double lr_accumulate(const double* w, const Matrix& x, std::span<const int> y, double* g) {
  const std::size_t p = x.cols();
  const std::size_t n = x.rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i).data();
    std::array<double, K> z;
    for (std::size_t c = 0; c < K; ++c) z[c] = w[c];
    for (std::size_t j = 0; j < p; ++j) {
      const double v = xi[j];
      const double* wj = w + (j + 1) * K;
      for (std::size_t c = 0; c < K; ++c) z[c] += wj[c] * v;
    }
    double zmax = z[0];
    for (std::size_t c = 1; c < K; ++c) zmax = std::max(zmax, z[c]);
    const auto yi = static_cast<std::size_t>(y[i]);
    const double zy = z[yi] - zmax;
    double sum = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      z[c] = std::exp(z[c] - zmax);
      sum += z[c];
    }
    loss += std::log(sum) - zy;
    if (g) {
      const double inv = 1.0 / sum;
      for (std::size_t c = 0; c < K; ++c) z[c] *= inv;
      z[yi] -= 1.0;
      for (std::size_t c = 0; c < K; ++c) g[c] += z[c];
      for (std::size_t j = 0; j < p; ++j) {
        const double v = xi[j];
        double* gj = g + (j + 1) * K;
        for (std::size_t c = 0; c < K; ++c) gj[c] += z[c] * v;
      }
    }
  }
  return loss;
}

inline double lr_accumulate_any(std::size_t k, const double* w, const Matrix& x, std::span<const int> y, double* g) {
  const std::size_t p = x.cols();
  std::vector<double> z(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i).data();
    for (std::size_t c = 0; c < k; ++c) z[c] = w[c];
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t c = 0; c < k; ++c) z[c] += w[(j + 1) * k + c] * xi[j];
    const double zmax = *std::max_element(z.begin(), z.end());
    const auto yi = static_cast<std::size_t>(y[i]);
    const double zy = z[yi] - zmax;
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    loss += std::log(sum) - zy;
    if (g) {
      for (auto& v : z) v /= sum;
      z[yi] -= 1.0;
      for (std::size_t c = 0; c < k; ++c) g[c] += z[c];
      for (std::size_t j = 0; j < p; ++j)
        for (std::size_t c = 0; c < k; ++c) g[(j + 1) * k + c] += z[c] * xi[j];
    }
  }
  return loss;
}

// Mean softmax cross-entropy plus (ridge/2)||W without bias||^2, weights in
// the transposed layout above. The gradient is written only when grad is
// non-null.
inline double lr_objective_t(std::span<const double> wt, const Matrix& x, std::span<const int> y, int n_classes,
                             double ridge, std::vector<double>* grad) {
  const auto k = static_cast<std::size_t>(n_classes);
  const std::size_t n = x.rows();
  double* g = nullptr;
  if (grad) {
    grad->assign(wt.size(), 0.0);
    g = grad->data();
  }
  const double* w = wt.data();
  double loss;
  switch (k) {
    case 2: loss = lr_accumulate<2>(w, x, y, g); break;
    case 3: loss = lr_accumulate<3>(w, x, y, g); break;
    case 4: loss = lr_accumulate<4>(w, x, y, g); break;
    default: loss = lr_accumulate_any(k, w, x, y, g);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  double penalty = 0.0;
  for (std::size_t q = k; q < wt.size(); ++q) penalty += w[q] * w[q];
  loss += 0.5 * ridge * penalty;
  if (g) {
    for (std::size_t q = 0; q < k; ++q) g[q] *= inv_n;
    for (std::size_t q = k; q < wt.size(); ++q) g[q] = g[q] * inv_n + ridge * w[q];
  }
  return loss;
}

inline std::vector<double> transpose_weights(std::span<const double> w, std::size_t rows, std::size_t cols) {
  std::vector<double> t(w.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = w[r * cols + c];
  return t;
}

}  // namespace detail

inline LossAndGradient lr_loss_and_gradient(std::span<const double> w, const Matrix& x, std::span<const int> y,
                                            int n_classes, double ridge) {
  if (w.size() != static_cast<std::size_t>(n_classes) * (x.cols() + 1))
    throw std::invalid_argument("lr_loss_and_gradient: weight shape mismatch");
  if (y.size() != x.rows()) throw std::invalid_argument("lr_loss_and_gradient: label count mismatch");
  if (x.rows() == 0) throw std::invalid_argument("lr_loss_and_gradient: no rows");
  const auto k = static_cast<std::size_t>(n_classes);
  const std::size_t stride = x.cols() + 1;
  LossAndGradient out;
  std::vector<double> gt;
  out.loss = detail::lr_objective_t(detail::transpose_weights(w, k, stride), x, y, n_classes, ridge, &gt);
  out.gradient = detail::transpose_weights(gt, stride, k);
  return out;
}

// ---------------------------------------------------------------------------
// Fitted models

struct LrModel {
  std::vector<double> weights;  // n_classes x (n_features + 1), column 0 the bias
  std::vector<double> loss_history;  // objective after each accepted step, starting at W = 0
  std::size_t iterations = 0;
};

struct NbModel {
  std::vector<double> log_prior;  // -inf for classes absent from training
  std::vector<double> mean;       // classes x features
  std::vector<double> var;
};

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  std::size_t k = 1;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // rows with value <= threshold go left
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<double> distribution;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t depth(std::size_t node = 0) const {
    const auto& n = nodes.at(node);
    if (n.feature < 0) return 0;
    return 1 + std::max(depth(n.left), depth(n.right));
  }
};

struct OneRuleModel {
  std::size_t feature = 0;
  bool nominal = false;
  std::vector<double> cuts;         // numeric features
  std::vector<int> values;          // sorted distinct codes (nominal) or bin ids (numeric)
  std::vector<int> rule;            // class per entry of values
  int default_class = 0;
  double training_accuracy = 0.0;
};

class TrainedModel {
 public:
  using Fitted = std::variant<LrModel, NbModel, KnnModel, TreeModel, OneRuleModel>;

  TrainedModel(ClassifierSpec spec, int n_classes, std::size_t n_features, Fitted fitted)
      : spec_(std::move(spec)), n_classes_(n_classes), n_features_(n_features), fitted_(std::move(fitted)) {}

  const ClassifierSpec& spec() const { return spec_; }
  int n_classes() const { return n_classes_; }
  std::size_t n_features() const { return n_features_; }
  const Fitted& fitted() const { return fitted_; }

 private:
  ClassifierSpec spec_;
  int n_classes_;
  std::size_t n_features_;
  Fitted fitted_;
};

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Batch gradient descent. Each step tries a Barzilai-Borwein length first and
// halves it until the Armijo condition holds, so the objective never rises.
inline LrModel fit_logistic(const LogisticRegressionSpec& s, const TrainingData& t) {
  const std::size_t dim = static_cast<std::size_t>(t.n_classes) * (t.x.cols() + 1);
  LrModel m;
  std::vector<double> wt(dim, 0.0);
  std::vector<double> grad, trial(dim), trial_grad;
  double f = lr_objective_t(wt, t.x, t.y, t.n_classes, s.ridge, &grad);
  m.loss_history.push_back(f);
  double step = 1.0;
  constexpr double kArmijo = 1e-4;
  for (std::size_t it = 0; it < s.max_iter; ++it) {
    const double gg = dot(grad, grad);
    if (std::sqrt(gg) < s.tol) break;
    double ft = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t q = 0; q < dim; ++q) trial[q] = wt[q] - step * grad[q];
      ft = lr_objective_t(trial, t.x, t.y, t.n_classes, s.ridge, &trial_grad);
      if (std::isfinite(ft) && ft <= f - kArmijo * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double ss = 0.0, sy = 0.0;
    for (std::size_t q = 0; q < dim; ++q) {
      const double dq = trial[q] - wt[q];
      const double yq = trial_grad[q] - grad[q];
      ss += dq * dq;
      sy += dq * yq;
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : step * 2.0;
    wt.swap(trial);
    grad.swap(trial_grad);
    f = ft;
    m.loss_history.push_back(f);
    m.iterations = it + 1;
  }
  m.weights = transpose_weights(wt, t.x.cols() + 1, static_cast<std::size_t>(t.n_classes));
  return m;
}

inline NbModel fit_naive_bayes(const NaiveBayesSpec& s, const TrainingData& t) {
  const auto k = static_cast<std::size_t>(t.n_classes);
  const std::size_t p = t.x.cols();
  NbModel m;
  m.log_prior.assign(k, -std::numeric_limits<double>::infinity());
  m.mean.assign(k * p, 0.0);
  m.var.assign(k * p, s.var_floor);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < t.x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(t.y[i]);
    count[c] += 1.0;
    for (std::size_t j = 0; j < p; ++j) m.mean[c * p + j] += t.x(i, j);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    m.log_prior[c] = std::log(count[c] / static_cast<double>(t.x.rows()));
    for (std::size_t j = 0; j < p; ++j) m.mean[c * p + j] /= count[c];
  }
  std::vector<double> ss(k * p, 0.0);
  for (std::size_t i = 0; i < t.x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(t.y[i]);
    for (std::size_t j = 0; j < p; ++j) {
      const double dv = t.x(i, j) - m.mean[c * p + j];
      ss[c * p + j] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    for (std::size_t j = 0; j < p; ++j) m.var[c * p + j] = std::max(ss[c * p + j] / count[c], s.var_floor);
  }
  return m;
}

inline std::vector<double> class_distribution(std::span<const int> y, std::span<const std::size_t> rows, int n_classes) {
  std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
  for (auto r : rows) dist[static_cast<std::size_t>(y[r])] += 1.0;
  for (double& v : dist) v /= static_cast<double>(rows.size());
  return dist;
}

inline double entropy_of(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) {
      const double q = c / total;
      h -= q * std::log2(q);
    }
  return h;
}

class TreeBuilder {
 public:
  TreeBuilder(const DecisionTreeSpec& spec, const TrainingData& t) : spec_(spec), t_(t) {}

  TreeModel build() {
    std::vector<std::size_t> rows(t_.x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(model_);
  }

 private:
  std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t id = model_.nodes.size();
    model_.nodes.push_back({-1, 0.0, 0, 0, class_distribution(t_.y, rows, t_.n_classes)});
    const auto& dist = model_.nodes[id].distribution;
    const bool pure = std::count_if(dist.begin(), dist.end(), [](double v) { return v > 0; }) <= 1;
    if (pure || depth >= spec_.max_depth || rows.size() < 2 * spec_.min_leaf) return id;

    const auto k = static_cast<std::size_t>(t_.n_classes);
    std::vector<double> total(k, 0.0);
    for (auto r : rows) total[static_cast<std::size_t>(t_.y[r])] += 1.0;
    const double n = static_cast<double>(rows.size());
    const double parent_h = entropy_of(total, n);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(rows);
    std::vector<double> left(k);
    for (std::size_t j = 0; j < t_.x.cols(); ++j) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_.x(a, j) < t_.x(b, j); });
      std::fill(left.begin(), left.end(), 0.0);
      for (std::size_t q = 0; q + 1 < order.size(); ++q) {
        left[static_cast<std::size_t>(t_.y[order[q]])] += 1.0;
        const double v = t_.x(order[q], j);
        const double next = t_.x(order[q + 1], j);
        if (!(next > v)) continue;
        const std::size_t nl = q + 1;
        if (nl < spec_.min_leaf || rows.size() - nl < spec_.min_leaf) continue;
        double hl = 0.0, hr = 0.0;
        const double dl = static_cast<double>(nl), dr = n - dl;
        for (std::size_t c = 0; c < k; ++c) {
          if (left[c] > 0) hl -= left[c] / dl * std::log2(left[c] / dl);
          const double rc = total[c] - left[c];
          if (rc > 0) hr -= rc / dr * std::log2(rc / dr);
        }
        const double gain = parent_h - (dl / n) * hl - (dr / n) * hr;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = v + (next - v) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) (t_.x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? lrows : rrows).push_back(r);
    const std::size_t l = grow(lrows, depth + 1);
    const std::size_t r = grow(rrows, depth + 1);
    auto& node = model_.nodes[id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const DecisionTreeSpec& spec_;
  const TrainingData& t_;
  TreeModel model_;
};

inline int majority_class(std::span<const int> y, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

inline OneRuleModel fit_one_rule(const OneRuleSpec& s, const TrainingData& t) {
  OneRuleModel best;
  best.default_class = majority_class(t.y, t.n_classes);
  best.training_accuracy = -1.0;
  const std::size_t n = t.x.rows();
  std::vector<int> codes(n);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < t.x.cols(); ++j) {
    OneRuleModel cand;
    cand.feature = j;
    cand.nominal = t.nominal[j];
    cand.default_class = best.default_class;
    for (std::size_t i = 0; i < n; ++i) column[i] = t.x(i, j);
    if (cand.nominal) {
      for (std::size_t i = 0; i < n; ++i) codes[i] = static_cast<int>(column[i]);
    } else {
      const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
      if (*lo < *hi) cand.cuts = equal_frequency_cuts(column, s.binning);
      for (std::size_t i = 0; i < n; ++i) codes[i] = assign_bin(cand.cuts, column[i]);
    }
    const auto table = Contingency::build(codes, t.y);
    cand.rule = oner_rule(table);
    cand.values = codes;
    std::sort(cand.values.begin(), cand.values.end());
    cand.values.erase(std::unique(cand.values.begin(), cand.values.end()), cand.values.end());
    double correct = 0.0;
    for (std::size_t r = 0; r < table.rows; ++r) correct += table.at(r, static_cast<std::size_t>(cand.rule[r]));
    cand.training_accuracy = correct / static_cast<double>(n);
    if (cand.training_accuracy > best.training_accuracy) best = std::move(cand);
  }
  return best;
}

}  // namespace detail

// Deterministic fit. An empty attribute set is allowed for every learner
// except OneRule and yields a prior-only model.
inline TrainedModel train(const ClassifierSpec& spec, const TrainingData& t) {
  validate(spec);
  if (t.x.rows() == 0) throw DataError("train: empty dataset");
  if (t.y.size() != t.x.rows()) throw std::invalid_argument("train: label count mismatch");
  const std::size_t p = t.x.cols();
  auto fitted = std::visit(
      [&](const auto& s) -> TrainedModel::Fitted {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogisticRegressionSpec>) return detail::fit_logistic(s, t);
        else if constexpr (std::is_same_v<T, NaiveBayesSpec>) return detail::fit_naive_bayes(s, t);
        else if constexpr (std::is_same_v<T, KnnSpec>) return KnnModel{t.x, t.y, s.k};
        else if constexpr (std::is_same_v<T, DecisionTreeSpec>) return detail::TreeBuilder(s, t).build();
        else {
          if (p == 0) throw std::invalid_argument("train: OneRule needs at least one attribute");
          return detail::fit_one_rule(s, t);
        }
      },
      spec);
  return TrainedModel(spec, t.n_classes, p, std::move(fitted));
}

inline TrainedModel train(const ClassifierSpec& spec, const Dataset& d) { return train(spec, to_training_data(d)); }

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  int label = 0;
  std::vector<double> distribution;
};

namespace detail {

inline int argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c)
    if (v[c] > v[best]) best = c;
  return static_cast<int>(best);
}

inline std::vector<double> softmax_from_logs(std::vector<double> logs) {
  const double mx = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& v : logs) {
    v = std::isinf(v) && v < 0 ? 0.0 : std::exp(v - mx);
    sum += v;
  }
  for (double& v : logs) v /= sum;
  return logs;
}

inline std::vector<double> predict_dist(const LrModel& m, std::span<const double> row, int n_classes) {
  const std::size_t stride = row.size() + 1;
  std::vector<double> z(static_cast<std::size_t>(n_classes));
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double* w = m.weights.data() + c * stride;
    double v = w[0];
    for (std::size_t j = 0; j < row.size(); ++j) v += w[j + 1] * row[j];
    z[c] = v;
  }
  return softmax_from_logs(std::move(z));
}

inline std::vector<double> predict_dist(const NbModel& m, std::span<const double> row, int n_classes) {
  const std::size_t p = row.size();
  std::vector<double> logs(static_cast<std::size_t>(n_classes));
  constexpr double kLog2Pi = 1.8378770664093454836;
  for (std::size_t c = 0; c < logs.size(); ++c) {
    double l = m.log_prior[c];
    if (std::isinf(l)) {
      logs[c] = l;
      continue;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double var = m.var[c * p + j];
      const double dv = row[j] - m.mean[c * p + j];
      l -= 0.5 * (kLog2Pi + std::log(var) + dv * dv / var);
    }
    logs[c] = l;
  }
  return softmax_from_logs(std::move(logs));
}

// Inverse-distance vote over the k nearest rows (ties by lower row index). If
// any of them sits at distance zero, only the zero-distance rows vote, equally.
inline std::vector<double> predict_dist(const KnnModel& m, std::span<const double> row, int n_classes) {
  std::vector<std::pair<double, std::size_t>> dist(m.x.rows());
  for (std::size_t i = 0; i < m.x.rows(); ++i) {
    const auto xi = m.x.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += (xi[j] - row[j]) * (xi[j] - row[j]);
    dist[i] = {std::sqrt(s), i};
  }
  const std::size_t k = std::min(m.k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<double> votes(static_cast<std::size_t>(n_classes), 0.0);
  const bool exact = dist[0].first == 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    const auto [dq, i] = dist[q];
    if (exact && dq > 0.0) break;
    votes[static_cast<std::size_t>(m.y[i])] += exact ? 1.0 : 1.0 / dq;
  }
  double sum = 0.0;
  for (double v : votes) sum += v;
  for (double& v : votes) v /= sum;
  return votes;
}

inline std::vector<double> predict_dist(const TreeModel& m, std::span<const double> row, int) {
  std::size_t node = 0;
  while (m.nodes[node].feature >= 0) {
    const auto& nd = m.nodes[node];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return m.nodes[node].distribution;
}

inline std::vector<double> predict_dist(const OneRuleModel& m, std::span<const double> row, int n_classes) {
  const double v = row[m.feature];
  const int code = m.nominal ? static_cast<int>(v) : assign_bin(m.cuts, v);
  int cls = m.default_class;
  auto it = std::lower_bound(m.values.begin(), m.values.end(), code);
  if (it != m.values.end() && *it == code) cls = m.rule[static_cast<std::size_t>(it - m.values.begin())];
  std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
  dist[static_cast<std::size_t>(cls)] = 1.0;
  return dist;
}

}  // namespace detail

inline Prediction predict(const TrainedModel& m, std::span<const double> row) {
  if (row.size() != m.n_features()) throw std::invalid_argument("predict: feature count mismatch");
  for (double v : row)
    if (!std::isfinite(v)) throw std::invalid_argument("predict: non-finite input");
  Prediction p;
  p.distribution = std::visit([&](const auto& fm) { return detail::predict_dist(fm, row, m.n_classes()); }, m.fitted());
  p.label = detail::argmax_lowest(p.distribution);
  return p;
}

}  // namespace fsel
