#pragma once

// Wrapper subset search: logistic-regression accuracy as fitness, forward
// stepwise selection and a simple generational Genetic Algorithm.

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsel/classifiers.hpp"
#include "fsel/csv.hpp"
#include "fsel/dataset.hpp"
#include "fsel/format.hpp"
#include "fsel/rng.hpp"

namespace fsel {

// One bit per feature column.
using Bits = std::vector<bool>;

struct Chromosome {
  Bits bits;
  std::optional<double> fitness;
};

inline std::vector<std::size_t> bits_to_indices(const Bits& bits) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) idx.push_back(j);
  return idx;
}

inline Bits indices_to_bits(std::span<const std::size_t> idx, std::size_t d) {
  Bits b(d, false);
  for (auto j : idx) b.at(j) = true;
  return b;
}

inline std::string bits_string(const Bits& bits) {
  std::string s;
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

using FitnessFn = std::function<double(const Bits&)>;

// ---------------------------------------------------------------------------
// Fitness

struct FitnessOptions {
  std::size_t inner_folds = 5;
  LogisticRegressionSpec lr;

  bool operator==(const FitnessOptions&) const = default;
};

// Accuracy of the majority-class rule on the given labels.
inline double majority_baseline(std::span<const int> labels, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(labels.size());
}

// Pooled accuracy of logistic regression under stratified inner
// cross-validation with a seed-derived fold plan. The empty subset scores the
// majority-class baseline without training.
class SubsetFitness {
 public:
  SubsetFitness(const Dataset& d, std::uint64_t seed, FitnessOptions opts = {})
      : data_(to_training_data(d)), opts_(opts), baseline_(majority_baseline(d.labels(), d.class_count())) {
    if (d.n_rows() < opts_.inner_folds) throw std::invalid_argument("subset_fitness: fewer rows than inner folds");
    plan_ = make_folds(d.labels(), opts_.inner_folds, seed, true);
    for (std::size_t f = 0; f < plan_.k; ++f) {
      train_rows_.push_back(plan_.train_rows(f));
      test_rows_.push_back(plan_.test_rows(f));
    }
  }

  std::size_t dimension() const { return data_.x.cols(); }
  double baseline() const { return baseline_; }

  double operator()(const Bits& bits) const {
    if (bits.size() != dimension()) throw std::invalid_argument("subset_fitness: bit length mismatch");
    const auto cols = bits_to_indices(bits);
    if (cols.empty()) return baseline_;
    std::size_t correct = 0;
    for (std::size_t f = 0; f < plan_.k; ++f) {
      const auto train_set = gather(train_rows_[f], cols);
      const auto model = train(opts_.lr, train_set);
      const auto test_set = gather(test_rows_[f], cols);
      for (std::size_t i = 0; i < test_set.x.rows(); ++i)
        if (predict(model, test_set.x.row(i)).label == test_set.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data_.x.rows());
  }

 private:
  TrainingData gather(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
    TrainingData t{Matrix(rows.size(), cols.size()), std::vector<int>(rows.size()), data_.n_classes,
                   std::vector<char>(cols.size(), 0)};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = data_.x.row(rows[i]);
      auto dst = t.x.row(i);
      for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
      t.y[i] = data_.y[rows[i]];
    }
    return t;
  }

  TrainingData data_;
  FitnessOptions opts_;
  double baseline_;
  FoldPlan plan_;
  std::vector<std::vector<std::size_t>> train_rows_;
  std::vector<std::vector<std::size_t>> test_rows_;
};

inline double subset_fitness(const Bits& bits, const Dataset& d, std::uint64_t seed, FitnessOptions opts = {}) {
  return SubsetFitness(d, seed, opts)(bits);
}

// ---------------------------------------------------------------------------
// Trace

struct TraceRecord {
  std::size_t step = 0;
  Bits best;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct SearchTrace {
  std::vector<TraceRecord> records;

  bool operator==(const SearchTrace&) const = default;
};

inline std::vector<csv::Row> trace_rows(const SearchTrace& t, const std::string& step_name = "generation") {
  std::vector<csv::Row> rows{{step_name, "best_fitness", "mean_fitness", "best_subset"}};
  for (const auto& r : t.records)
    rows.push_back({std::to_string(r.step), fmt6(r.best_fitness), fmt6(r.mean_fitness), bits_string(r.best)});
  return rows;
}

// ---------------------------------------------------------------------------
// Forward selection

struct ForwardConfig {
  double min_improvement = 1e-6;
  std::optional<std::size_t> max_subset_size;  // unset: no limit
  std::size_t inner_folds = 5;
  std::uint64_t seed = 0;

  bool operator==(const ForwardConfig&) const = default;
};

struct SearchResult {
  std::vector<std::size_t> subset;
  double fitness = 0.0;
  SearchTrace trace;
};

// Greedy forward selection from the empty set. Each step adds the feature with
// the highest fitness (ties to the lower index) and stops when the gain falls
// below min_improvement or the size cap is reached. Step 0 records the empty
// set; mean_fitness is the mean over the candidates tried in that step.
inline SearchResult forward_select(std::size_t d, const FitnessFn& fitness, const ForwardConfig& cfg) {
  if (!(cfg.min_improvement >= 0)) throw ConfigError("forward: min_improvement must be non-negative");
  const std::size_t cap = std::min(cfg.max_subset_size.value_or(d), d);
  SearchResult res;
  Bits current(d, false);
  res.fitness = fitness(current);
  res.trace.records.push_back({0, current, res.fitness, res.fitness});
  while (res.subset.size() < cap) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_j = d;
    double sum = 0.0;
    std::size_t tried = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (current[j]) continue;
      current[j] = true;
      const double f = fitness(current);
      current[j] = false;
      sum += f;
      ++tried;
      if (f > best) {
        best = f;
        best_j = j;
      }
    }
    if (best_j == d || !(best - res.fitness >= cfg.min_improvement)) break;
    current[best_j] = true;
    res.subset.push_back(best_j);
    res.fitness = best;
    res.trace.records.push_back({res.subset.size(), current, best, sum / static_cast<double>(tried)});
  }
  std::sort(res.subset.begin(), res.subset.end());
  return res;
}

inline SearchResult forward_select(const Dataset& d, const ForwardConfig& cfg, LogisticRegressionSpec lr = {}) {
  SubsetFitness fit(d, cfg.seed, {cfg.inner_folds, lr});
  return forward_select(d.n_features(), std::cref(fit), cfg);
}

// ---------------------------------------------------------------------------
// Genetic Algorithm

struct GaConfig {
  std::size_t population_size = 500;
  double crossover_rate = 0.6;
  double mutation_rate = 0.03;
  std::size_t generations = 60;
  std::size_t tournament_size = 2;
  std::size_t elitism = 0;
  std::uint64_t seed = 0;

  bool operator==(const GaConfig&) const = default;

  void validate() const {
    if (population_size < 2) throw ConfigError("ga: population_size must be at least 2");
    if (!(crossover_rate >= 0 && crossover_rate <= 1)) throw ConfigError("ga: crossover_rate must be in [0,1]");
    if (!(mutation_rate >= 0 && mutation_rate <= 1)) throw ConfigError("ga: mutation_rate must be in [0,1]");
    if (generations < 1) throw ConfigError("ga: generations must be at least 1");
    if (tournament_size < 1) throw ConfigError("ga: tournament_size must be at least 1");
    if (elitism > population_size) throw ConfigError("ga: elitism exceeds population_size");
  }
};

// Samples `size` members uniformly with replacement and returns the index of
// the fittest; equal fitness goes to the earlier population index.
inline std::size_t tournament_pick(std::span<const Chromosome> population, std::size_t size, Rng& rng) {
  if (population.empty()) throw std::invalid_argument("tournament_pick: empty population");
  if (size < 1) throw std::invalid_argument("tournament_pick: size must be positive");
  std::size_t best = population.size();
  for (std::size_t s = 0; s < size; ++s) {
    const auto i = static_cast<std::size_t>(rng.below(population.size()));
    const double fi = population[i].fitness.value();
    if (best == population.size()) {
      best = i;
      continue;
    }
    const double fb = population[best].fitness.value();
    if (fi > fb || (fi == fb && i < best)) best = i;
  }
  return best;
}

// Swaps the segment [cut1, cut2) between the parents.
inline std::pair<Bits, Bits> two_point_crossover(const Bits& a, const Bits& b, std::size_t cut1, std::size_t cut2) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: parent lengths differ");
  if (cut1 > cut2 || cut2 > a.size()) throw std::invalid_argument("crossover: cut points out of order or range");
  Bits c1 = a, c2 = b;
  for (std::size_t i = cut1; i < cut2; ++i) {
    c1[i] = b[i];
    c2[i] = a[i];
  }
  return {std::move(c1), std::move(c2)};
}

inline Bits mutate_bits(Bits bits, double rate, Rng& rng) {
  if (!(rate >= 0 && rate <= 1)) throw std::invalid_argument("mutate_bits: rate must be in [0,1]");
  if (rate == 0.0) return bits;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (rate == 1.0 || rng.bernoulli(rate)) bits[i] = !bits[i];
  return bits;
}

namespace detail {

class CachedFitness {
 public:
  explicit CachedFitness(const FitnessFn& fn) : fn_(fn) {}

  double operator()(const Bits& b) {
    auto it = cache_.find(b);
    if (it != cache_.end()) return it->second;
    const double f = fn_(b);
    cache_.emplace(b, f);
    return f;
  }

  std::size_t evaluations() const { return cache_.size(); }

 private:
  const FitnessFn& fn_;
  std::unordered_map<Bits, double> cache_;
};

}  // namespace detail

struct GaResult {
  Bits best;
  double best_fitness = 0.0;
  SearchTrace trace;
  std::size_t distinct_evaluations = 0;
};

// Generation 0 is a random population (each bit set with probability 1/2).
// Each of the `generations` breeding rounds fills a new population pairwise:
// two tournament winners, two-point crossover with probability crossover_rate
// (otherwise copies), then per-bit mutation. The `elitism` fittest parents
// replace the last children. Randomness for pair j of generation g comes from
// derive_seed(seed, {g, j}), so results do not depend on evaluation order.
inline GaResult ga_select(std::size_t d, const FitnessFn& fitness, const GaConfig& cfg) {
  cfg.validate();
  if (d < 1) throw std::invalid_argument("ga_select: need at least one attribute");
  detail::CachedFitness eval(fitness);
  const std::size_t n = cfg.population_size;

  std::vector<Chromosome> pop(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, {0, 0x1A17, i}));
    pop[i].bits.resize(d);
    for (std::size_t j = 0; j < d; ++j) pop[i].bits[j] = rng.bernoulli(0.5);
  }

  GaResult res;
  bool have_best = false;
  auto evaluate_and_record = [&](std::size_t generation) {
    double sum = 0.0;
    for (auto& c : pop) {
      c.fitness = eval(c.bits);
      sum += *c.fitness;
      if (!have_best || *c.fitness > res.best_fitness) {
        res.best = c.bits;
        res.best_fitness = *c.fitness;
        have_best = true;
      }
    }
    res.trace.records.push_back({generation, res.best, res.best_fitness, sum / static_cast<double>(n)});
  };
  evaluate_and_record(0);

  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    std::vector<Chromosome> next;
    next.reserve(n + 1);
    for (std::size_t pair = 0; next.size() < n; ++pair) {
      Rng rng(derive_seed(cfg.seed, {g, pair}));
      const auto ia = tournament_pick(pop, cfg.tournament_size, rng);
      const auto ib = tournament_pick(pop, cfg.tournament_size, rng);
      Bits c1 = pop[ia].bits, c2 = pop[ib].bits;
      if (rng.bernoulli(cfg.crossover_rate)) {
        auto u = static_cast<std::size_t>(rng.below(d + 1));
        auto v = static_cast<std::size_t>(rng.below(d + 1));
        if (u > v) std::swap(u, v);
        std::tie(c1, c2) = two_point_crossover(c1, c2, u, v);
      }
      next.push_back({mutate_bits(std::move(c1), cfg.mutation_rate, rng), std::nullopt});
      if (next.size() < n) next.push_back({mutate_bits(std::move(c2), cfg.mutation_rate, rng), std::nullopt});
    }
    if (cfg.elitism > 0) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return *pop[a].fitness > *pop[b].fitness; });
      for (std::size_t e = 0; e < cfg.elitism; ++e) next[n - 1 - e] = pop[order[e]];
    }
    pop = std::move(next);
    evaluate_and_record(g);
  }
  res.distinct_evaluations = eval.evaluations();
  return res;
}

inline GaResult ga_select(const Dataset& d, const GaConfig& cfg, FitnessOptions opts = {}) {
  SubsetFitness fit(d, derive_seed(cfg.seed, {0xF17}), opts);
  return ga_select(d.n_features(), std::cref(fit), cfg);
}

}  // namespace fsel
