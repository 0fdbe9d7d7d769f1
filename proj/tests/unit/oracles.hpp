#pragma once

// Direct-formula reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library scorers.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fsel/dataset.hpp"

namespace fsel::oracle {

inline double log2_(double x) { return std::log(x) / std::log(2.0); }

inline double entropy(const std::map<int, double>& counts) {
  double n = 0;
  for (const auto& [k, c] : counts) n += c;
  double h = 0;
  for (const auto& [k, c] : counts)
    if (c > 0) h += -(c / n) * log2_(c / n);
  return h;
}

inline double info_gain(const std::vector<int>& attr, const std::vector<int>& y) {
  std::map<int, double> classes;
  std::map<int, std::map<int, double>> by_value;
  for (std::size_t i = 0; i < y.size(); ++i) {
    classes[y[i]] += 1;
    by_value[attr[i]][y[i]] += 1;
  }
  double cond = 0;
  for (const auto& [v, counts] : by_value) {
    double nv = 0;
    for (const auto& [c, k] : counts) nv += k;
    cond += nv / static_cast<double>(y.size()) * entropy(counts);
  }
  return entropy(classes) - cond;
}

inline double gain_ratio(const std::vector<int>& attr, const std::vector<int>& y) {
  std::map<int, double> values;
  for (int v : attr) values[v] += 1;
  const double h = entropy(values);
  return h > 0 ? info_gain(attr, y) / h : 0.0;
}

inline double chi_square(const std::vector<int>& attr, const std::vector<int>& y) {
  std::map<int, double> rows, cols;
  std::map<std::pair<int, int>, double> obs;
  for (std::size_t i = 0; i < y.size(); ++i) {
    rows[attr[i]] += 1;
    cols[y[i]] += 1;
    obs[{attr[i], y[i]}] += 1;
  }
  const double n = static_cast<double>(y.size());
  double chi = 0;
  for (const auto& [v, rv] : rows)
    for (const auto& [c, cv] : cols) {
      const double e = rv * cv / n;
      const double o = obs.count({v, c}) ? obs.at({v, c}) : 0.0;
      chi += (o - e) * (o - e) / e;
    }
  return chi;
}

inline double oner(const std::vector<int>& attr, const std::vector<int>& y) {
  std::map<int, std::map<int, double>> by_value;
  for (std::size_t i = 0; i < y.size(); ++i) by_value[attr[i]][y[i]] += 1;
  double correct = 0;
  for (const auto& [v, counts] : by_value) {
    double best = 0;
    for (const auto& [c, k] : counts) best = std::max(best, k);
    correct += best;
  }
  return correct / static_cast<double>(y.size());
}

// ReliefF with k nearest hits and k nearest misses per other class, every
// instance used, misses weighted by class prior over (1 - own prior).
inline std::vector<double> relief(const Dataset& d, std::size_t k) {
  const std::size_t n = d.n_rows(), p = d.n_features();
  const auto& y = d.labels();
  auto value = [&](std::size_t j, std::size_t i) { return d.feature(j).at(i); };
  auto diff = [&](std::size_t j, std::size_t a, std::size_t b) {
    if (d.feature(j).nominal) return value(j, a) == value(j, b) ? 0.0 : 1.0;
    double lo = value(j, 0), hi = value(j, 0);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, value(j, i));
      hi = std::max(hi, value(j, i));
    }
    return hi > lo ? std::fabs(value(j, a) - value(j, b)) / (hi - lo) : 0.0;
  };
  auto distance = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t j = 0; j < p; ++j) {
      const double dj = d.feature(j).nominal ? (value(j, a) == value(j, b) ? 0.0 : 1.0) : value(j, a) - value(j, b);
      s += dj * dj;
    }
    return std::sqrt(s);
  };
  std::map<int, double> prior;
  for (int c : y) prior[c] += 1.0 / static_cast<double>(n);

  std::vector<double> w(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [c, pc] : prior) {
      std::vector<std::pair<double, std::size_t>> pool;
      for (std::size_t r = 0; r < n; ++r)
        if (r != i && y[r] == c) pool.push_back({distance(i, r), r});
      if (pool.empty()) continue;
      std::sort(pool.begin(), pool.end());
      pool.resize(std::min(k, pool.size()));
      for (std::size_t j = 0; j < p; ++j) {
        double s = 0;
        for (const auto& [dist, r] : pool) s += diff(j, i, r);
        s /= static_cast<double>(pool.size());
        if (c == y[i]) w[j] -= s / static_cast<double>(n);
        else w[j] += pc / (1.0 - prior.at(y[i])) * s / static_cast<double>(n);
      }
    }
  }
  return w;
}

}  // namespace fsel::oracle
