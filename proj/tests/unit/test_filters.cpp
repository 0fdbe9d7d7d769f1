#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fsel/filters.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fsel;

TEST(Binning, TwoEqualBins) {
  std::vector<double> col{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto bins = bin_numeric(col, {2});
  EXPECT_EQ(std::count(bins.begin(), bins.end(), 0), 5);
  EXPECT_EQ(std::count(bins.begin(), bins.end(), 1), 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(bins[i], 0);
}

TEST(Binning, TiesCollapse) {
  std::vector<double> col{1, 1, 1, 1, 2, 3};
  EXPECT_EQ(equal_frequency_cuts(col, {3}), (std::vector<double>{1}));
  EXPECT_EQ(bin_numeric(col, {3}), (std::vector<int>{0, 0, 0, 0, 1, 1}));
}

TEST(Binning, RankInvariant) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> col(137);
  for (auto& v : col) v = nd(gen);
  std::vector<double> mapped(col.size());
  std::transform(col.begin(), col.end(), mapped.begin(), [](double v) { return std::exp(3 * v) + 7; });
  EXPECT_EQ(bin_numeric(col, {10}), bin_numeric(mapped, {10}));
}

TEST(Binning, ConstantColumn) {
  std::vector<double> col{4, 4, 4};
  EXPECT_THROW(bin_numeric(col, {10}), std::invalid_argument);
  Feature f{"c", 0, false, false, col, {}, {}};
  EXPECT_EQ(discretize_feature(f, {10}), (std::vector<int>{0, 0, 0}));
}

TEST(Binning, BinCountBounded) {
  std::vector<double> col(1000);
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = static_cast<double>(i);
  const auto bins = bin_numeric(col, {10});
  EXPECT_EQ(*std::max_element(bins.begin(), bins.end()), 9);
  for (int b = 0; b < 10; ++b) EXPECT_EQ(std::count(bins.begin(), bins.end(), b), 100);
}

TEST(InfoGain, Examples) {
  std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(info_gain(std::vector<int>{0, 0, 1, 1}, y), 1.0);
  EXPECT_DOUBLE_EQ(info_gain(std::vector<int>{0, 1, 0, 1}, y), 0.0);
  EXPECT_DOUBLE_EQ(info_gain(std::vector<int>{2, 2, 2, 2}, y), 0.0);
}

TEST(GainRatio, Examples) {
  std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(gain_ratio(std::vector<int>{0, 0, 1, 1}, y), 1.0);
  EXPECT_DOUBLE_EQ(gain_ratio(std::vector<int>{3, 3, 3, 3}, y), 0.0);
}

TEST(ChiSquare, Examples) {
  std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(chi_square(std::vector<int>{0, 0, 1, 1}, y), 4.0);
  // Proportional table: each value has classes in the same 1:1 ratio.
  EXPECT_DOUBLE_EQ(chi_square(std::vector<int>{0, 1, 0, 1}, y), 0.0);
}

TEST(OneR, Examples) {
  EXPECT_DOUBLE_EQ(oner_merit(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(oner_merit(std::vector<int>{5, 5, 5, 5}, std::vector<int>{0, 0, 0, 1}), 0.75);
}

TEST(Scorers, MatchOraclesOnRandomTables) {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 6);
    const int bins = 1 + static_cast<int>(gen() % 6);
    const int classes = 1 + static_cast<int>(gen() % 4);
    std::vector<int> attr(n), y(n);
    for (int i = 0; i < n; ++i) {
      attr[i] = static_cast<int>(gen() % bins);
      y[i] = static_cast<int>(gen() % classes);
    }
    EXPECT_NEAR(info_gain(attr, y), oracle::info_gain(attr, y), 1e-12) << trial;
    EXPECT_NEAR(gain_ratio(attr, y), oracle::gain_ratio(attr, y), 1e-12) << trial;
    EXPECT_NEAR(chi_square(attr, y), oracle::chi_square(attr, y), 1e-12) << trial;
    EXPECT_NEAR(oner_merit(attr, y), oracle::oner(attr, y), 1e-12) << trial;
  }
}

TEST(Scorers, Invariants) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + gen() % 40;
    std::vector<int> attr(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      attr[i] = static_cast<int>(gen() % 5);
      y[i] = static_cast<int>(gen() % 3);
    }
    const double gr = gain_ratio(attr, y);
    EXPECT_GE(gr, 0.0);
    EXPECT_LE(gr, 1.0);
    EXPECT_GE(info_gain(attr, y), 0.0);
    EXPECT_GE(chi_square(attr, y), 0.0);
    std::vector<std::size_t> counts(3, 0);
    for (int c : y) ++counts[static_cast<std::size_t>(c)];
    EXPECT_GE(oner_merit(attr, y), static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n - 1e-15);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> pa(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = attr[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_NEAR(info_gain(pa, py), info_gain(attr, y), 1e-12);
    EXPECT_NEAR(chi_square(pa, py), chi_square(attr, y), 1e-12);
    EXPECT_NEAR(gain_ratio(pa, py), gain_ratio(attr, y), 1e-12);
    EXPECT_EQ(oner_merit(pa, py), oner_merit(attr, y));
  }
}

TEST(Relief, OneDimensionalSeparable) {
  const auto d = fixtures::numeric_dataset({{0, 0, 1, 1}}, {0, 0, 1, 1});
  const auto w = relief_weights(d, {1});
  EXPECT_GT(w[0], 0.0);
  EXPECT_NEAR(w[0], oracle::relief(d, 1)[0], 1e-12);
}

TEST(Relief, ConstantAttributeScoresZero) {
  const auto d = fixtures::numeric_dataset({{3, 3, 3, 3, 3}, {0, 1, 0, 2, 1}}, {0, 1, 0, 1, 1});
  EXPECT_EQ(relief_weights(d)[0], 0.0);
}

TEST(Relief, DuplicatingRowsKeepsSigns) {
  SynthSpec spec;
  spec.n_rows = 200;
  spec.n_noise = 5;
  spec.seed = 3;
  const auto d = standardize(synth_generate(spec)).first;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.n_rows(); ++i) rows.insert(rows.end(), {i, i});
  const auto doubled = d.select_rows(rows);
  const auto w1 = relief_weights(d);
  const auto w2 = relief_weights(doubled);
  const auto o2 = oracle::relief(doubled, 10);
  for (std::size_t j = 0; j < w1.size(); ++j) {
    EXPECT_NEAR(w2[j], o2[j], 1e-12);
    EXPECT_EQ(std::signbit(w1[j]), std::signbit(w2[j])) << j;
  }
}

TEST(Relief, MatchesOracleOnRandomSmallData) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 5;
    const std::size_t p = 1 + gen() % 3;
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i < 2 ? i : gen() % 3);
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (auto& c : cols)
      for (auto& v : c) v = std::round(u(gen) * 4) / 4;  // coarse grid to force distance ties
    const auto d = fixtures::numeric_dataset(cols, y, 3);
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{10}}) {
      const auto w = relief_weights(d, {k});
      const auto o = oracle::relief(d, k);
      for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(w[j], o[j], 1e-12) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Relief, NominalDiffsMatchOracle) {
  std::vector<Attribute> attrs{{"n", Group::School, true}, {"x", Group::School, false}};
  std::vector<Feature> feats{fixtures::nominal_feature("n", 0, {0, 1, 2, 0, 1, 2}),
                             Feature{"x", 1, false, false, {0.5, 0.1, 0.9, 0.3, 0.2, 0.7}, {}, {}}};
  const Dataset d(attrs, feats, {0, 1, 1, 0, 1, 0}, {"c0", "c1"});
  const auto w = relief_weights(d, {2});
  const auto o = oracle::relief(d, 2);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(w[j], o[j], 1e-12);
}

TEST(Ranking, PlantedInformativeOnTopForInfoGain) {
  SynthSpec spec;
  spec.n_rows = 800;
  spec.separation = 3.0;
  spec.seed = 12;
  const auto d = synth_generate(spec);
  const auto list = rank_attributes(d, FilterMethod::InfoGain);
  const auto top = list.top(5);
  std::set<std::size_t> planted(d.provenance().informative.begin(), d.provenance().informative.end());
  EXPECT_EQ(std::set<std::size_t>(top.begin(), top.end()), planted);
  for (auto a : top) {
    const auto codes = discretize_feature(d.feature(a), {});
    EXPECT_NEAR(list.entries[*list.rank_of(a) - 1].merit, oracle::info_gain(codes, d.labels()), 1e-12);
  }
}

TEST(Ranking, TiesGoToLowerIndexAndCoverAll) {
  const auto d = fixtures::numeric_dataset({{1, 2, 3, 4, 5, 6}, {9, 1, 9, 1, 9, 1}, {1, 2, 3, 4, 5, 6}}, {0, 0, 0, 1, 1, 1});
  for (auto m : kFilterMethods) {
    const auto list = rank_attributes(d, m, {3});
    ASSERT_EQ(list.entries.size(), 3u);
    std::set<std::size_t> ids;
    for (const auto& e : list.entries) ids.insert(e.id);
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_EQ(list.entries[*list.rank_of(0) - 1].merit, list.entries[*list.rank_of(2) - 1].merit);
    EXPECT_LT(*list.rank_of(0), *list.rank_of(2)) << to_string(m);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(list.entries[r].rank, r + 1);
  }
}

TEST(Ranking, CollapseUsesBestIndicator) {
  std::vector<Attribute> attrs{{"n", Group::School, true}, {"x", Group::School, false}};
  std::vector<Feature> feats{fixtures::nominal_feature("n", 0, {0, 0, 1, 1, 2, 2}),
                             Feature{"x", 1, false, false, {1, 2, 3, 4, 5, 6}, {}, {}}};
  const Dataset d(attrs, feats, {0, 0, 1, 1, 0, 1}, {"c0", "c1"});
  const auto e = one_hot_encode(d);
  const auto features = rank_attributes(e, FilterMethod::InfoGain, {3});
  const auto attrs_ranked = collapse_to_attributes(features, e);
  ASSERT_EQ(attrs_ranked.entries.size(), 2u);
  double best_indicator = 0;
  for (const auto& en : features.entries)
    if (e.parent_of(en.id) == 0) best_indicator = std::max(best_indicator, en.merit);
  EXPECT_EQ(attrs_ranked.entries[*attrs_ranked.rank_of(0) - 1].merit, best_indicator);
}
