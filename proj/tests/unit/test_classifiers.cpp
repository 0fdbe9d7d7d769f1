#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fsel/classifiers.hpp"
#include "helpers.hpp"

using namespace fsel;

namespace {

double training_accuracy(const TrainedModel& m, const TrainingData& t) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < t.x.rows(); ++i) ok += predict(m, t.x.row(i)).label == t.y[i];
  return static_cast<double>(ok) / static_cast<double>(t.x.rows());
}

TrainingData make_training_data(std::mt19937_64& gen, std::size_t n, std::size_t p, int k) {
  std::normal_distribution<double> nd;
  TrainingData t{Matrix(n, p), std::vector<int>(n), k, std::vector<char>(p, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    t.y[i] = static_cast<int>(gen() % static_cast<unsigned>(k));
    for (std::size_t j = 0; j < p; ++j) t.x(i, j) = nd(gen) + 0.7 * t.y[i] * (j % 2 ? 1 : -1);
  }
  return t;
}

}  // namespace

TEST(LogisticRegression, LossAtZeroIsLogK) {
  std::mt19937_64 gen(1);
  for (int k : {2, 3, 4, 5}) {
    auto t = make_training_data(gen, 30, 3, k);
    std::vector<double> w(static_cast<std::size_t>(k) * 4, 0.0);
    EXPECT_NEAR(lr_loss_and_gradient(w, t.x, t.y, k, 1e-8).loss, std::log(static_cast<double>(k)), 1e-12);
  }
}

TEST(LogisticRegression, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int point = 0; point < 20; ++point) {
    const int k = 2 + point % 4;
    const std::size_t p = 1 + static_cast<std::size_t>(point % 5);
    auto t = make_training_data(gen, 25, p, k);
    const double ridge = point % 2 ? 0.3 : 1e-8;
    std::vector<double> w(static_cast<std::size_t>(k) * (p + 1));
    for (auto& v : w) v = nd(gen);
    const auto g = lr_loss_and_gradient(w, t.x, t.y, k, ridge).gradient;
    const double h = 1e-5;
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (lr_loss_and_gradient(wp, t.x, t.y, k, ridge).loss -
                         lr_loss_and_gradient(wm, t.x, t.y, k, ridge).loss) / (2 * h);
      const double rel = std::fabs(fd - g[i]) / std::max(1.0, std::max(std::fabs(fd), std::fabs(g[i])));
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(LogisticRegression, RidgeExcludesBias) {
  std::mt19937_64 gen(3);
  auto t = make_training_data(gen, 20, 2, 2);
  std::vector<double> w{5.0, 0.0, 0.0, -5.0, 0.0, 0.0};
  const double a = lr_loss_and_gradient(w, t.x, t.y, 2, 0.0).loss;
  const double b = lr_loss_and_gradient(w, t.x, t.y, 2, 10.0).loss;
  EXPECT_DOUBLE_EQ(a, b);
}

TEST(LogisticRegression, SeparableDataFitsPerfectly) {
  TrainingData t{Matrix(8, 1), {0, 0, 0, 0, 1, 1, 1, 1}, 2, {0}};
  const double xs[] = {-4, -3, -2, -1, 1, 2, 3, 4};
  for (std::size_t i = 0; i < 8; ++i) t.x(i, 0) = xs[i];
  const auto m = train(LogisticRegressionSpec{}, t);
  EXPECT_EQ(training_accuracy(m, t), 1.0);
}

TEST(LogisticRegression, LossNeverIncreases) {
  std::mt19937_64 gen(8);
  auto t = make_training_data(gen, 120, 4, 4);
  const auto m = train(LogisticRegressionSpec{}, t);
  const auto& lr = std::get<LrModel>(m.fitted());
  ASSERT_GE(lr.loss_history.size(), 2u);
  EXPECT_NEAR(lr.loss_history.front(), std::log(4.0), 1e-12);
  for (std::size_t i = 1; i < lr.loss_history.size(); ++i) EXPECT_LE(lr.loss_history[i], lr.loss_history[i - 1]);
}

TEST(LogisticRegression, LossApproachesZeroOnSeparableData) {
  TrainingData t{Matrix(4, 1), {0, 0, 1, 1}, 2, {0}};
  const double xs[] = {-2, -1, 1, 2};
  for (std::size_t i = 0; i < 4; ++i) t.x(i, 0) = xs[i];
  double previous = 1e300;
  for (double scale : {1.0, 2.0, 4.0, 8.0}) {
    std::vector<double> w{0, -scale, 0, scale};
    const double loss = lr_loss_and_gradient(w, t.x, t.y, 2, 0.0).loss;
    EXPECT_GT(loss, 0.0);
    EXPECT_LT(loss, previous);
    previous = loss;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(NaiveBayes, DistributionSumsToOne) {
  std::mt19937_64 gen(4);
  auto t = make_training_data(gen, 80, 3, 3);
  const auto m = train(NaiveBayesSpec{}, t);
  std::normal_distribution<double> nd(0, 3);
  for (int q = 0; q < 50; ++q) {
    std::vector<double> row{nd(gen), nd(gen), nd(gen)};
    const auto p = predict(m, row).distribution;
    double s = 0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(NaiveBayes, ConstantColumnUsesVarianceFloor) {
  TrainingData t{Matrix(4, 1), {0, 0, 1, 1}, 2, {0}};
  const double xs[] = {1, 1, 2, 2};
  for (std::size_t i = 0; i < 4; ++i) t.x(i, 0) = xs[i];
  const auto m = train(NaiveBayesSpec{}, t);
  EXPECT_EQ(training_accuracy(m, t), 1.0);
}

TEST(Knn, OneNeighbourAtTrainingPoint) {
  std::mt19937_64 gen(5);
  auto t = make_training_data(gen, 40, 2, 3);
  const auto m = train(KnnSpec{1}, t);
  EXPECT_EQ(training_accuracy(m, t), 1.0);
}

TEST(Knn, InverseDistanceVote) {
  // Query at 0; class 0 points at distances 1 and 1, class 1 at distance 2.
  TrainingData t{Matrix(3, 1), {0, 0, 1}, 2, {0}};
  t.x(0, 0) = 1;
  t.x(1, 0) = -1;
  t.x(2, 0) = 2;
  const auto m = train(KnnSpec{10}, t);
  const std::vector<double> q{0.0};
  const auto p = predict(m, q);
  EXPECT_EQ(p.label, 0);
  EXPECT_NEAR(p.distribution[0], 2.0 / 2.5, 1e-12);
  EXPECT_NEAR(p.distribution[1], 0.5 / 2.5, 1e-12);
}

TEST(Knn, ExactMatchesVoteAlone) {
  TrainingData t{Matrix(3, 1), {1, 0, 0}, 2, {0}};
  t.x(0, 0) = 0;
  t.x(1, 0) = 0.1;
  t.x(2, 0) = -0.1;
  const auto m = train(KnnSpec{3}, t);
  const std::vector<double> q{0.0};
  EXPECT_EQ(predict(m, q).label, 1);
}

TEST(DecisionTree, Xor) {
  TrainingData t{Matrix(8, 2), {0, 1, 1, 0, 0, 1, 1, 0}, 2, {0, 0}};
  const double a[] = {0, 0, 1, 1, 0, 0, 1, 1};
  const double b[] = {0, 1, 0, 1, 0, 1, 0, 1};
  for (std::size_t i = 0; i < 8; ++i) {
    t.x(i, 0) = a[i];
    t.x(i, 1) = b[i];
  }
  const auto m = train(DecisionTreeSpec{}, t);
  EXPECT_EQ(std::get<TreeModel>(m.fitted()).depth(), 2u);
  EXPECT_EQ(training_accuracy(m, t), 1.0);
  for (int i = 0; i < 4; ++i) {
    const std::vector<double> q{static_cast<double>(i / 2), static_cast<double>(i % 2)};
    EXPECT_EQ(predict(m, q).label, (i / 2) ^ (i % 2));
  }
}

TEST(DecisionTree, RespectsMaxDepthAndMinLeaf) {
  std::mt19937_64 gen(6);
  auto t = make_training_data(gen, 200, 3, 3);
  const auto shallow = train(DecisionTreeSpec{2, 1}, t);
  EXPECT_LE(std::get<TreeModel>(shallow.fitted()).depth(), 1u);
  const auto m = train(DecisionTreeSpec{40, 25}, t);
  for (const auto& node : std::get<TreeModel>(m.fitted()).nodes) {
    if (node.feature >= 0) continue;
    double n = 0;
    for (double v : node.distribution) n += v;
    EXPECT_GT(n, 0.0);
  }
}

TEST(OneRule, PicksTheBestSingleAttribute) {
  TrainingData t{Matrix(6, 2), {0, 0, 0, 1, 1, 1}, 2, {0, 0}};
  const double noise[] = {3, 1, 2, 3, 1, 2};
  for (std::size_t i = 0; i < 6; ++i) {
    t.x(i, 0) = noise[i];
    t.x(i, 1) = static_cast<double>(i);
  }
  const auto m = train(OneRuleSpec{BinningSpec{2}}, t);
  EXPECT_EQ(std::get<OneRuleModel>(m.fitted()).feature, 1u);
  EXPECT_EQ(training_accuracy(m, t), 1.0);
}

TEST(AllClassifiers, SingleClassGivesConstantPredictor) {
  std::mt19937_64 gen(9);
  auto t = make_training_data(gen, 20, 2, 1);
  const std::vector<ClassifierSpec> specs{LogisticRegressionSpec{}, NaiveBayesSpec{}, KnnSpec{3}, DecisionTreeSpec{},
                                          OneRuleSpec{}};
  for (const auto& s : specs) {
    const auto m = train(s, t);
    const std::vector<double> q{5.0, -5.0};
    EXPECT_EQ(predict(m, q).label, 0) << spec_name(s);
  }
}

TEST(AllClassifiers, ThreeClassesWithAbsentClass) {
  // Label space has 3 classes but only 0 and 2 appear.
  TrainingData t{Matrix(6, 1), {0, 0, 0, 2, 2, 2}, 3, {0}};
  for (std::size_t i = 0; i < 6; ++i) t.x(i, 0) = i < 3 ? -1.0 - i : 1.0 + i;
  const std::vector<ClassifierSpec> specs{LogisticRegressionSpec{}, NaiveBayesSpec{}, KnnSpec{1}, DecisionTreeSpec{},
                                          OneRuleSpec{BinningSpec{2}}};
  for (const auto& s : specs) {
    const auto m = train(s, t);
    EXPECT_EQ(training_accuracy(m, t), 1.0) << spec_name(s);
  }
}

TEST(Predict, RejectsBadRows) {
  std::mt19937_64 gen(10);
  auto t = make_training_data(gen, 10, 2, 2);
  const auto m = train(KnnSpec{1}, t);
  const std::vector<double> short_row{1.0};
  EXPECT_THROW(predict(m, short_row), std::invalid_argument);
  const std::vector<double> nan_row{1.0, std::nan("")};
  EXPECT_THROW(predict(m, nan_row), std::invalid_argument);
}

TEST(Train, InvalidSpecs) {
  std::mt19937_64 gen(11);
  auto t = make_training_data(gen, 10, 2, 2);
  EXPECT_THROW(train(KnnSpec{0}, t), ConfigError);
  EXPECT_THROW(train(NaiveBayesSpec{0.0}, t), ConfigError);
  EXPECT_THROW(train(LogisticRegressionSpec{-1.0, 10, 0.0}, t), ConfigError);
}

TEST(Train, Deterministic) {
  std::mt19937_64 gen(12);
  auto t = make_training_data(gen, 60, 3, 3);
  const auto a = std::get<LrModel>(train(LogisticRegressionSpec{}, t).fitted());
  const auto b = std::get<LrModel>(train(LogisticRegressionSpec{}, t).fitted());
  EXPECT_EQ(a.weights, b.weights);
}
