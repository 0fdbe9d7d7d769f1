#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#ifndef FSEL_CLI_PATH
#error "FSEL_CLI_PATH must point at the fsel binary"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FSEL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fsel_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    ASSERT_EQ(run("synth --out " + dir_.string() + " --rows 120 --noise 4 --seed 2"), 0);
    // Shrink the search so the test stays quick.
    auto cfg = slurp(dir_ / "config.ini");
    cfg = std::regex_replace(cfg, std::regex("ga.population = \\d+"), "ga.population = 10");
    cfg = std::regex_replace(cfg, std::regex("ga.generations = \\d+"), "ga.generations = 3");
    cfg = std::regex_replace(cfg, std::regex("inner_folds = \\d+"), "inner_folds = 3");
    cfg = std::regex_replace(cfg, std::regex("\nfolds = 10"), "\nfolds = 3");
    cfg = std::regex_replace(cfg, std::regex("classifiers = [^\n]*"), "classifiers = nb; knn k=3");
    spit(dir_ / "config.ini", cfg);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string config() const { return (dir_ / "config.ini").string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthWritesDatasetAndConfig) {
  EXPECT_TRUE(fs::exists(dir_ / "data.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "planted.txt"));
  std::istringstream planted(slurp(dir_ / "planted.txt"));
  std::string line;
  int n = 0;
  while (std::getline(planted, line)) n += !line.empty();
  EXPECT_EQ(n, 5);
}

TEST_F(CliTest, RunIsByteIdentical) {
  ASSERT_EQ(run("run " + config() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("run " + config() + " --out " + (dir_ / "b").string()), 0);
  const auto a = slurp(dir_ / "a" / "report.json");
  const auto b = slurp(dir_ / "b" / "report.json");
  ASSERT_FALSE(a.empty());
  // The echoed output directory is the only intended difference.
  EXPECT_EQ(std::regex_replace(a, std::regex("\"dir\": \"[^\"]*\""), ""),
            std::regex_replace(b, std::regex("\"dir\": \"[^\"]*\""), ""));
  EXPECT_EQ(slurp(dir_ / "a" / "trace.csv"), slurp(dir_ / "b" / "trace.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "selection.csv"), slurp(dir_ / "b" / "selection.csv"));
}

TEST_F(CliTest, RunTwiceSameOutputDirectory) {
  ASSERT_EQ(run("run " + config()), 0);
  const auto first = slurp(dir_ / "out" / "report.json");
  ASSERT_EQ(run("run " + config()), 0);
  EXPECT_EQ(first, slurp(dir_ / "out" / "report.json"));
}

TEST_F(CliTest, OverridesApply) {
  ASSERT_EQ(run("run " + config() + " --seed 5 --method filters --folds 4"), 0);
  const auto report = slurp(dir_ / "out" / "report.json");
  EXPECT_NE(report.find("\"seed\": 5"), std::string::npos);
  EXPECT_NE(report.find("\"method\": \"filters\""), std::string::npos);
  EXPECT_NE(report.find("\"folds\": \"4\""), std::string::npos);
  EXPECT_NE(slurp(dir_ / "out" / "selection.md").find("Average Rank"), std::string::npos);
  EXPECT_NE(report.find("\"fold_safe\": \"false\""), std::string::npos);
  ASSERT_EQ(run("run " + config() + " --method filters --fold-safe"), 0);
  EXPECT_NE(slurp(dir_ / "out" / "report.json").find("\"fold_safe\": \"true\""), std::string::npos);
}

TEST_F(CliTest, UnknownMethodInConfigIsExitThreeWithoutOutputs) {
  auto cfg = slurp(dir_ / "config.ini");
  cfg = std::regex_replace(cfg, std::regex("method = ga"), "method = annealing");
  spit(dir_ / "config.ini", cfg);
  EXPECT_EQ(run("run " + config()), 3);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, UnknownMethodOverrideIsExitThree) {
  EXPECT_EQ(run("run " + config() + " --method annealing"), 3);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, DataErrorsAreExitTwo) {
  fs::remove(dir_ / "data.csv");
  EXPECT_EQ(run("run " + config()), 2);
  spit(dir_ / "data.csv", "x0,x1\n1,2\n");
  EXPECT_EQ(run("run " + config()), 2);
}

TEST_F(CliTest, UsageErrorsAreExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("run"), 1);
  EXPECT_EQ(run("run " + config() + " --seed notanumber"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, MissingConfigIsExitThree) { EXPECT_EQ(run("run " + (dir_ / "nope.ini").string()), 3); }

TEST_F(CliTest, RankSelectEvaluate) {
  ASSERT_EQ(run("rank " + config()), 0);
  EXPECT_NE(slurp(dir_ / "out" / "ranking.csv").find("method,attribute,merit,rank"), std::string::npos);
  ASSERT_EQ(run("select " + config() + " --out " + (dir_ / "sel").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "sel" / "selection.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "sel" / "comparison.csv"));
  ASSERT_EQ(run("evaluate " + config() + " --subset x0,x1 --out " + (dir_ / "ev").string()), 0);
  const auto cmp = slurp(dir_ / "ev" / "comparison.csv");
  EXPECT_NE(cmp.find("selected,2,NaiveBayes"), std::string::npos);
  EXPECT_NE(cmp.find("all-attributes,9,"), std::string::npos);
  EXPECT_EQ(run("evaluate " + config() + " --subset nosuch"), 3);
}
