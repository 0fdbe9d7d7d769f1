// fsel: config-driven attribute selection and classifier comparison.
//
//   fsel run      <config>   selection + comparison, full report bundle
//   fsel rank     <config>   filter merits on the whole dataset
//   fsel select   <config>   consensus selection only
//   fsel evaluate <config>   subset comparison only (--subset a,b,c)
//   fsel synth    --out DIR  planted synthetic dataset plus a matching config
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 config.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "fsel/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitConfig = 3;

bool use_color(FILE* stream) { return std::getenv("NO_COLOR") == nullptr && isatty(fileno(stream)); }

void print_error(const std::string& kind, const std::string& msg) {
  if (use_color(stderr)) std::fprintf(stderr, "\033[31merror\033[0m (%s): %s\n", kind.c_str(), msg.c_str());
  else std::fprintf(stderr, "error (%s): %s\n", kind.c_str(), msg.c_str());
}

void print_written(const std::vector<fs::path>& files) {
  const bool color = use_color(stdout);
  for (const auto& f : files) {
    if (color) std::printf("\033[32mwrote\033[0m %s\n", f.string().c_str());
    else std::printf("wrote %s\n", f.string().c_str());
  }
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::size_t> folds;
  std::optional<std::string> out;
  bool fold_safe = false;
};

// Loads the config, resolves data/output paths against its directory and
// applies command-line overrides. Throws ConfigError on any problem.
fsel::PipelineConfig load_effective(const std::string& path, const Overrides& ov) {
  auto cfg = fsel::load_config(path);
  const fs::path base = fs::path(path).parent_path();
  if (!cfg.data_path.empty() && fs::path(cfg.data_path).is_relative()) cfg.data_path = (base / cfg.data_path).string();
  if (fs::path(cfg.output_dir).is_relative()) cfg.output_dir = (base / cfg.output_dir).string();
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.method) {
    auto m = fsel::parse_selector_kind(*ov.method);
    if (!m) throw fsel::ConfigError("unknown selection method '" + *ov.method + "' (expected filters, forward or ga)");
    cfg.method = *m;
  }
  if (ov.folds) {
    cfg.selection_folds = *ov.folds;
    cfg.evaluation_folds = *ov.folds;
  }
  if (ov.out) cfg.output_dir = *ov.out;
  if (ov.fold_safe) cfg.fold_safe = true;
  cfg.validate();
  if (cfg.data_path.empty()) throw fsel::ConfigError("data.path is required");
  return cfg;
}

std::vector<std::size_t> parse_subset(const std::string& spec, const fsel::Dataset& d) {
  std::vector<std::size_t> out;
  for (const auto& raw : fsel::detail::split(spec, ',')) {
    if (raw.empty()) continue;
    std::optional<std::size_t> hit;
    for (std::size_t a = 0; a < d.n_attributes(); ++a)
      if (d.attribute(a).name == raw) hit = a;
    if (!hit) throw fsel::ConfigError("--subset names unknown attribute '" + raw + "'");
    out.push_back(*hit);
  }
  if (out.empty()) throw fsel::ConfigError("--subset is empty");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_run(const std::string& config, const Overrides& ov) {
  const auto cfg = load_effective(config, ov);
  const auto res = fsel::run_pipeline(cfg);
  print_written(fsel::emit_all(res, cfg.output_dir));
  if (res.reference) {
    std::printf("reference accuracy %s, observed %s: %s\n", fsel::fmt6(res.reference->reference).c_str(),
                fsel::fmt6(res.reference->observed).c_str(), res.reference->consistent ? "consistent" : "differs");
  }
  return kExitOk;
}

int cmd_rank(const std::string& config, const Overrides& ov) {
  const auto cfg = load_effective(config, ov);
  const auto prepared = fsel::prepare_dataset(fsel::load_csv(cfg.data_path, cfg.schema), cfg);
  std::vector<fsel::RankedList> lists;
  for (auto m : fsel::kFilterMethods)
    lists.push_back(fsel::collapse_to_attributes(fsel::rank_attributes(prepared, m, cfg.binning), prepared));
  std::vector<std::string> names;
  for (const auto& a : prepared.attributes()) names.push_back(a.name);
  print_written(fsel::write_files(cfg.output_dir, {{"ranking.csv", fsel::csv::format(fsel::ranked_list_rows(lists, names))}}));
  return kExitOk;
}

int cmd_select(const std::string& config, const Overrides& ov) {
  const auto cfg = load_effective(config, ov);
  const auto prepared = fsel::prepare_dataset(fsel::load_csv(cfg.data_path, cfg.schema), cfg);
  auto res = fsel::describe(prepared, cfg);
  res.selection = fsel::run_selection(prepared, cfg);
  print_written(fsel::emit_all(res, cfg.output_dir));
  return kExitOk;
}

int cmd_evaluate(const std::string& config, const Overrides& ov, const std::string& subset) {
  const auto cfg = load_effective(config, ov);
  const auto prepared = fsel::prepare_dataset(fsel::load_csv(cfg.data_path, cfg.schema), cfg);
  auto res = fsel::describe(prepared, cfg);
  std::vector<fsel::NamedSubset> subsets;
  if (!subset.empty()) subsets.push_back({"selected", parse_subset(subset, prepared)});
  subsets.push_back({"all-attributes", fsel::all_attributes(prepared)});
  res.comparison = fsel::run_comparison(prepared, subsets, cfg);
  print_written(fsel::emit_all(res, cfg.output_dir));
  return kExitOk;
}

int cmd_synth(const fsel::SynthSpec& spec, const std::string& out) {
  const auto d = fsel::synth_generate(spec);
  fsel::PipelineConfig cfg;
  cfg.data_path = "data.csv";
  cfg.schema = fsel::numeric_schema(d);
  cfg.seed = spec.seed;
  cfg.output_dir = "out";
  std::string planted;
  for (auto a : d.provenance().informative) planted += d.attribute(a).name + "\n";
  print_written(fsel::write_files(out, {{"data.csv", fsel::csv::format(fsel::income_csv_rows(d))},
                                        {"config.ini", fsel::serialize_config(cfg)},
                                        {"planted.txt", planted}}));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute selection by consensus voting and classifier comparison"};
  app.set_version_flag("--version", std::string(fsel::kVersion));
  app.require_subcommand(1);

  std::string config;
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Pipeline config file")->required();
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { ov.seed = v; }, "Master seed");
    sub->add_option_function<std::string>("--method", [&](const std::string& v) { ov.method = v; },
                                          "Selection method: filters, forward or ga");
    sub->add_option_function<std::size_t>("--folds", [&](const std::size_t& v) { ov.folds = v; },
                                          "Fold count for selection and evaluation");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { ov.out = v; }, "Output directory");
    sub->add_flag("--fold-safe", ov.fold_safe, "Fit standardization inside each training fold");
  };

  auto* run = app.add_subcommand("run", "Run selection and comparison, write every report");
  add_common(run);
  auto* rank = app.add_subcommand("rank", "Rank attributes with each filter method");
  add_common(rank);
  auto* select = app.add_subcommand("select", "Consensus selection only");
  add_common(select);
  auto* evaluate = app.add_subcommand("evaluate", "Compare a subset against all attributes");
  add_common(evaluate);
  std::string subset;
  evaluate->add_option("--subset", subset, "Comma-separated attribute names");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with planted attributes");
  fsel::SynthSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--rows", spec.n_rows, "Rows")->capture_default_str();
  synth->add_option("--informative", spec.n_informative, "Informative attributes")->capture_default_str();
  synth->add_option("--noise", spec.n_noise, "Noise attributes")->capture_default_str();
  synth->add_option("--separation", spec.separation, "Class mean spacing")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config, ov);
    if (*rank) return cmd_rank(config, ov);
    if (*select) return cmd_select(config, ov);
    if (*evaluate) return cmd_evaluate(config, ov, subset);
    if (*synth) return cmd_synth(spec, synth_out);
  } catch (const fsel::ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const fsel::DataError& e) {
    print_error("data", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error("data", e.what());
    return kExitData;
  }
  return kExitUsage;
}
