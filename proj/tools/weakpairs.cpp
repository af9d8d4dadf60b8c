// weakpairs command-line driver.
//
// Subcommands:
//   defaults  print the default configuration tree
//   generate  sample a synthetic pair dataset + test set
//   train     run the multi-seed training protocol
//   sweep     run a parameter sweep (fraction / noise / gamma / lambda / prior)
//   verify    run the statistical verification suite
//
// All outputs land in the --out directory (default: $WEAKPAIRS_OUT or
// ./out). Every command writes a manifest.json with the fully resolved
// configuration; re-running a command with the manifest's configuration
// reproduces all CSV outputs byte for byte.
//
// Exit codes: 0 success, 1 config error, 2 runtime/training error,
// 3 verification failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakpairs/checks.hpp"
#include "weakpairs/data.hpp"
#include "weakpairs/trainer.hpp"
#include "weakpairs/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace weakpairs;

namespace {

constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& require_field(const json& j, const std::string& key,
                          const std::string& path) {
  if (!j.is_object())
    throw ConfigError("config node '" + (path.empty() ? "<root>" : path) +
                      "' must be an object");
  if (!j.contains(key))
    throw ConfigError("missing required field: " + join_path(path, key));
  return j.at(key);
}

double get_double(const json& j, const std::string& key,
                  const std::string& path, std::optional<double> def = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field: " + join_path(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number())
    throw ConfigError("field " + join_path(path, key) + " must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& j, const std::string& key,
                     const std::string& path,
                     std::optional<std::int64_t> def = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field: " + join_path(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError("field " + join_path(path, key) +
                      " must be an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& key,
                       const std::string& path,
                       std::optional<std::string> def = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field: " + join_path(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_string())
    throw ConfigError("field " + join_path(path, key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_double_array(const json& j, const std::string& key,
                                     const std::string& path) {
  const json& v = require_field(j, key, path);
  if (!v.is_array())
    throw ConfigError("field " + join_path(path, key) + " must be an array");
  std::vector<double> out;
  for (const auto& item : v) {
    if (!item.is_number())
      throw ConfigError("field " + join_path(path, key) +
                        " must contain numbers only");
    out.push_back(item.get<double>());
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- config -> domain structs -------------------------------------------

GeneratorConfig parse_generator(const json& j, const std::string& path) {
  GeneratorConfig g;
  g.pi_plus = get_double(j, "pi_plus", path, 0.2);
  g.sigma = get_double(j, "sigma", path, 1.0);
  if (j.contains("mu_plus") || j.contains("mu_minus")) {
    g.mu_plus = get_double_array(j, "mu_plus", path);
    g.mu_minus = get_double_array(j, "mu_minus", path);
  } else {
    const auto dim =
        static_cast<std::size_t>(get_int(j, "dim", path, std::int64_t{2}));
    if (dim == 0) throw ConfigError(join_path(path, "dim") + " must be >= 1");
    g.mu_plus.assign(dim, 0.0);
    g.mu_minus.assign(dim, 0.0);
    g.mu_plus[0] = 2.0;
    g.mu_minus[0] = -2.0;
  }
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid ") + (path.empty() ? "generator" : path) +
                      ": " + e.what());
  }
  return g;
}

json generator_to_json(const GeneratorConfig& g) {
  return json{{"pi_plus", g.pi_plus},
              {"mu_plus", g.mu_plus},
              {"mu_minus", g.mu_minus},
              {"sigma", g.sigma}};
}

EstimatorSpec parse_estimator_config(const json& j, const std::string& path) {
  EstimatorSpec spec = weakpairs::parse_estimator(
      get_string(j, "kind", path, std::string("scd-abs")));
  spec.gamma = get_double(j, "gamma", path, spec.gamma);
  spec.lambda = get_double(j, "lambda", path, spec.lambda);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid estimator: ") + e.what());
  }
  return spec;
}

json estimator_to_json(const EstimatorSpec& spec) {
  json j{{"kind", to_string(spec.kind)},
         {"correction", to_string(spec.correction)}};
  if (spec.kind == EstimatorKind::Convex ||
      spec.kind == EstimatorKind::CorrectedConvex)
    j["gamma"] = spec.gamma;
  if (spec.kind == EstimatorKind::ScdLambda) j["lambda"] = spec.lambda;
  return j;
}

TrainConfig parse_train_section(const json& root, const EstimatorSpec& spec,
                                std::uint64_t seed) {
  const json j = root.contains("train") ? root.at("train") : json::object();
  TrainConfig cfg;
  cfg.estimator = spec;
  cfg.epochs = static_cast<int>(get_int(j, "epochs", "train", std::int64_t{200}));
  cfg.batch_pairs =
      static_cast<int>(get_int(j, "batch_pairs", "train", std::int64_t{256}));
  cfg.lr = get_double(j, "lr", "train", 1e-3);
  cfg.weight_decay = get_double(j, "weight_decay", "train", 1e-5);
  cfg.eval_every =
      static_cast<int>(get_int(j, "eval_every", "train", std::int64_t{1}));
  cfg.tail_epochs =
      static_cast<int>(get_int(j, "tail_epochs", "train", std::int64_t{10}));
  cfg.seed = seed;
  if (j.contains("hidden")) {
    cfg.hidden.clear();
    for (double h : get_double_array(j, "hidden", "train"))
      cfg.hidden.push_back(static_cast<std::size_t>(h));
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid train section: ") + e.what());
  }
  return cfg;
}

json train_to_json(const TrainConfig& cfg) {
  json hidden = json::array();
  for (std::size_t h : cfg.hidden) hidden.push_back(h);
  return json{{"epochs", cfg.epochs},
              {"batch_pairs", cfg.batch_pairs},
              {"lr", cfg.lr},
              {"weight_decay", cfg.weight_decay},
              {"eval_every", cfg.eval_every},
              {"tail_epochs", cfg.tail_epochs},
              {"hidden", hidden}};
}

std::optional<NoiseConfig> parse_noise(const json& j,
                                       const std::string& path) {
  if (!j.contains("noise")) return std::nullopt;
  const json& n = j.at("noise");
  NoiseConfig cfg;
  cfg.epsilon = get_double(n, "epsilon", join_path(path, "noise"), 1.0);
  cfg.sigma_noise = get_double(n, "sigma", join_path(path, "noise"), 0.0);
  if (!(cfg.sigma_noise >= 0.0))
    throw ConfigError(join_path(path, "noise.sigma") +
                      " must be non-negative");
  return cfg;
}

DataPlan parse_data_plan(const json& root, const std::string& path) {
  const json& j = require_field(root, "data", "");
  DataPlan plan;
  plan.generator = parse_generator(
      require_field(j, "generator", path), join_path(path, "generator"));
  plan.n_pairs = static_cast<std::size_t>(get_int(j, "n_pairs", path));
  plan.n_test =
      static_cast<std::size_t>(get_int(j, "n_test", path, std::int64_t{2000}));
  const std::string annot =
      get_string(j, "annotator", path, std::string("exact"));
  if (annot == "learned")
    plan.learned_annotator = true;
  else if (annot != "exact")
    throw ConfigError(join_path(path, "annotator") +
                      " must be 'exact' or 'learned'");
  plan.probe_size = static_cast<std::size_t>(
      get_int(j, "probe_size", path, std::int64_t{1000}));
  plan.noise = parse_noise(j, path);
  plan.fraction = get_double(j, "fraction", path, 1.0);
  if (!(plan.fraction > 0.0 && plan.fraction <= 1.0))
    throw ConfigError(join_path(path, "fraction") + " must lie in (0,1]");
  if (plan.n_pairs == 0)
    throw ConfigError(join_path(path, "n_pairs") + " must be >= 1");
  return plan;
}

json plan_to_json(const DataPlan& plan) {
  json j{{"generator", generator_to_json(plan.generator)},
         {"n_pairs", plan.n_pairs},
         {"n_test", plan.n_test},
         {"annotator", plan.learned_annotator ? "learned" : "exact"},
         {"fraction", plan.fraction}};
  if (plan.learned_annotator) j["probe_size"] = plan.probe_size;
  if (plan.noise)
    j["noise"] = json{{"epsilon", plan.noise->epsilon},
                      {"sigma", plan.noise->sigma_noise}};
  return j;
}

// --- common CLI plumbing --------------------------------------------------

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
};

fs::path resolve_out_dir(const CommonOpts& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv("WEAKPAIRS_OUT"); env && *env)
    return env;
  return "out";
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

int resolve_threads(int requested, int n_tasks) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  const int cap = hw == 0 ? 1 : static_cast<int>(hw);
  return std::max(1, std::min(cap, n_tasks));
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, fs::path out_dir)
      : command_(std::move(command)),
        out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_dir_);
  }

  const fs::path& out_dir() const { return out_dir_; }

  fs::path declare(const std::string& filename) {
    outputs_.push_back(filename);
    return out_dir_ / filename;
  }

  void write(const json& resolved_config, std::uint64_t master_seed,
             json extra = json::object()) {
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    json manifest{{"command", command_},
                  {"version", kVersion},
                  {"master_seed", master_seed},
                  {"config", resolved_config},
                  {"outputs", outputs_},
                  {"duration_seconds", elapsed}};
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    std::ofstream out(out_dir_ / "manifest.json");
    if (!out)
      throw IoError("cannot write manifest: " +
                    (out_dir_ / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// --- subcommand handlers ---------------------------------------------------

int cmd_defaults() {
  json defaults{
      {"generate",
       {{"generator",
         {{"pi_plus", 0.2},
          {"dim", 2},
          {"mu_plus", {2.0, 0.0}},
          {"mu_minus", {-2.0, 0.0}},
          {"sigma", 1.0}}},
        {"n_pairs", 2000},
        {"n_test", 2000},
        {"annotator", "exact"},
        {"probe_size", 1000},
        {"seed", 1}}},
      {"train",
       {{"data",
         {{"generator", {{"pi_plus", 0.2}, {"dim", 2}, {"sigma", 1.0}}},
          {"n_pairs", 2000},
          {"n_test", 2000},
          {"annotator", "exact"}}},
        {"estimator", {{"kind", "scd-abs"}}},
        {"train",
         {{"epochs", 200},
          {"batch_pairs", 256},
          {"lr", 1e-3},
          {"weight_decay", 1e-5},
          {"hidden", {300, 300, 300}},
          {"eval_every", 1},
          {"tail_epochs", 10}}},
        {"n_seeds", 5},
        {"seed", 1}}},
      {"sweep",
       {{"axis",
         {{"kind", "gamma"}, {"values", {0.0, 0.2, 0.5, 0.8, 1.0}}}}}},
      {"verify", {{"checks", {"all"}}, {"seed", 1}}}};
  std::cout << defaults.dump(2) << '\n';
  return 0;
}

int cmd_generate(const CommonOpts& opts) {
  const json cfg = load_config(opts.config_path);
  const GeneratorConfig gcfg =
      parse_generator(require_field(cfg, "generator", ""), "generator");
  const auto n_pairs = static_cast<std::size_t>(get_int(cfg, "n_pairs", ""));
  const auto n_test =
      static_cast<std::size_t>(get_int(cfg, "n_test", "", std::int64_t{2000}));
  const std::string annotator =
      get_string(cfg, "annotator", "", std::string("exact"));
  if (annotator != "exact" && annotator != "learned")
    throw ConfigError("annotator must be 'exact' or 'learned'");
  const auto probe_size = static_cast<std::size_t>(
      get_int(cfg, "probe_size", "", std::int64_t{1000}));
  const auto noise = parse_noise(cfg, "");
  const std::uint64_t seed = opts.seed_override.value_or(
      static_cast<std::uint64_t>(get_int(cfg, "seed", "", std::int64_t{1})));
  if (n_pairs == 0) throw ConfigError("n_pairs must be >= 1");

  ManifestWriter manifest("generate", resolve_out_dir(opts));
  TaskGenerator gen(gcfg, Rng::derive(seed, 1));
  PairDataset pairs = annotator == "learned"
                          ? gen.annotate_pairs_learned(n_pairs, probe_size)
                          : gen.annotate_pairs_exact(n_pairs).pairs;
  const LabeledDataset test = gen.sample_labeled(n_test);
  ClassPrior prior = gen.prior();
  if (noise) {
    NoiseConfig noise_cfg = *noise;
    noise_cfg.seed = Rng::derive(seed, 3);
    auto [noisy, corrupted] = corrupt(pairs, prior, noise_cfg);
    pairs = std::move(noisy);
    prior = corrupted;
  }
  save_pairs_csv(pairs, manifest.declare("pairs.csv"));
  save_labeled_csv(test, manifest.declare("test.csv"));

  json resolved{{"generator", generator_to_json(gcfg)},
                {"n_pairs", n_pairs},
                {"n_test", n_test},
                {"annotator", annotator},
                {"seed", seed}};
  if (annotator == "learned") resolved["probe_size"] = probe_size;
  if (noise)
    resolved["noise"] =
        json{{"epsilon", noise->epsilon}, {"sigma", noise->sigma_noise}};
  manifest.write(resolved, seed,
                 json{{"pi_plus_for_training", prior.pi_plus()}});
  return 0;
}

void write_results_csv(const fs::path& path, const std::string& estimator,
                       const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write results CSV: " + path.string());
  out << "row_type,estimator,seed_index,accuracy,first_negative_epoch,"
         "min_batch_risk\n";
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    const RunResult& run = result.runs[k];
    out << "run," << estimator << ',' << k << ','
        << format_real(run.final_accuracy) << ',';
    if (run.first_negative_epoch) out << *run.first_negative_epoch;
    out << ',' << format_real(run.min_batch_risk) << '\n';
  }
  out << "summary," << estimator << ",mean,"
      << format_real(result.mean_accuracy) << ",,\n";
  out << "summary," << estimator << ",std," << format_real(result.std_accuracy)
      << ",,\n";
}

int cmd_train(const CommonOpts& opts) {
  const json cfg = load_config(opts.config_path);
  const EstimatorSpec spec = parse_estimator_config(
      cfg.contains("estimator") ? cfg.at("estimator") : json::object(),
      "estimator");
  const std::uint64_t seed = opts.seed_override.value_or(
      static_cast<std::uint64_t>(get_int(cfg, "seed", "", std::int64_t{1})));
  const int n_seeds =
      static_cast<int>(get_int(cfg, "n_seeds", "", std::int64_t{5}));
  const TrainConfig train_cfg = parse_train_section(cfg, spec, seed);
  const int threads = resolve_threads(
      opts.threads > 0
          ? opts.threads
          : static_cast<int>(get_int(cfg, "threads", "", std::int64_t{0})),
      n_seeds);

  const json& data_cfg = require_field(cfg, "data", "");
  ManifestWriter manifest("train", resolve_out_dir(opts));
  ExperimentResult result;
  json resolved_data;
  if (data_cfg.contains("pairs_csv")) {
    const std::string pairs_path = get_string(data_cfg, "pairs_csv", "data");
    const std::string test_path = get_string(data_cfg, "test_csv", "data");
    const double pi_plus = get_double(data_cfg, "pi_plus", "data");
    const PairDataset pairs = load_pairs_csv(pairs_path);
    const LabeledDataset test = load_labeled_csv(test_path);
    result = run_experiment(train_cfg, pairs, ClassPrior(pi_plus), test,
                            n_seeds, threads);
    resolved_data = json{{"pairs_csv", pairs_path},
                         {"test_csv", test_path},
                         {"pi_plus", pi_plus}};
  } else {
    const DataPlan plan = parse_data_plan(cfg, "data");
    result = run_experiment(train_cfg, plan, n_seeds, threads);
    resolved_data = plan_to_json(plan);
  }

  write_results_csv(manifest.declare("results.csv"), spec.display_name(),
                    result);
  json resolved{{"data", resolved_data},
                {"estimator", estimator_to_json(spec)},
                {"train", train_to_json(train_cfg)},
                {"n_seeds", n_seeds},
                {"seed", seed}};
  manifest.write(resolved, seed,
                 json{{"mean_accuracy", result.mean_accuracy},
                      {"std_accuracy", result.std_accuracy},
                      {"std_formula", "population (divide by n_seeds)"}});
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  const json cfg = load_config(opts.config_path);
  const EstimatorSpec spec = parse_estimator_config(
      cfg.contains("estimator") ? cfg.at("estimator") : json::object(),
      "estimator");
  const std::uint64_t seed = opts.seed_override.value_or(
      static_cast<std::uint64_t>(get_int(cfg, "seed", "", std::int64_t{1})));
  const int n_seeds =
      static_cast<int>(get_int(cfg, "n_seeds", "", std::int64_t{5}));
  const TrainConfig train_cfg = parse_train_section(cfg, spec, seed);
  const DataPlan plan = parse_data_plan(cfg, "data");
  const int threads = resolve_threads(
      opts.threads > 0
          ? opts.threads
          : static_cast<int>(get_int(cfg, "threads", "", std::int64_t{0})),
      n_seeds);

  const json& axis_cfg = require_field(cfg, "axis", "");
  SweepAxis axis;
  try {
    axis.kind = parse_sweep_axis(get_string(axis_cfg, "kind", "axis"));
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  }
  if (axis.kind == SweepAxisKind::Noise) {
    axis.epsilons = get_double_array(axis_cfg, "epsilon", "axis");
    axis.sigmas = get_double_array(axis_cfg, "sigma", "axis");
  } else {
    axis.values = get_double_array(axis_cfg, "values", "axis");
  }

  ManifestWriter manifest("sweep", resolve_out_dir(opts));
  std::vector<SweepCell> cells;
  try {
    cells = sweep(train_cfg, plan, axis, n_seeds, threads);
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  }

  const fs::path csv_path = manifest.declare("sweep.csv");
  {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot write sweep CSV: " + csv_path.string());
    out << "axis,value,value2,estimator,mean,std";
    for (int k = 0; k < n_seeds; ++k) out << ",seed_" << k;
    out << ",error\n";
    for (const SweepCell& cell : cells) {
      out << to_string(axis.kind) << ',' << format_real(cell.value1) << ','
          << format_real(cell.value2) << ',' << cell.estimator << ',';
      if (cell.ok) {
        out << format_real(cell.mean_accuracy) << ','
            << format_real(cell.std_accuracy);
        for (double acc : cell.per_seed) out << ',' << format_real(acc);
      } else {
        out << ',';
        for (int k = 0; k < n_seeds; ++k) out << ',';
      }
      // the error text may contain commas; replace them to keep the CSV flat
      std::string err = cell.error;
      for (char& ch : err)
        if (ch == ',' || ch == '\n') ch = ';';
      out << ',' << err << '\n';
    }
  }

  json axis_json{{"kind", to_string(axis.kind)}};
  if (axis.kind == SweepAxisKind::Noise) {
    axis_json["epsilon"] = axis.epsilons;
    axis_json["sigma"] = axis.sigmas;
  } else {
    axis_json["values"] = axis.values;
  }
  json resolved{{"data", plan_to_json(plan)},
                {"estimator", estimator_to_json(spec)},
                {"train", train_to_json(train_cfg)},
                {"axis", axis_json},
                {"n_seeds", n_seeds},
                {"seed", seed}};
  const bool all_ok =
      std::all_of(cells.begin(), cells.end(),
                  [](const SweepCell& c) { return c.ok; });
  manifest.write(resolved, seed, json{{"cells", cells.size()},
                                      {"all_cells_ok", all_ok}});
  return all_ok ? 0 : 2;
}

int cmd_verify(const CommonOpts& opts, std::vector<std::string> checks_flag) {
  const json cfg = load_config(opts.config_path);
  VerifySuiteConfig suite;
  suite.seed = opts.seed_override.value_or(
      static_cast<std::uint64_t>(get_int(cfg, "seed", "", std::int64_t{1})));
  suite.calibration_datasets = static_cast<std::size_t>(get_int(
      cfg, "calibration_datasets", "",
      static_cast<std::int64_t>(suite.calibration_datasets)));
  suite.unbias_pairs = static_cast<std::size_t>(get_int(
      cfg, "unbias_pairs", "", static_cast<std::int64_t>(suite.unbias_pairs)));
  suite.unbias_reps = static_cast<std::size_t>(get_int(
      cfg, "unbias_reps", "", static_cast<std::int64_t>(suite.unbias_reps)));
  suite.var_pairs = static_cast<std::size_t>(get_int(
      cfg, "var_pairs", "", static_cast<std::int64_t>(suite.var_pairs)));
  suite.var_reps = static_cast<std::size_t>(get_int(
      cfg, "var_reps", "", static_cast<std::int64_t>(suite.var_reps)));
  suite.bias_reps = static_cast<std::size_t>(get_int(
      cfg, "bias_reps", "", static_cast<std::int64_t>(suite.bias_reps)));
  suite.weak_label_pairs = static_cast<std::size_t>(
      get_int(cfg, "weak_label_pairs", "",
              static_cast<std::int64_t>(suite.weak_label_pairs)));
  suite.oracle_samples = static_cast<std::size_t>(
      get_int(cfg, "oracle_samples", "",
              static_cast<std::int64_t>(suite.oracle_samples)));

  std::vector<std::string> checks = std::move(checks_flag);
  if (checks.empty() && cfg.contains("checks"))
    for (const auto& c : cfg.at("checks")) checks.push_back(c.get<std::string>());
  if (checks.empty()) checks.push_back("all");
  if (checks.size() == 1 && checks.front() == "all")
    checks = verify_check_names();
  const auto known = verify_check_names();
  for (const auto& name : checks) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      std::string valid;
      for (const auto& n : known) valid += " " + n;
      throw ConfigError("unknown check '" + name + "'; valid names:" + valid);
    }
  }

  ManifestWriter manifest("verify", resolve_out_dir(opts));
  json records = json::array();
  bool all_pass = true;
  for (const auto& name : checks) {
    const CheckResult result = run_check(name, suite);
    json stats = json::object();
    for (const CheckStat& stat : result.stats) stats[stat.name] = stat.value;
    records.push_back(json{{"name", result.name},
                           {"pass", result.pass},
                           {"detail", result.detail},
                           {"stats", stats}});
    all_pass = all_pass && result.pass;
    std::cout << (result.pass ? "PASS " : "FAIL ") << result.name << ": "
              << result.detail << '\n';
  }

  const fs::path report_path = manifest.declare("report.json");
  {
    json report{{"all_pass", all_pass},
                {"seed", suite.seed},
                {"checks", records}};
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot write report: " + report_path.string());
    out << report.dump(2) << '\n';
  }
  json resolved{{"checks", checks},
                {"seed", suite.seed},
                {"unbias_pairs", suite.unbias_pairs},
                {"unbias_reps", suite.unbias_reps},
                {"var_pairs", suite.var_pairs},
                {"var_reps", suite.var_reps},
                {"bias_reps", suite.bias_reps},
                {"weak_label_pairs", suite.weak_label_pairs},
                {"oracle_samples", suite.oracle_samples},
                {"calibration_datasets", suite.calibration_datasets}};
  manifest.write(resolved, suite.seed, json{{"all_pass", all_pass}});
  return all_pass ? 0 : 3;
}

void emit_error(const char* kind, const std::string& message) {
  json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakpairs: weakly supervised classification from "
               "similarity-confidence / confidence-difference pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonOpts opts;
  std::uint64_t seed_flag = 0;
  std::vector<std::string> checks_flag;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* config_opt =
        cmd->add_option("--config", opts.config_path, "configuration file");
    if (needs_config) config_opt->required();
    cmd->add_option("--out", opts.out_dir,
                    "output directory (default: $WEAKPAIRS_OUT or ./out)");
    cmd->add_option("--seed", seed_flag, "master seed override")
        ->each([&](const std::string&) { opts.seed_override = seed_flag; });
    cmd->add_option("--threads", opts.threads, "worker thread cap");
  };

  auto* defaults_cmd =
      app.add_subcommand("defaults", "print the default configuration tree");
  auto* generate_cmd = app.add_subcommand(
      "generate", "sample a synthetic pair dataset and test set");
  add_common(generate_cmd, true);
  auto* train_cmd =
      app.add_subcommand("train", "run the multi-seed training protocol");
  add_common(train_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep_cmd, true);
  auto* verify_cmd =
      app.add_subcommand("verify", "run the statistical verification suite");
  add_common(verify_cmd, false);
  verify_cmd->add_option("--checks", checks_flag,
                         "check names (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (defaults_cmd->parsed()) return cmd_defaults();
    if (generate_cmd->parsed()) return cmd_generate(opts);
    if (train_cmd->parsed()) return cmd_train(opts);
    if (sweep_cmd->parsed()) return cmd_sweep(opts);
    if (verify_cmd->parsed()) return cmd_verify(opts, checks_flag);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const InvalidSpec& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const PriorDegenerate& e) {
    emit_error("runtime", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error("runtime", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 2;
  }
  return 0;
}
