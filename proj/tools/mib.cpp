/* Copyright 2026 The mib Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// mib: run experiments, list estimators, run the invariant suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mib/bounds/registry.hpp"
#include "mib/errors.hpp"
#include "mib/harness/config.hpp"
#include "mib/harness/runner.hpp"
#include "mib/harness/selfcheck.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw mib::ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run(const std::string& experiment, const std::string& config_path, const std::string& out, std::uint64_t seed,
        bool seed_given, std::size_t workers, bool bits, bool quiet) {
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    const std::string text = read_file(config_path);
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw mib::ConfigError(config_path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw mib::ConfigError(config_path + ": expected a JSON object");
  }
  if (j.contains("experiment") && j["experiment"] != experiment) {
    throw mib::ConfigError("config names experiment " + j["experiment"].dump() + " but '" + experiment +
                           "' was requested");
  }
  j["experiment"] = experiment;
  if (seed_given) j["seed"] = seed;
  auto config = mib::harness::parse_config(j);
  if (workers > 0) config.workers = workers;
  config.out_dir = out;

  mib::harness::RunOptions opt;
  opt.out_dir = out;
  opt.workers = config.workers;
  opt.hex = bits;
  opt.log = quiet ? nullptr : &std::cerr;
  const auto res = mib::harness::run_experiment(config, opt);
  for (const auto& f : res.files) std::cout << (opt.out_dir / f.path).string() << '\n';
  std::cout << (opt.out_dir / "manifest.json").string() << '\n';
  for (const auto& a : res.aborts) std::cerr << "aborted: " << a << '\n';
  return 0;
}

int list_estimators() {
  for (const auto& info : mib::bounds::estimator_table()) {
    const bool upper = info.kind == mib::bounds::Estimator::kLooUpper || info.kind == mib::bounds::Estimator::kRate ||
                       info.kind == mib::bounds::Estimator::kTcUpper;
    std::cout << info.name << '\t' << (info.lower_bound ? "lower" : upper ? "upper" : "estimate") << '\t'
              << (info.uses_critic ? "critic" : "closed-form") << '\t' << info.summary << '\n';
  }
  return 0;
}

int selfcheck(std::uint64_t seed) {
  bool all = true;
  for (const auto& r : mib::harness::run_selfcheck(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all ? 0 : kNumericExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual information bounds toolkit"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write CSVs plus manifest.json");
  std::string experiment, config_path, out = ".";
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  bool bits = false, quiet = false;
  run_cmd->add_option("experiment", experiment, "fig2 | optimal_sweep | gradient | interp_compare | table3")
      ->required();
  run_cmd->add_option("--config", config_path, "Experiment JSON; defaults apply to absent fields");
  run_cmd->add_option("--out", out, "Output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Global seed (overrides the config)");
  run_cmd->add_option("--workers", workers, "Worker threads (overrides the config)");
  run_cmd->add_flag("--bits", bits, "Write floats as exact hexadecimal values");
  run_cmd->add_flag("--quiet", quiet, "No progress lines on stderr");

  auto* list_cmd = app.add_subcommand("list-estimators", "Print the estimator registry");
  auto* check_cmd = app.add_subcommand("selfcheck", "Run the invariant suite");
  std::uint64_t check_seed = 0;
  check_cmd->add_option("--seed", check_seed, "Seed for the random cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run_cmd) return run(experiment, config_path, out, seed, seed_opt->count() > 0, workers, bits, quiet);
    if (*list_cmd) return list_estimators();
    if (*check_cmd) return selfcheck(check_seed);
  } catch (const mib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const mib::NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericExit;
  }
  return 0;
}
