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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mib/autodiff/gradcheck.hpp"
#include "mib/autodiff/ops.hpp"
#include "mib/errors.hpp"
#include "mib/harness/config.hpp"
#include "mib/harness/experiments.hpp"
#include "mib/harness/pool.hpp"
#include "mib/harness/runner.hpp"
#include "mib/harness/selfcheck.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::harness {
namespace {

using bounds::Estimator;
using bounds::InterpolationMode;

training::EstimatorSpec est(Estimator kind, double alpha = 0.01, InterpolationMode mode = InterpolationMode::kMixture) {
  training::EstimatorSpec e;
  e.kind = kind;
  e.alpha = alpha;
  e.mode = mode;
  return e;
}

const SweepRecord& find(const std::vector<SweepRecord>& rs, const std::string& name, std::size_t k, double mi,
                        std::optional<double> alpha = std::nullopt, const std::string& mode = "") {
  for (const auto& r : rs) {
    if (r.estimator == name && r.batch_size == k && r.target_mi == mi && r.alpha == alpha &&
        (mode.empty() || r.mode == mode)) {
      return r;
    }
  }
  throw std::runtime_error("record not found: " + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mib_harness_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

TEST(Config, RejectsUnknownKeysWithTheirPath) {
  try {
    parse_config_text(R"({"experiment": "fig2", "estimators": [{"name": "nwj", "critic": {"kind": "joint", "depth": 3}}]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("estimators[0].critic.depth"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config_text(R"({"experiment": "gradient", "reps": 0})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "gradient", "reps": -3})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "optimal_sweep", "estimators": ["mine"]})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "optimal_sweep", "dataset": "cubic"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "fig2", "estimators": ["nope"]})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "fig2", "estimators": [{"name": "nwj", "alpha": 0.5}]})"),
               ConfigError);
  EXPECT_THROW(parse_config_text(R"({"experiment": "gradient", "estimators": ["js"]})"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"steps": 10})"), ConfigError);
}

TEST(Config, HashIsCanonical) {
  const auto a = parse_config_text(R"({"experiment": "optimal_sweep", "reps": 100, "mi_levels": [2, 4]})");
  const auto b = parse_config_text(R"({"mi_levels": [2, 4], "reps": 100, "experiment": "optimal_sweep"})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  auto c = a;
  c.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(c));
  auto d = a;
  d.workers = 8;
  d.out_dir = "/elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(d));
  // The canonical form parses back to the same configuration.
  EXPECT_EQ(config_hash(parse_config(to_json(a))), config_hash(a));
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Config, InterpolatedEntriesExpandOverAlphasAndModes) {
  const auto c = parse_config_text(
      R"({"experiment": "interp_compare", "estimators": ["nwj", "interpolated", {"name": "interpolated", "alpha": 0.3}],
          "alphas": [0.1, 0.5], "modes": ["mixture", "product"]})");
  const auto e = expand_estimators(c);
  ASSERT_EQ(e.size(), 1u + 4u + 2u);
  EXPECT_EQ(e[0].spec.kind, Estimator::kNwj);
  EXPECT_EQ(e[1].spec.mode, InterpolationMode::kMixture);
  EXPECT_DOUBLE_EQ(e[2].spec.alpha, 0.5);
  EXPECT_EQ(e[3].spec.mode, InterpolationMode::kProduct);
  EXPECT_DOUBLE_EQ(e[5].spec.alpha, 0.3);
  EXPECT_EQ(e[6].spec.mode, InterpolationMode::kProduct);
}

TEST(Pool, RunsEveryIndexAndRethrowsTheFirstFailure) {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericError("seven");
                            }),
               NumericError);
}

TEST(OptimalSweep, RecordsDecomposeAndMatchAcrossWorkerCounts) {
  OptimalSweepSpec spec;
  spec.estimators = {est(Estimator::kNwj), est(Estimator::kInfonce), est(Estimator::kInterpolated, 0.1),
                     est(Estimator::kLooUpper)};
  spec.batch_sizes = {16, 32};
  spec.mi_levels = {2, 8};
  spec.n_batches = 300;
  spec.seed = 11;
  const auto one = optimal_sweep(spec);
  spec.workers = 3;
  const auto three = optimal_sweep(spec);
  ASSERT_EQ(one.size(), 16u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_NEAR(one[i].mse, one[i].bias * one[i].bias + one[i].variance, 1e-9);
    EXPECT_EQ(one[i].mean, three[i].mean);
    EXPECT_EQ(one[i].mse, three[i].mse);
  }
}

TEST(OptimalSweep, NwjIsUnbiasedAndInfonceIsCapped) {
  OptimalSweepSpec spec;
  spec.estimators = {est(Estimator::kNwj), est(Estimator::kInfonce)};
  spec.batch_sizes = {16, 64, 256};
  spec.mi_levels = {2, 4, 6, 8, 10};
  spec.n_batches = 5000;
  spec.seed = 3;
  const auto rs = optimal_sweep(spec);
  for (const auto& r : rs) {
    if (r.estimator != "nwj") continue;
    EXPECT_LT(std::abs(r.bias), 3.0 * r.stderr_mean) << "K=" << r.batch_size << " MI=" << r.target_mi;
  }
  const auto& cap = find(rs, "infonce", 64, 10);
  EXPECT_NEAR(cap.bias, std::log(64.0) - 10.0, 0.05);
}

TEST(OptimalSweep, InterpolationBeatsBothEndsSomewhere) {
  OptimalSweepSpec spec;
  spec.estimators = {est(Estimator::kNwj), est(Estimator::kInfonce)};
  const std::vector<double> alphas{0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0};
  for (double a : alphas) spec.estimators.push_back(est(Estimator::kInterpolated, a));
  spec.batch_sizes = {64};
  spec.mi_levels = {6};
  spec.n_batches = 5000;
  spec.seed = 4;
  const auto rs = optimal_sweep(spec);
  const double floor = std::min(find(rs, "nwj", 64, 6).mse, find(rs, "infonce", 64, 6).mse);
  double best = INFINITY;
  for (double a : alphas) best = std::min(best, find(rs, "interpolated", 64, 6, a).mse);
  EXPECT_LT(best, floor);
}

TEST(OptimalSweep, RejectsEstimatorsWithoutAnOptimalForm) {
  OptimalSweepSpec spec;
  spec.estimators = {est(Estimator::kMine)};
  EXPECT_THROW(optimal_sweep(spec), ConfigError);
  spec.estimators = {est(Estimator::kNwj)};
  spec.n_batches = 1;
  EXPECT_THROW(optimal_sweep(spec), ConfigError);
}

TEST(InterpCompare, EndpointsAndMixtureDominatesLinear) {
  const auto c = parse_config_text(
      R"({"experiment": "interp_compare", "mi_levels": [6], "reps": 4000, "seed": 2,
          "alphas": [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0]})");
  const auto spec = sweep_spec(c, 1);
  const auto rs = optimal_sweep(spec);
  const auto& nce = find(rs, "infonce", 64, 6);
  const auto& lin1 = find(rs, "interpolated", 64, 6, 1.0, "linear");
  const auto& mix1 = find(rs, "interpolated", 64, 6, 1.0, "mixture");
  const auto& prod1 = find(rs, "interpolated", 64, 6, 1.0, "product");
  EXPECT_EQ(lin1.mean, nce.mean);
  EXPECT_EQ(lin1.variance, nce.variance);
  EXPECT_EQ(prod1.mean, mix1.mean);
  EXPECT_EQ(prod1.variance, mix1.variance);

  const double n = static_cast<double>(spec.n_batches);
  for (const auto& lin : rs) {
    if (lin.mode != "linear") continue;
    bool dominated = false;
    for (const auto& mix : rs) {
      if (mix.mode != "mixture") continue;
      const double bias_slack = 3.0 * (lin.stderr_mean + mix.stderr_mean);
      // Normal-theory standard error of a variance estimate.
      const double var_slack = 3.0 * std::sqrt(2.0 / (n - 1.0)) * (lin.variance + mix.variance);
      if (std::abs(mix.bias) <= std::abs(lin.bias) + bias_slack && mix.variance <= lin.variance + var_slack) {
        dominated = true;
      }
    }
    EXPECT_TRUE(dominated) << "linear alpha=" << *lin.alpha;
  }
}

TEST(Gradient, NwjGradientMatchesFiniteDifferencesThroughTheSampler) {
  const std::size_t d = 4, k = 16;
  const auto fn = [&](const ad::Tensor& rho) {
    Rng rng(99);  // same noise on every call
    const auto batch = toy::sample_gaussian(rho, k, rng);
    const auto c = toy::log_conditional(rho, batch.x, batch.y);
    return optimal_estimate(est(Estimator::kNwj), c, toy::log_marginal(batch.y)).objective;
  };
  const auto point = ad::Tensor::vector({0.3, -0.2, 0.5, 0.1});
  ASSERT_EQ(point.size(), d);
  EXPECT_LT(ad::check_gradient(fn, point, 1e-6), 1e-4);
}

TEST(Gradient, ZeroCorrelationGivesZeroMeanGradient) {
  GradientSpec spec;
  spec.estimators = {est(Estimator::kNwj), est(Estimator::kInfonce)};
  spec.batch_sizes = {16};
  spec.mi_levels = {0};
  spec.reps = 500;
  spec.seed = 5;
  for (const auto& r : gradient_sweep(spec)) {
    EXPECT_EQ(r.true_grad, 0.0);
    ASSERT_FALSE(r.skipped);
    for (std::size_t i = 0; i < r.grad_mean.size(); ++i) {
      EXPECT_LT(std::abs(r.grad_mean[i]), 3.0 * r.grad_stderr[i]) << r.estimator << " coordinate " << i;
    }
  }
}

TEST(Gradient, BestAlphaPicksTheSmallestMse) {
  std::vector<GradientRecord> recs(3);
  const double alpha[] = {0.1, 0.5, 0.9};
  const double mse[] = {0.4, 0.2, 0.3};
  for (int i = 0; i < 3; ++i) {
    recs[i].estimator = "interpolated";
    recs[i].mode = "mixture";
    recs[i].alpha = alpha[i];
    recs[i].batch_size = 16;
    recs[i].target_mi = 2;
    recs[i].grad_mse = mse[i];
  }
  recs.push_back(recs[1]);
  recs.back().mode = "linear";
  recs.back().grad_mse = 0.0;
  const auto best = best_alpha(recs);
  ASSERT_EQ(best.size(), 1u);
  EXPECT_EQ(best[0].alpha, 0.5);
}

TEST(Training, JobsCoverTheGridWithDistinctSeeds) {
  const auto c = parse_config_text(
      R"({"experiment": "fig2", "steps": 10, "dataset": ["gaussian", "cubic"],
          "critics": [{"kind": "separable", "hidden_sizes": [8], "embed_dim": 4}, {"kind": "joint", "hidden_sizes": [8]}]})");
  const auto jobs = fig2_jobs(c);
  // nwj, js, infonce and interpolated at three alphas, two critics, two datasets.
  ASSERT_EQ(jobs.size(), 6u * 2u * 2u);
  std::set<std::uint64_t> seeds;
  for (const auto& j : jobs) seeds.insert(j.train.seed);
  EXPECT_EQ(seeds.size(), jobs.size());

  const auto t3 = table3_jobs(parse_config_text(
      R"({"experiment": "table3", "steps": 10, "grid": {"critic_kinds": ["separable", "joint"], "widths": [8, 16]}})"));
  std::size_t reparam = 0;
  for (const auto& j : t3) {
    if (j.train.estimator.kind == Estimator::kReparamNwj) {
      ++reparam;
      EXPECT_TRUE(std::holds_alternative<critics::KnownConditionalCritic>(j.train.critic));
      EXPECT_TRUE(std::holds_alternative<critics::LearnedBaseline>(*j.train.baseline));
    }
  }
  // The critic axis is collapsed for the fixed conditional critic.
  EXPECT_EQ(reparam, 2u);
  EXPECT_EQ(t3.size(), 4u * 4u + 2u);
}

TEST(Training, SegmentEndsReadTheLastStepOfEachLevel) {
  training::Trace t;
  std::vector<double> sm;
  for (std::size_t i = 0; i < 10; ++i) {
    t.records.push_back({i, 0.0, 0.0, 0, 0.0});
    sm.push_back(static_cast<double>(i));
  }
  const std::vector<double> levels{1, 2};
  const auto ends = segment_ends(t, sm, training::staircase(10, levels));
  ASSERT_EQ(ends.size(), 2u);
  EXPECT_EQ(ends[0], 4.0);
  EXPECT_EQ(ends[1], 9.0);
}

TEST(Runner, RerunsAreByteIdenticalAndListedInTheManifest) {
  const auto c = parse_config_text(
      R"({"experiment": "fig2", "steps": 30, "estimators": ["infonce", {"name": "interpolated", "alpha": 0.5}],
          "critics": [{"kind": "separable", "hidden_sizes": [8], "embed_dim": 4}], "seed": 42})");
  RunOptions a, b;
  a.out_dir = scratch_dir("a");
  b.out_dir = scratch_dir("b");
  b.workers = 2;
  const auto ra = run_experiment(c, a);
  const auto rb = run_experiment(c, b);
  ASSERT_EQ(ra.files.size(), 3u);
  ASSERT_EQ(ra.figures.size(), 1u);
  EXPECT_EQ(ra.figures[0].id, "fig2");
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    EXPECT_EQ(ra.files[i].path, rb.files[i].path);
    EXPECT_NE(ra.files[i].path.find(ra.config_hash.substr(0, 8)), std::string::npos);
    EXPECT_EQ(slurp(a.out_dir / ra.files[i].path), slurp(b.out_dir / rb.files[i].path));
  }
  const auto manifest = nlohmann::json::parse(slurp(a.out_dir / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), ra.files.size());
  EXPECT_EQ(manifest["config_hash"], ra.config_hash);
  EXPECT_TRUE(manifest["wall_clock_seconds"].is_number());

  // Every trace row carries the seed and hash; infonce never exceeds log K.
  std::istringstream trace(slurp(a.out_dir / ra.files[0].path));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "step,estimate,smoothed,objective,target_mi,clamp_count,seed,config_hash");
  std::size_t rows = 0;
  while (std::getline(trace, line)) {
    ++rows;
    EXPECT_NE(line.find(",42," + ra.config_hash), std::string::npos);
    const double estimate = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(estimate, std::log(64.0));
  }
  EXPECT_EQ(rows, 30u);
}

TEST(Runner, HexFloatsRoundTrip) {
  const auto c = parse_config_text(R"({"experiment": "optimal_sweep", "estimators": ["nwj"], "batch_sizes": [8],
                                       "mi_levels": [2], "reps": 20})");
  RunOptions dec, hex;
  dec.out_dir = scratch_dir("dec");
  hex.out_dir = scratch_dir("hex");
  hex.hex = true;
  const auto rd = run_experiment(c, dec);
  run_experiment(c, hex);
  auto row = [](const std::string& text) { return text.substr(text.find('\n') + 1); };
  const std::string d = row(slurp(dec.out_dir / rd.files[0].path));
  const std::string h = row(slurp(hex.out_dir / rd.files[0].path));
  auto field = [](const std::string& r, int n) {
    std::size_t p = 0;
    for (int i = 0; i < n; ++i) p = r.find(',', p) + 1;
    return r.substr(p, r.find(',', p) - p);
  };
  EXPECT_EQ(std::stod(field(d, 5)), std::strtod(field(h, 5).c_str(), nullptr));
  EXPECT_EQ(field(h, 5).substr(0, 2), "0x");
}

TEST(Runner, Table3ContinuesPastAbortsAndReportsTheClosestPoint) {
  // An absurd learning rate drives the critic to overflow.
  const auto c = parse_config_text(
      R"({"experiment": "table3", "steps": 200, "estimators": ["nwj"], "mi_levels": [2],
          "grid": {"critic_kinds": ["joint"], "widths": [8], "learning_rates": [1e-3, 1e300]}})");
  RunOptions opt;
  opt.out_dir = scratch_dir("t3");
  const auto res = run_experiment(c, opt);
  EXPECT_EQ(res.aborts.size(), 1u);
  ASSERT_EQ(res.files.size(), 2u);
  std::istringstream summary(slurp(opt.out_dir / res.files[1].path));
  std::string header, row;
  std::getline(summary, header);
  std::getline(summary, row);
  EXPECT_NE(row.find("joint-2x8-lr0.001-k64"), std::string::npos) << row;
  EXPECT_NE(row.find(",2,1,"), std::string::npos) << row;  // two points, one usable
}

TEST(Selfcheck, EveryInvariantHolds) {
  for (const auto& r : run_selfcheck(0)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

}  // namespace
}  // namespace mib::harness
