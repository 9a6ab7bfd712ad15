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
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mib/autodiff/ops.hpp"
#include "mib/errors.hpp"
#include "mib/training/training.hpp"

namespace mib::training {
namespace {

using ad::Tensor;
using bounds::Estimator;

critics::MLPSpec mlp(std::size_t in, std::size_t out, std::size_t width = 32) {
  return critics::MLPSpec{in, {width}, out, critics::Activation::kRelu, 1.0};
}

TrainConfig small_config(Estimator kind, std::size_t steps, std::size_t dim = 4) {
  TrainConfig c;
  c.estimator.kind = kind;
  c.dim = dim;
  c.critic = critics::SeparableCritic{mlp(dim, 8), mlp(dim, 8)};
  c.baseline = std::nullopt;
  c.batch_size = 16;
  c.steps = steps;
  c.seed = 3;
  c.adam.learning_rate = 1e-3;
  if (kind == Estimator::kTuba || kind == Estimator::kInterpolated) c.baseline = critics::LearnedBaseline{mlp(dim, 1)};
  return c;
}

TEST(Adam, ZeroGradientLeavesParameters) {
  critics::ParameterSet p{Tensor::vector({1.0, -2.0, 3.0})};
  const std::vector<Tensor> g{Tensor::zeros({3})};
  AdamState s;
  adam_step(p, g, s, AdamConfig{});
  EXPECT_EQ(p[0][0], 1.0);
  EXPECT_EQ(p[0][1], -2.0);
  EXPECT_EQ(p[0][2], 3.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  critics::ParameterSet p{Tensor::vector({1.0, -2.0, 3.0, 0.5})};
  const std::vector<Tensor> g{Tensor::vector({0.3, -7.0, 1e-3, 50.0})};
  AdamState s;
  adam_step(p, g, s, cfg);
  const double start[] = {1.0, -2.0, 3.0, 0.5};
  for (std::size_t i = 0; i < 4; ++i) {
    const double delta = p[0][i] - start[i];
    EXPECT_LE(std::abs(delta), cfg.learning_rate * (1 + 1e-6));
    // At t = 1 the bias-corrected step is -lr * g / (|g| + eps).
    EXPECT_NEAR(delta, -cfg.learning_rate * g[0][i] / (std::abs(g[0][i]) + cfg.eps), 1e-15);
  }
}

TEST(Adam, MinimizesQuadratic) {
  critics::ParameterSet p{Tensor::vector({3.0, -4.0})};
  AdamState s;
  const AdamConfig cfg{0.05, 0.9, 0.999, 1e-8};
  for (int i = 0; i < 2000; ++i) {
    const std::vector<Tensor> g{p[0] * 2.0};
    adam_step(p, g, s, cfg);
  }
  EXPECT_NEAR(p[0][0], 0.0, 1e-2);
  EXPECT_NEAR(p[0][1], 0.0, 1e-2);
}

TEST(Adam, ShapeMismatch) {
  critics::ParameterSet p{Tensor::vector({1.0, 2.0})};
  AdamState s;
  EXPECT_THROW(adam_step(p, std::vector<Tensor>{Tensor::zeros({3})}, s, AdamConfig{}), ShapeError);
  EXPECT_THROW(adam_step(p, std::vector<Tensor>{}, s, AdamConfig{}), ShapeError);
  EXPECT_THROW((AdamConfig{0.0, 0.9, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{1e-3, 1.0, 0.999, 1e-8}.validate()), ConfigError);
}

TEST(Smoothing, Examples) {
  const std::vector<double> flat(50, 2.5);
  for (double v : smooth_series(flat, 0.9)) EXPECT_DOUBLE_EQ(v, 2.5);
  const std::vector<double> raw{1.0, 5.0, -2.0, 3.0};
  const auto same = smooth_series(raw, 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(same[i], raw[i]);
  EXPECT_THROW(smooth_series(std::vector<double>{}, 0.5), ConfigError);

  std::vector<double> step(1000, 0.0);
  for (std::size_t i = 500; i < 1000; ++i) step[i] = 1.0;
  const auto s = smooth_series(step, 0.99);
  std::size_t cross = 0;
  while (s[500 + cross] < 0.5) ++cross;
  // 1 - 0.99^(n + 1) >= 1/2 first at n = 68; ln 2 / 0.01 = 69.3.
  EXPECT_NEAR(static_cast<double>(cross), std::log(2.0) / 0.01, 1.5);
}

TEST(Schedule, Staircase) {
  const double levels[] = {2, 4, 6, 8, 10};
  const auto s = staircase(20000, levels);
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s[i].step_start, i * 4000);
    EXPECT_EQ(s[i].target_mi, levels[i]);
  }
  TrainConfig c = small_config(Estimator::kNwj, 50);
  c.schedule = {{0, 1.0}, {20, 3.0}};
  const Trace t = train_estimator(c);
  ASSERT_EQ(t.records.size(), 50u);
  for (const auto& r : t.records) {
    EXPECT_EQ(r.target_mi, r.step < 20 ? 1.0 : 3.0);
  }
  for (std::size_t i = 0; i < t.records.size(); ++i) EXPECT_EQ(t.records[i].step, i);
}

TEST(Training, DeterministicGivenSeed) {
  for (Estimator kind : {Estimator::kNwj, Estimator::kMine, Estimator::kInterpolated}) {
    const TrainConfig c = small_config(kind, 40);
    const Trace a = train_estimator(c), b = train_estimator(c);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      ASSERT_EQ(std::memcmp(&a.records[i].estimate, &b.records[i].estimate, sizeof(double)), 0);
      ASSERT_EQ(std::memcmp(&a.records[i].objective, &b.records[i].objective, sizeof(double)), 0);
    }
  }
}

TEST(Training, EveryTrainableEstimatorRuns) {
  for (Estimator kind : {Estimator::kTuba, Estimator::kNwj, Estimator::kMine, Estimator::kInfonce,
                         Estimator::kInterpolated, Estimator::kJs}) {
    const Trace t = train_estimator(small_config(kind, 30));
    for (const auto& r : t.records) ASSERT_TRUE(std::isfinite(r.estimate)) << static_cast<int>(kind);
  }
  TrainConfig c = small_config(Estimator::kReparamNwj, 30);
  c.critic = critics::KnownConditionalCritic{toy::GaussianPairSpec::uniform(4, 0.0)};
  c.baseline = critics::LearnedBaseline{mlp(4, 1)};
  EXPECT_EQ(train_estimator(c).records.size(), 30u);
}

TEST(Training, JointCriticOnCubicData) {
  TrainConfig c = small_config(Estimator::kInfonce, 20);
  c.dataset = Dataset::kCubic;
  c.critic = critics::JointCritic{mlp(8, 1)};
  EXPECT_EQ(train_estimator(c).records.size(), 20u);
}

TEST(Training, KnownConditionalTraceIsIid) {
  TrainConfig c = small_config(Estimator::kInfonceTractable, 25);
  c.critic = critics::KnownConditionalCritic{toy::GaussianPairSpec::uniform(4, 0.0)};
  c.schedule = {{0, 2.0}};
  const Trace t = train_estimator(c);
  // Same stream, evaluated directly.
  Rng rng(derive_seed(c.seed, 0, 2));
  const auto spec = toy::GaussianPairSpec::uniform(4, toy::rho_for_mi(2.0, 4));
  for (const auto& r : t.records) {
    const toy::Batch b = toy::sample_joint(spec, c.batch_size, rng);
    EXPECT_EQ(r.estimate, bounds::infonce_tractable(toy::log_conditional(spec, b.x, b.y)).estimate);
  }
}

TEST(Training, InfoNceNeverExceedsLogK) {
  TrainConfig c = small_config(Estimator::kInfonce, 300, 20);
  c.critic = critics::SeparableCritic{mlp(20, 16, 64), mlp(20, 16, 64)};
  c.batch_size = 64;
  c.schedule = {{0, 10.0}};
  const Trace t = train_estimator(c);
  for (double s : smooth_trace(t, 0.99)) EXPECT_LE(s, std::log(64.0) + 1e-12);
}

TEST(Training, InfoNceLearnsAtModerateMi) {
  TrainConfig c;
  c.estimator.kind = Estimator::kInfonce;
  c.critic = critics::SeparableCritic{critics::MLPSpec{20, {256, 256}, 32, critics::Activation::kRelu, 1.0},
                                      critics::MLPSpec{20, {256, 256}, 32, critics::Activation::kRelu, 1.0}};
  c.steps = 5000;
  c.batch_size = 64;
  c.schedule = {{0, 2.0}};
  c.seed = 11;
  const Trace t = train_estimator(c);
  const double final_smoothed = smooth_trace(t, c.smoothing).back();
  EXPECT_GE(final_smoothed, 1.4);
  EXPECT_LE(final_smoothed, 2.0);
}

TEST(Training, CsvLayout) {
  Trace t = train_estimator(small_config(Estimator::kNwj, 5));
  t.config_hash = "abc123";
  std::ostringstream out;
  write_trace_csv(out, t, smooth_trace(t, 0.9));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,estimate,smoothed,objective,target_mi,clamp_count,seed,config_hash");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
    EXPECT_NE(line.find(",3,abc123"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Training, ConfigErrors) {
  TrainConfig c = small_config(Estimator::kNwj, 0);
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kDv, 10);
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kNwj, 10);
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kNwj, 10);
  c.schedule = {{0, 2.0}, {0, 4.0}};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kLooUpper, 10);
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kNwj, 10);
  c.critic = critics::JointCritic{mlp(4, 1)};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(Estimator::kNwj, 10);
  c.dataset = Dataset::kCubic;
  c.critic = critics::KnownConditionalCritic{toy::GaussianPairSpec::uniform(4, 0.0)};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Training, NonFiniteScoresAbort) {
  TrainConfig c = small_config(Estimator::kNwj, 10);
  c.critic = critics::SeparableCritic{critics::MLPSpec{4, {8}, 8, critics::Activation::kRelu, 1e200},
                                      critics::MLPSpec{4, {8}, 8, critics::Activation::kRelu, 1e200}};
  EXPECT_THROW(train_estimator(c), NumericError);
}

TEST(Training, MineTracksDvEstimate) {
  const Trace t = train_estimator(small_config(Estimator::kMine, 30));
  for (const auto& r : t.records) EXPECT_TRUE(std::isfinite(r.objective));
}

}  // namespace
}  // namespace mib::training
