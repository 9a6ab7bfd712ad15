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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "../support/naive_bounds.hpp"
#include "../support/primitive_cases.hpp"
#include "mib/autodiff/gradcheck.hpp"
#include "mib/autodiff/ops.hpp"
#include "mib/autodiff/tape.hpp"
#include "mib/bounds/bounds.hpp"
#include "mib/errors.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::bounds {
namespace {

using ad::Tensor;
namespace naive = testing::naive;

Tensor random_scores(Rng& rng, std::size_t k, double scale) {
  std::vector<double> v(k * k);
  for (auto& e : v) e = scale * rng.normal();
  return Tensor::matrix(k, k, std::move(v));
}

Tensor random_log_q(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  for (auto& e : v) e = rng.normal();
  return Tensor::vector(std::move(v));
}

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : v) ss += (e - m) * (e - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

// Optimal-critic ingredients for the d-dimensional Gaussian pair.
struct GaussianScores {
  Tensor c;      // log p(y_i | x_j)
  Tensor log_p;  // log p(y_i)
};

GaussianScores gaussian_scores(const toy::GaussianPairSpec& spec, std::size_t k, Rng& rng) {
  const toy::Batch b = toy::sample_joint(spec, k, rng);
  return {toy::log_conditional(spec, b.x, b.y), toy::log_marginal(b.y)};
}

// Monte Carlo over `batches` joint batches of a statistic of the scores.
template <class F>
Stats monte_carlo(double mi, std::size_t k, int batches, std::uint64_t seed, F stat) {
  const auto spec = toy::GaussianPairSpec::uniform(20, toy::rho_for_mi(mi, 20));
  Rng rng(seed);
  std::vector<double> v;
  for (int b = 0; b < batches; ++b) v.push_back(stat(gaussian_scores(spec, k, rng)));
  return stats(v);
}

TEST(BoundExamples, ConstantCriticsGiveZero) {
  const Tensor c = Tensor::full({5, 5}, 0.7);
  EXPECT_NEAR(tuba(c, Tensor::full({5}, 0.7)).estimate, 0.0, 1e-14);
  EXPECT_NEAR(nwj(Tensor::full({5, 5}, 1.0)).estimate, 0.0, 1e-14);
  EXPECT_NEAR(dv(c).estimate, 0.0, 1e-14);
  EXPECT_NEAR(infonce(c).estimate, 0.0, 1e-14);
  EXPECT_NEAR(mine(c, std::exp(0.7)).objective.item(), 0.0, 1e-14);
  EXPECT_NEAR(mine(c, std::nullopt).objective.item(), 0.0, 1e-14);
}

TEST(BoundExamples, InfoNceTwoByTwo) {
  const BoundResult r = infonce(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  EXPECT_NEAR(r.estimate, 1.0 - std::log((std::exp(1.0) + 1.0) / 2.0), 1e-15);
  EXPECT_NEAR(r.estimate, 0.379885, 1e-6);
}

TEST(BoundExamples, JsAtZeroCritic) {
  const BoundResult r = js(Tensor::zeros({4, 4}));
  EXPECT_NEAR(r.objective.item(), -2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(r.objective.item(), -1.386294, 1e-6);
  EXPECT_NEAR(r.estimate, 0.0, 1e-15);
  EXPECT_TRUE(r.diagnostics.evaluation_only);
}

TEST(BoundExamples, RateUpper) {
  const auto one = toy::GaussianPairSpec::uniform(1, 0.0);
  const double unit[] = {1.0};
  const double two[] = {2.0};
  EXPECT_NEAR(rate_upper(one, unit), 0.0, 1e-15);
  EXPECT_NEAR(rate_upper(one, two), 0.5 * (0.5 - 1.0 + std::log(2.0)), 1e-15);
  EXPECT_NEAR(rate_upper(one, two), 0.096574, 1e-6);
  const auto spec = toy::GaussianPairSpec{{0.3, -0.8, 0.5}};
  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(rate_upper(spec, ones), toy::true_mi(spec), 1e-12);
  const double bad[] = {1.0, 0.0, 1.0};
  EXPECT_THROW(rate_upper(spec, bad), DomainError);
}

TEST(BoundExamples, TcUpper) {
  const double uppers[] = {1.0, 0.5, 0.25};
  EXPECT_DOUBLE_EQ(tc_upper(uppers, 1.5), 0.25);
}

TEST(BoundExamples, BaLowerOptimalDecoder) {
  const double rho = 0.5;
  const toy::GaussianPairSpec spec = toy::GaussianPairSpec::uniform(1, rho);
  const LinearGaussianDecoder dec{Tensor::matrix(1, 1, {rho}), Tensor::vector({std::sqrt(1 - rho * rho)})};
  Rng rng(3);
  std::vector<double> v;
  for (int b = 0; b < 2000; ++b) {
    v.push_back(ba_lower(dec, toy::sample_joint(spec, 64, rng), toy::standard_normal_entropy(1)).estimate);
  }
  const Stats s = stats(v);
  EXPECT_NEAR(s.mean, 0.143841, 3 * s.se);
  EXPECT_NEAR(toy::standard_normal_entropy(20), 28.378770, 1e-6);
  const LinearGaussianDecoder bad{Tensor::matrix(1, 1, {rho}), Tensor::vector({0.0})};
  EXPECT_THROW(ba_lower(bad, toy::sample_joint(spec, 4, rng), 1.0), DomainError);
}

TEST(BoundExamples, RatePerDimensionOfLinearEncoder) {
  const toy::LinearGaussianEncoder enc{Tensor::matrix(2, 2, {1.0, 0.5, 0.0, 2.0}), 0.5};
  // Var(y_0) = 1 + 0.25 + 0.25, Var(y_1) = 4 + 0.25.
  EXPECT_NEAR(rate_upper_dim(enc, 0, 1.5), 0.5 * std::log(1.5 / 0.25), 1e-12);
  EXPECT_NEAR(rate_upper_dim(enc, 1, 4.25), 0.5 * std::log(4.25 / 0.25), 1e-12);
  // Any other marginal variance only loosens the bound.
  EXPECT_GT(rate_upper_dim(enc, 0, 1.0), rate_upper_dim(enc, 0, 1.5));
  EXPECT_GT(rate_upper_dim(enc, 0, 3.0), rate_upper_dim(enc, 0, 1.5));
  EXPECT_THROW(rate_upper_dim(enc, 2, 1.0), ShapeError);
  EXPECT_THROW(rate_upper_dim(enc, 0, 0.0), DomainError);
}

TEST(BoundExamples, PosteriorDecoderOfDiagonalEncoder) {
  const toy::LinearGaussianEncoder enc{Tensor::matrix(2, 2, {2.0, 0.0, 0.0, 0.5}), 1.0};
  const auto dec = posterior_decoder(enc);
  const auto a = dec.a.values();
  EXPECT_NEAR(a[0], 2.0 / 5.0, 1e-12);
  EXPECT_NEAR(a[1], 0.0, 1e-12);
  EXPECT_NEAR(a[3], 0.5 / 1.25, 1e-12);
  EXPECT_NEAR(dec.s.values()[0], std::sqrt(1.0 / 5.0), 1e-12);
  EXPECT_NEAR(dec.s.values()[1], std::sqrt(1.0 / 1.25), 1e-12);
}

TEST(BoundOracles, MatchStraightLoopImplementations) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng() % 15;
    const Tensor s = random_scores(rng, k, 2.0);
    const Tensor lq = random_log_q(rng, k);
    const auto m = naive::from_tensor(s);
    const auto q = naive::from_vector(lq);
    EXPECT_NEAR(tuba(s, lq).estimate, static_cast<double>(naive::tuba(m, q)), 1e-12);
    EXPECT_NEAR(nwj(s).estimate, static_cast<double>(naive::nwj(m)), 1e-12);
    EXPECT_NEAR(dv(s).estimate, static_cast<double>(naive::dv(m)), 1e-12);
    EXPECT_NEAR(infonce(s).estimate, static_cast<double>(naive::infonce(m)), 1e-12);
    EXPECT_NEAR(loo_upper(s).estimate, static_cast<double>(naive::loo_upper(m)), 1e-12);
    EXPECT_NEAR(js(s).objective.item(), static_cast<double>(naive::js_objective(m)), 1e-12);
    EXPECT_NEAR(js(s).estimate, static_cast<double>(naive::js_estimate(m)), 1e-12);
    EXPECT_NEAR(reparam_nwj(s, lq).estimate, static_cast<double>(naive::tuba(m, q)), 1e-12);
    for (double alpha : {0.0, 0.01, 0.3, 0.9, 1.0}) {
      EXPECT_NEAR(interpolated(s, lq, alpha).estimate,
                  static_cast<double>(naive::interpolated_mixture(m, q, alpha)), 1e-12);
      EXPECT_NEAR(interpolated(s, lq, alpha, InterpolationMode::kProduct).estimate,
                  static_cast<double>(naive::interpolated_product(m, q, alpha)), 1e-12);
      EXPECT_NEAR(interpolated(s, lq, alpha, InterpolationMode::kLinear).estimate,
                  alpha * naive::infonce(m) + (1 - alpha) * naive::tuba(m, q), 1e-12);
    }
  }
}

TEST(BoundIdentities, InterpolatedEndpoints) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 30;
    const Tensor s = random_scores(rng, k, 3.0);
    const Tensor lq = random_log_q(rng, k);
    EXPECT_NEAR(interpolated(s, lq, 1.0).estimate, infonce(s).estimate, 1e-12);
    // alpha = 0: 1 + mean_diag(S - log q) - mean over independent pairs of exp(S - log q).
    const auto m = naive::from_tensor(s);
    naive::Real direct = 1, second = 0;
    for (std::size_t i = 0; i < k; ++i) {
      direct += (m(i, i) - lq[i]) / k;
      second += naive::offdiag_row_mean_exp(m, i, lq[i]) / k;
    }
    EXPECT_NEAR(interpolated(s, lq, 0.0).estimate, static_cast<double>(direct - second), 1e-12);
    for (auto mode : {InterpolationMode::kMixture, InterpolationMode::kProduct, InterpolationMode::kLinear}) {
      EXPECT_NEAR(interpolated(s, lq, 1.0, mode).estimate, infonce(s).estimate, 1e-12);
    }
    EXPECT_NEAR(interpolated(s, Tensor::full({k}, 1.0), 0.0, InterpolationMode::kLinear).estimate,
                nwj(s).estimate, 1e-12);
  }
}

TEST(BoundIdentities, AveragingIdentity) {
  Rng rng(6);
  const Tensor s = random_scores(rng, 12, 4.0);
  const Tensor log_m = ad::log_mean_exp(s, 1);
  for (std::size_t i = 0; i < 12; ++i) {
    double a = 0.0;
    for (std::size_t j = 0; j < 12; ++j) a += std::exp(s.at(i, j) - log_m[i]);
    EXPECT_NEAR(a / 12.0, 1.0, 1e-14);
  }
}

TEST(BoundIdentities, LooMinusTractableIsDenominatorGap) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng() % 20;
    const Tensor c = random_scores(rng, k, 3.0);
    const auto m = naive::from_tensor(c);
    naive::Real gap = 0;
    for (std::size_t i = 0; i < k; ++i) {
      gap += (std::log(naive::row_mean_exp(m, i)) - std::log(naive::offdiag_row_mean_exp(m, i, 0))) / k;
    }
    EXPECT_NEAR(loo_upper(c).estimate - infonce_tractable(c).estimate, static_cast<double>(gap), 1e-12);
  }
}

TEST(BoundProperties, PerBatchCaps) {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng() % 63;
    const Tensor s = random_scores(rng, k, 1.0 + 9.0 * rng.uniform());
    const double log_k = std::log(static_cast<double>(k));
    EXPECT_LE(infonce(s).estimate, log_k + 1e-12);
    EXPECT_LE(infonce_tractable(s).estimate, log_k + 1e-12);
    const Tensor lq = random_log_q(rng, k);
    for (double alpha : {0.01, 0.1, 0.5}) {
      EXPECT_LE(interpolated(s, lq, alpha).estimate, 1.0 + std::log(k / alpha) + 1e-12);
    }
  }
}

TEST(BoundProperties, ExchangeSymmetry) {
  Rng rng(9);
  const std::size_t k = 9;
  const Tensor s = random_scores(rng, k, 2.0);
  const Tensor lq = random_log_q(rng, k);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> sp(k * k), qp(k);
  for (std::size_t i = 0; i < k; ++i) {
    qp[i] = lq[perm[i]];
    for (std::size_t j = 0; j < k; ++j) sp[i * k + j] = s.at(perm[i], perm[j]);
  }
  const Tensor t = Tensor::matrix(k, k, sp);
  const Tensor tq = Tensor::vector(qp);
  EXPECT_NEAR(tuba(s, lq).estimate, tuba(t, tq).estimate, 1e-12);
  EXPECT_NEAR(nwj(s).estimate, nwj(t).estimate, 1e-12);
  EXPECT_NEAR(dv(s).estimate, dv(t).estimate, 1e-12);
  EXPECT_NEAR(mine(s, 2.0).estimate, mine(t, 2.0).estimate, 1e-12);
  EXPECT_NEAR(infonce(s).estimate, infonce(t).estimate, 1e-12);
  EXPECT_NEAR(js(s).estimate, js(t).estimate, 1e-12);
  EXPECT_NEAR(js(s).objective.item(), js(t).objective.item(), 1e-12);
  EXPECT_NEAR(loo_upper(s).estimate, loo_upper(t).estimate, 1e-12);
  for (auto mode : {InterpolationMode::kMixture, InterpolationMode::kProduct, InterpolationMode::kLinear}) {
    EXPECT_NEAR(interpolated(s, lq, 0.3, mode).estimate, interpolated(t, tq, 0.3, mode).estimate, 1e-12);
  }
}

TEST(BoundProperties, ObjectiveMatchesEstimate) {
  Rng rng(10);
  const Tensor s = random_scores(rng, 8, 2.0);
  const Tensor lq = random_log_q(rng, 8);
  for (const BoundResult& r : {tuba(s, lq), nwj(s), infonce(s), interpolated(s, lq, 0.4)}) {
    EXPECT_DOUBLE_EQ(r.estimate, r.objective.item());
  }
  EXPECT_NE(js(s).estimate, js(s).objective.item());
}

TEST(BoundGradients, ObjectivesMatchFiniteDifferences) {
  Rng rng(11);
  const std::size_t k = 6;
  const Tensor point = random_scores(rng, k, 1.5);
  const Tensor lq = random_log_q(rng, k);
  const std::vector<ad::ScalarFunction> fns{
      [&](const Tensor& s) { return tuba(s, lq).objective; },
      [&](const Tensor& s) { return nwj(s).objective; },
      [&](const Tensor& s) { return dv(s).objective; },
      [&](const Tensor& s) { return infonce(s).objective; },
      [&](const Tensor& s) { return js(s).objective; },
      [&](const Tensor& s) { return loo_upper(s).objective; },
      [&](const Tensor& s) { return interpolated(s, lq, 0.3).objective; },
      [&](const Tensor& s) { return interpolated(s, lq, 0.3, InterpolationMode::kProduct).objective; },
      [&](const Tensor& s) { return interpolated(s, lq, 0.3, InterpolationMode::kLinear).objective; },
  };
  for (std::size_t f = 0; f < fns.size(); ++f) EXPECT_LT(ad::check_gradient(fns[f], point, 1e-5), 1e-6) << f;
  // Gradient in log_q as well.
  EXPECT_LT(ad::check_gradient([&](const Tensor& q) { return interpolated(point, q, 0.3).objective; }, lq, 1e-5),
            1e-6);
  EXPECT_LT(ad::check_gradient([&](const Tensor& q) { return tuba(point, q).objective; }, lq, 1e-5), 1e-6);
}

TEST(BoundGradients, InfoNceOnEightByEight) {
  Rng rng(12);
  const double err = ad::check_gradient([](const Tensor& s) { return infonce(s).objective; },
                                        random_scores(rng, 8, 1.0), 1e-5);
  EXPECT_LT(err, 1e-6);
}

std::vector<double> gradient_of(const ad::ScalarFunction& fn, const Tensor& point) {
  ad::Tape tape;
  const Tensor x = tape.leaf(point);
  const auto g = tape.backward(fn(x));
  const auto v = g.at(x).values();
  return {v.begin(), v.end()};
}

TEST(BoundGradients, MineMatchesTubaWithFrozenBaseline) {
  Rng rng(13);
  const Tensor s = random_scores(rng, 7, 1.0);
  const double ema = 1.7;
  // Finite differences of tuba with the baseline held fixed.
  const auto numeric = ad::compare_gradient(
      [&](const Tensor& x) { return tuba(x, Tensor::full({7}, std::log(ema))).objective; }, s, 1e-5);
  const auto analytic = gradient_of([&](const Tensor& x) { return mine(x, ema).objective; }, s);
  for (std::size_t i = 0; i < analytic.size(); ++i) EXPECT_NEAR(analytic[i], numeric.numeric[i], 1e-8);
}

TEST(BoundGradients, MineAtBatchMeanMatchesDv) {
  Rng rng(14);
  const Tensor s = random_scores(rng, 7, 1.0);
  const double batch_mean = std::exp(*mine(s, std::nullopt).diagnostics.log_mean_exp_offdiag);
  const auto gm = gradient_of([&](const Tensor& x) { return mine(x, batch_mean).objective; }, s);
  const auto gd = gradient_of([](const Tensor& x) { return dv(x).objective; }, s);
  for (std::size_t i = 0; i < gm.size(); ++i) EXPECT_NEAR(gm[i], gd[i], 1e-12);
}

TEST(BoundDiagnostics, MineReportsBothValues) {
  Rng rng(15);
  const Tensor s = random_scores(rng, 6, 1.0);
  const BoundResult r = mine(s, 1.3);
  EXPECT_DOUBLE_EQ(r.estimate, *r.diagnostics.dv_value);
  EXPECT_NEAR(*r.diagnostics.dv_value, dv(s).estimate, 1e-14);
  EXPECT_NEAR(*r.diagnostics.tuba_value, tuba(s, Tensor::full({6}, std::log(1.3))).estimate, 1e-14);
  EXPECT_TRUE(dv(s).diagnostics.evaluation_only);
  EXPECT_TRUE(loo_upper(s).diagnostics.expectation_only);
}

TEST(BoundDiagnostics, ClampsAreCounted) {
  std::vector<double> v(9, 0.0);
  v[1] = 80.0;   // off-diagonal, clamped
  v[5] = -70.0;  // off-diagonal, clamped
  v[4] = 90.0;   // diagonal, never exponentiated
  const Tensor s = Tensor::matrix(3, 3, v);
  const BoundResult r = nwj(s);
  EXPECT_EQ(r.diagnostics.clamp_count, 2u);
  EXPECT_TRUE(r.diagnostics.saturated);
  EXPECT_TRUE(std::isfinite(r.estimate));
  EXPECT_EQ(nwj(Tensor::zeros({3, 3})).diagnostics.clamp_count, 0u);
  // Saturated InfoNCE: diagonal dominates every row.
  EXPECT_TRUE(infonce(ad::Tensor::identity(16) * 40.0).diagnostics.saturated);
  EXPECT_FALSE(infonce(ad::Tensor::zeros({16, 16})).diagnostics.saturated);
}

TEST(BoundErrors, ShapesAndDomains) {
  EXPECT_THROW(nwj(Tensor::zeros({1, 1})), ShapeError);
  EXPECT_THROW(infonce(Tensor::zeros({2, 3})), ShapeError);
  EXPECT_THROW(tuba(Tensor::zeros({3, 3}), Tensor::zeros({2})), ShapeError);
  EXPECT_THROW(interpolated(Tensor::zeros({3, 3}), Tensor::zeros({3}), 1.5), DomainError);
  EXPECT_THROW(interpolated(Tensor::zeros({3, 3}), Tensor::zeros({3}), -0.1), DomainError);
  EXPECT_THROW(loo_upper(Tensor::zeros({1, 1})), ShapeError);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(tuba(Tensor::zeros({2, 2}), Tensor::vector({0.0, inf})), DomainError);
}

TEST(BoundMonteCarlo, NwjOptimalCriticIsUnbiased) {
  const Stats s = monte_carlo(4.0, 64, 2000, 16, [](const GaussianScores& g) {
    return nwj(1.0 + g.c - ad::as_column(g.log_p)).estimate;
  });
  EXPECT_NEAR(s.mean, 4.0, 3 * s.se);
}

TEST(BoundMonteCarlo, TubaWithExactPartition) {
  // f = log p(y|x), a(y) = E_x e^f = p(y).
  const Stats s = monte_carlo(4.0, 64, 2000, 17, [](const GaussianScores& g) { return tuba(g.c, g.log_p).estimate; });
  EXPECT_NEAR(s.mean, 4.0, 3 * s.se);
}

TEST(BoundMonteCarlo, JsEstimateWithExactRatio) {
  const Stats s = monte_carlo(2.0, 64, 2000, 18, [](const GaussianScores& g) {
    return js(g.c - ad::as_column(g.log_p)).estimate;
  });
  EXPECT_NEAR(s.mean, 2.0, 3 * s.se);
}

TEST(BoundMonteCarlo, ReparamNwjWithTrueMarginal) {
  const Stats s = monte_carlo(4.0, 64, 2000, 19, [](const GaussianScores& g) { return reparam_nwj(g.c, g.log_p).estimate; });
  EXPECT_NEAR(s.mean, 4.0, 3 * s.se);
  for (double scale : {0.5, 2.0}) {
    const Stats t = monte_carlo(4.0, 64, 2000, 20, [&](const GaussianScores& g) {
      return reparam_nwj(g.c, g.log_p + std::log(scale)).estimate;
    });
    EXPECT_LE(t.mean, 4.0 + 3 * t.se) << scale;
  }
}

TEST(BoundMonteCarlo, DvConsistentAtLargeBatch) {
  const Stats s = monte_carlo(2.0, 128, 1000, 21, [](const GaussianScores& g) {
    return dv(g.c - ad::as_column(g.log_p)).estimate;
  });
  EXPECT_NEAR(s.mean, 2.0, 0.1);
}

TEST(BoundMonteCarlo, InfoNceIsCappedAndBiased) {
  const Stats s = monte_carlo(10.0, 64, 500, 22, [](const GaussianScores& g) { return infonce(g.c).estimate; });
  EXPECT_LE(s.mean, std::log(64.0));
  EXPECT_LT(s.mean, 10.0);
}

TEST(BoundMonteCarlo, LooUpperAtIndependence) {
  const Stats s = monte_carlo(0.0, 64, 2000, 23, [](const GaussianScores& g) { return loo_upper(g.c).estimate; });
  EXPECT_NEAR(s.mean, 0.0, 3 * s.se);
  const Stats u = monte_carlo(2.0, 128, 500, 24, [](const GaussianScores& g) { return loo_upper(g.c).estimate; });
  EXPECT_GE(u.mean, 2.0 - 3 * u.se);
}

TEST(BoundMonteCarlo, TractableInfoNceAtIndependenceIsZero) {
  Rng rng(25);
  const auto spec = toy::GaussianPairSpec::uniform(3, 0.0);
  const GaussianScores g = gaussian_scores(spec, 16, rng);
  EXPECT_NEAR(infonce_tractable(g.c).estimate, 0.0, 1e-12);
}

// Two binary variables. The joint pairs of a batch realise p exactly and
// the off-diagonal pairs realise a known product-like distribution, so the
// JS objective (a function of the four cell values V) has its maximum at
// V = log(p / q_offdiag).
TEST(BoundJs, StationaryAtExactRatioOnTwoStateToy) {
  // 8 samples: (0,0) x3, (1,1) x3, (0,1) x1, (1,0) x1.
  const std::vector<int> xs{0, 0, 0, 1, 1, 1, 0, 1};
  const std::vector<int> ys{0, 0, 0, 1, 1, 1, 1, 0};
  const std::size_t k = xs.size();
  double joint[2][2] = {}, off[2][2] = {};
  for (std::size_t i = 0; i < k; ++i) joint[xs[i]][ys[i]] += 1.0 / k;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) off[xs[j]][ys[i]] += 1.0 / (k * (k - 1));
  // S[i, j] = V[x_j, y_i] via a one-hot selection of the four cells.
  std::vector<double> onehot(k * k * 4, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) onehot[(i * k + j) * 4 + xs[j] * 2 + ys[i]] = 1.0;
  const Tensor select = Tensor::matrix(k * k, 4, onehot);
  const auto objective = [&](const Tensor& v) {
    return js(ad::reshape(ad::matmul(select, ad::as_column(v)), {k, k})).objective;
  };
  std::vector<double> best(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) best[a * 2 + b] = std::log(joint[a][b] / off[a][b]);
  const Tensor v_star = Tensor::vector(best);
  for (double g : gradient_of(objective, v_star)) EXPECT_NEAR(g, 0.0, 1e-12);
  // Brute-force grid around the optimum never does better.
  const double at_star = objective(v_star).item();
  for (int cell = 0; cell < 4; ++cell) {
    for (double delta = -2.0; delta <= 2.0; delta += 0.05) {
      std::vector<double> v = best;
      v[cell] += delta;
      EXPECT_LE(objective(Tensor::vector(v)).item(), at_star + 1e-14);
    }
  }
}

}  // namespace
}  // namespace mib::bounds
