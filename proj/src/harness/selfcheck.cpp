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

#include "mib/harness/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mib/autodiff/gradcheck.hpp"
#include "mib/autodiff/ops.hpp"
#include "mib/autodiff/tape.hpp"
#include "mib/bounds/bounds.hpp"
#include "mib/harness/experiments.hpp"
#include "mib/rng.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::harness {
namespace {

using ad::Tensor;

Tensor random_matrix(Rng& rng, std::size_t k, double scale) {
  std::vector<double> v(k * k);
  for (double& x : v) x = scale * rng.normal();
  return Tensor::matrix(k, k, std::move(v));
}

Tensor random_vector(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  for (double& x : v) x = rng.normal();
  return Tensor::vector(std::move(v));
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

CheckResult check(std::string name, const std::function<std::string(bool&)>& body) {
  CheckResult r;
  r.name = std::move(name);
  try {
    r.passed = true;
    r.detail = body(r.passed);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  return r;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(derive_seed(seed, 0, 0));

  out.push_back(check("objective gradients match finite differences", [&](bool& ok) {
    const Tensor lq = random_vector(rng, 8);
    const std::vector<std::pair<const char*, ad::ScalarFunction>> objectives{
        {"tuba", [&](const Tensor& s) { return bounds::tuba(s, lq).objective; }},
        {"nwj", [](const Tensor& s) { return bounds::nwj(s).objective; }},
        {"infonce", [](const Tensor& s) { return bounds::infonce(s).objective; }},
        {"interpolated", [&](const Tensor& s) { return bounds::interpolated(s, lq, 0.3).objective; }},
        {"js", [](const Tensor& s) { return bounds::js(s).objective; }},
    };
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      for (const auto& [name, fn] : objectives) {
        worst = std::max(worst, ad::check_gradient(fn, random_matrix(rng, 8, 1.0), 1e-6));
      }
    }
    ok = worst < 1e-4;
    return "max relative error " + num(worst);
  }));

  out.push_back(check("infonce and interpolated respect their per-batch caps", [&](bool& ok) {
    const std::size_t k = 16;
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
      const Tensor s = random_matrix(rng, k, 10.0);
      const Tensor lq = random_vector(rng, k);
      if (bounds::infonce(s).estimate > std::log(static_cast<double>(k))) ++violations;
      for (double a : {0.01, 0.1, 0.5}) {
        if (bounds::interpolated(s, lq, a).estimate > 1.0 + std::log(k / a) + 1e-12) ++violations;
      }
    }
    ok = violations == 0;
    return std::to_string(violations) + " violations over 1000 matrices";
  }));

  out.push_back(check("interpolation endpoints reduce to infonce and the q-baseline form", [&](bool& ok) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Tensor s = random_matrix(rng, 12, 3.0);
      const Tensor lq = random_vector(rng, 12);
      worst = std::max(worst, std::abs(bounds::interpolated(s, lq, 1.0).estimate - bounds::infonce(s).estimate));
      worst = std::max(worst, std::abs(bounds::interpolated(s, lq, 0.0).estimate - bounds::tuba(s, lq).estimate));
    }
    ok = worst <= 1e-12;
    return "max deviation " + num(worst);
  }));

  out.push_back(check("loo_upper minus infonce_tractable equals the denominator gap", [&](bool& ok) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t k = 10;
      const Tensor c = random_matrix(rng, k, 2.0);
      const auto v = c.values();
      double gap = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double all = 0.0, others = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          all += std::exp(v[i * k + j]);
          if (j != i) others += std::exp(v[i * k + j]);
        }
        gap += std::log(all / k) - std::log(others / (k - 1));
      }
      gap /= k;
      const double got = bounds::loo_upper(c).estimate - bounds::infonce_tractable(c).estimate;
      worst = std::max(worst, std::abs(got - gap));
    }
    ok = worst < 1e-12;
    return "max deviation " + num(worst);
  }));

  out.push_back(check("mine gradient equals tuba with a frozen moving average", [&](bool& ok) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Tensor s0 = random_matrix(rng, 8, 1.0);
      const double ema = std::exp(rng.normal());
      ad::Tape tape;
      const Tensor s = tape.leaf(s0);
      const auto g_mine = tape.backward(bounds::mine(s, ema).objective);
      const auto g_tuba = tape.backward(bounds::tuba(s, Tensor::full({8}, std::log(ema))).objective);
      const auto a = g_mine.at(s).values();
      const auto b = g_tuba.at(s).values();
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    ok = worst <= 1e-10;
    return "max deviation " + num(worst);
  }));

  out.push_back(check("sweep records satisfy mse = bias^2 + variance", [&](bool& ok) {
    OptimalSweepSpec spec;
    training::EstimatorSpec nwj;
    training::EstimatorSpec nce;
    nce.kind = bounds::Estimator::kInfonce;
    spec.estimators = {nwj, nce};
    spec.batch_sizes = {16};
    spec.mi_levels = {2, 6};
    spec.n_batches = 200;
    spec.seed = seed;
    double worst = 0.0;
    for (const auto& r : optimal_sweep(spec)) {
      worst = std::max(worst, std::abs(r.mse - (r.bias * r.bias + r.variance)));
    }
    ok = worst <= 1e-9;
    return "max deviation " + num(worst);
  }));

  out.push_back(check("rate with a standard normal marginal equals the true MI", [&](bool& ok) {
    double worst = 0.0;
    for (double mi : {2.0, 6.0, 10.0}) {
      const auto spec = toy::GaussianPairSpec::uniform(20, toy::rho_for_mi(mi, 20));
      const std::vector<double> ones(20, 1.0);
      worst = std::max(worst, std::abs(bounds::rate_upper(spec, ones) - toy::true_mi(spec)));
    }
    ok = worst <= 1e-9;
    return "max deviation " + num(worst);
  }));

  return out;
}

}  // namespace mib::harness
