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

#include "mib/harness/experiments.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mib/autodiff/ops.hpp"
#include "mib/autodiff/tape.hpp"
#include "mib/errors.hpp"
#include "mib/harness/pool.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::harness {
namespace {

using ad::Tensor;
using bounds::Estimator;

std::optional<double> alpha_of(const training::EstimatorSpec& spec) {
  if (spec.kind == Estimator::kInterpolated) return spec.alpha;
  return std::nullopt;
}

std::string mode_of(const training::EstimatorSpec& spec) {
  if (spec.kind == Estimator::kInterpolated) return std::string(bounds::mode_name(spec.mode));
  return "";
}

void validate_common(const std::vector<training::EstimatorSpec>& estimators, const std::vector<std::size_t>& ks,
                     const std::vector<double>& mis, std::size_t n, std::size_t dim, const char* what) {
  if (estimators.empty()) throw ConfigError(std::string(what) + ": no estimators");
  for (const auto& e : estimators) {
    if (!has_optimal_form(e.kind)) {
      throw ConfigError(std::string(what) + ": estimator '" + std::string(bounds::estimator_info(e.kind).name) +
                        "' has no optimal-critic form");
    }
    if (!(e.alpha >= 0.0 && e.alpha <= 1.0)) throw ConfigError(std::string(what) + ": alpha must lie in [0, 1]");
  }
  if (ks.empty() || mis.empty()) throw ConfigError(std::string(what) + ": empty batch-size or MI grid");
  for (std::size_t k : ks) {
    if (k < 2) throw ConfigError(std::string(what) + ": batch sizes must be >= 2");
  }
  for (double mi : mis) {
    if (!(mi >= 0.0) || !std::isfinite(mi)) throw ConfigError(std::string(what) + ": MI levels must be >= 0");
  }
  if (n < 2) throw ConfigError(std::string(what) + ": at least 2 repetitions are required");
  if (dim < 1) throw ConfigError(std::string(what) + ": dim must be >= 1");
}

std::vector<CellSpec> cells_of(const std::vector<std::size_t>& ks, const std::vector<double>& mis) {
  std::vector<CellSpec> cells;
  for (std::size_t k : ks)
    for (double mi : mis) cells.push_back({k, mi});
  return cells;
}

}  // namespace

bool has_optimal_form(Estimator kind) {
  switch (kind) {
    case Estimator::kTuba:
    case Estimator::kNwj:
    case Estimator::kDv:
    case Estimator::kInfonce:
    case Estimator::kInterpolated:
    case Estimator::kJs:
    case Estimator::kInfonceTractable:
    case Estimator::kLooUpper:
    case Estimator::kReparamNwj:
      return true;
    default:
      return false;
  }
}

bounds::BoundResult optimal_estimate(const training::EstimatorSpec& spec, const Tensor& c, const Tensor& log_p) {
  const Tensor log_ratio = c - ad::as_column(log_p);
  switch (spec.kind) {
    case Estimator::kTuba: return bounds::tuba(c, log_p);
    case Estimator::kNwj: return bounds::nwj(1.0 + log_ratio);
    case Estimator::kDv: return bounds::dv(log_ratio);
    case Estimator::kJs: return bounds::js(log_ratio);
    case Estimator::kInfonce: return bounds::infonce(c);
    case Estimator::kInterpolated: return bounds::interpolated(c, log_p, spec.alpha, spec.mode);
    case Estimator::kInfonceTractable: return bounds::infonce_tractable(c);
    case Estimator::kLooUpper: return bounds::loo_upper(c);
    case Estimator::kReparamNwj: return bounds::reparam_nwj(c, log_p);
    default:
      throw ConfigError("estimator '" + std::string(bounds::estimator_info(spec.kind).name) +
                        "' has no optimal-critic form");
  }
}

std::string estimator_label(const training::EstimatorSpec& spec) {
  std::string name(bounds::estimator_info(spec.kind).name);
  if (spec.kind == Estimator::kInterpolated) {
    name += "[" + std::string(bounds::mode_name(spec.mode)) + "," + training::format_double(spec.alpha) + "]";
  }
  return name;
}

void OptimalSweepSpec::validate() const {
  validate_common(estimators, batch_sizes, mi_levels, n_batches, dim, "optimal_sweep");
}

void GradientSpec::validate() const {
  validate_common(estimators, batch_sizes, mi_levels, reps, dim, "gradient");
  for (const auto& e : estimators) {
    if (e.kind == Estimator::kJs) {
      throw ConfigError("gradient: js reports a value that is not its training objective; use nwj");
    }
  }
}

std::vector<std::vector<double>> optimal_samples(const OptimalSweepSpec& spec, const CellSpec& cell,
                                                 std::uint64_t cell_seed) {
  const auto pair = toy::GaussianPairSpec::uniform(spec.dim, toy::rho_for_mi(cell.target_mi, spec.dim));
  Rng rng(cell_seed);
  std::vector<std::vector<double>> out(spec.estimators.size());
  for (auto& v : out) v.reserve(spec.n_batches);
  for (std::size_t b = 0; b < spec.n_batches; ++b) {
    const toy::Batch batch = toy::sample_joint(pair, cell.batch_size, rng);
    const Tensor c = toy::log_conditional(pair, batch.x, batch.y);
    const Tensor log_p = toy::log_marginal(batch.y);
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      out[e].push_back(optimal_estimate(spec.estimators[e], c, log_p).estimate);
    }
  }
  return out;
}

SweepRecord summarize(const training::EstimatorSpec& spec, const CellSpec& cell, const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0, se = 0.0;
  for (double v : samples) {
    ss += (v - mean) * (v - mean);
    se += (v - cell.target_mi) * (v - cell.target_mi);
  }
  SweepRecord r;
  r.estimator = std::string(bounds::estimator_info(spec.kind).name);
  r.alpha = alpha_of(spec);
  r.mode = mode_of(spec);
  r.batch_size = cell.batch_size;
  r.target_mi = cell.target_mi;
  r.mean = mean;
  r.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
  r.variance = ss / n;
  r.bias = mean - cell.target_mi;
  r.mse = se / n;
  r.n_batches = samples.size();
  return r;
}

std::vector<SweepRecord> optimal_sweep(const OptimalSweepSpec& spec) {
  spec.validate();
  const auto cells = cells_of(spec.batch_sizes, spec.mi_levels);
  std::vector<std::vector<SweepRecord>> per_cell(cells.size());
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    const auto samples = optimal_samples(spec, cells[i], derive_seed(spec.seed, i, 0));
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      per_cell[i].push_back(summarize(spec.estimators[e], cells[i], samples[e]));
    }
  });
  std::vector<SweepRecord> out;
  for (auto& v : per_cell) out.insert(out.end(), v.begin(), v.end());
  return out;
}

namespace {

std::vector<GradientRecord> gradient_cell(const GradientSpec& spec, const CellSpec& cell, std::uint64_t seed) {
  const std::size_t d = spec.dim;
  const double rho = toy::rho_for_mi(cell.target_mi, d);
  const double truth = rho / (1.0 - rho * rho);
  const std::size_t ne = spec.estimators.size();
  std::vector<std::vector<double>> sum(ne, std::vector<double>(d, 0.0)), sum_sq = sum;
  std::vector<double> err_sum(ne, 0.0), err_sq(ne, 0.0);
  std::vector<std::size_t> good(ne, 0), bad(ne, 0);

  Rng rng(seed);
  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    ad::Tape tape;
    const Tensor rho_leaf = tape.leaf(Tensor::full({d}, rho));
    const toy::Batch batch = toy::sample_gaussian(rho_leaf, cell.batch_size, rng);
    const Tensor c = toy::log_conditional(rho_leaf, batch.x, batch.y);
    const Tensor log_p = toy::log_marginal(batch.y);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto r = optimal_estimate(spec.estimators[e], c, log_p);
      const auto grads = tape.backward(r.objective);
      const auto g = grads.at(rho_leaf).values();
      bool finite = true;
      for (double v : g) finite = finite && std::isfinite(v);
      if (!finite) {
        ++bad[e];
        continue;
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        sum[e][k] += g[k];
        sum_sq[e][k] += g[k] * g[k];
        sq += (g[k] - truth) * (g[k] - truth);
      }
      sq /= static_cast<double>(d);
      err_sum[e] += sq;
      err_sq[e] += sq * sq;
      ++good[e];
    }
  }

  std::vector<GradientRecord> out;
  for (std::size_t e = 0; e < ne; ++e) {
    GradientRecord r;
    const auto& est = spec.estimators[e];
    r.estimator = std::string(bounds::estimator_info(est.kind).name);
    r.alpha = alpha_of(est);
    r.mode = mode_of(est);
    r.batch_size = cell.batch_size;
    r.target_mi = cell.target_mi;
    r.true_grad = truth;
    r.reps = good[e];
    r.nonfinite = bad[e];
    if (good[e] < 2) {
      r.skipped = true;
      r.grad_mse = std::numeric_limits<double>::quiet_NaN();
      r.grad_mse_stderr = std::numeric_limits<double>::quiet_NaN();
      out.push_back(std::move(r));
      continue;
    }
    const double n = static_cast<double>(good[e]);
    r.grad_mse = err_sum[e] / n;
    r.grad_mse_stderr = std::sqrt(std::max(0.0, (err_sq[e] / n - r.grad_mse * r.grad_mse) / (n - 1.0)));
    for (std::size_t k = 0; k < d; ++k) {
      const double m = sum[e][k] / n;
      r.grad_mean.push_back(m);
      r.grad_stderr.push_back(std::sqrt(std::max(0.0, (sum_sq[e][k] / n - m * m) / (n - 1.0))));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<GradientRecord> gradient_sweep(const GradientSpec& spec) {
  spec.validate();
  const auto cells = cells_of(spec.batch_sizes, spec.mi_levels);
  std::vector<std::vector<GradientRecord>> per_cell(cells.size());
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    per_cell[i] = gradient_cell(spec, cells[i], derive_seed(spec.seed, i, 1));
  });
  std::vector<GradientRecord> out;
  for (auto& v : per_cell) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<BestAlpha> best_alpha(const std::vector<GradientRecord>& records) {
  std::map<std::pair<std::size_t, double>, BestAlpha> best;
  for (const auto& r : records) {
    if (r.estimator != "interpolated" || r.mode != "mixture" || r.skipped || !r.alpha) continue;
    const auto key = std::make_pair(r.batch_size, r.target_mi);
    auto it = best.find(key);
    if (it == best.end() || r.grad_mse < it->second.grad_mse) {
      best[key] = BestAlpha{r.batch_size, r.target_mi, *r.alpha, r.grad_mse};
    }
  }
  std::vector<BestAlpha> out;
  for (const auto& [key, b] : best) out.push_back(b);
  return out;
}

}  // namespace mib::harness
