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

#include "mib/bounds/bounds.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mib/autodiff/ops.hpp"
#include "mib/errors.hpp"

namespace mib::bounds {
namespace {

using ad::Tensor;

std::size_t square_size(const Tensor& s, const char* what) {
  if (s.rank() != 2 || s.dim(0) != s.dim(1)) {
    throw ShapeError(std::string(what) + ": score matrix must be K x K, got " + ad::to_string(s.shape()));
  }
  if (s.dim(0) < 2) throw ShapeError(std::string(what) + ": need K >= 2 samples");
  return s.dim(0);
}

void require_vector(const Tensor& v, std::size_t k, const char* what) {
  if (v.rank() != 1 || v.size() != k) {
    throw ShapeError(std::string(what) + ": expected a vector of length " + std::to_string(k) + ", got " +
                     ad::to_string(v.shape()));
  }
  if (!v.is_finite()) throw DomainError(std::string(what) + ": log values must be finite");
}

Tensor offdiag_mask(std::size_t k) {
  std::vector<double> m(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) m[i * k + i] = 0.0;
  return Tensor::matrix(k, k, std::move(m));
}

struct ExpTerm {
  Tensor row_mean;  // K vector: (1/(K-1)) sum_{j != i} exp(S[i, j] - shift_i)
  std::size_t clamps = 0;
};

// The off-diagonal linear-domain exp term, with clamped exponent arguments.
ExpTerm offdiag_exp_mean(const Tensor& s, const Tensor& shift) {
  const std::size_t k = s.dim(0);
  const Tensor arg = s - ad::as_column(shift);
  ExpTerm out;
  const auto v = arg.values();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j && std::abs(v[i * k + j]) > kExpClamp) ++out.clamps;
    }
  }
  const Tensor e = ad::exp(ad::clamp(arg, -kExpClamp, kExpClamp)) * offdiag_mask(k);
  out.row_mean = ad::sum(e, 1) / static_cast<double>(k - 1);
  return out;
}

// log((1/(K-1)) sum_{j != i} exp S[i, j]) per row.
Tensor log_offdiag_row_mean(const Tensor& s) {
  const std::size_t k = s.dim(0);
  return ad::masked_log_sum_exp(s, offdiag_mask(k), 1) - std::log(static_cast<double>(k - 1));
}

// log over all K(K-1) off-diagonal entries of the mean of exp S.
Tensor log_offdiag_mean(const Tensor& s) {
  const std::size_t k = s.dim(0);
  return ad::masked_log_sum_exp(s, offdiag_mask(k), -1) - std::log(static_cast<double>(k * (k - 1)));
}

BoundResult from_objective(Tensor objective) {
  BoundResult r;
  r.estimate = objective.item();
  r.objective = std::move(objective);
  return r;
}

void flag_cap(BoundResult& r, double cap) { r.diagnostics.saturated = r.estimate >= 0.99 * cap; }

// log(alpha e^a + (1 - alpha) e^b), elementwise over K vectors.
Tensor log_mix(const Tensor& log_a, const Tensor& log_b, double alpha) {
  if (alpha == 1.0) return log_a;
  if (alpha == 0.0) return log_b;
  const std::array<Tensor, 2> cols{ad::as_column(log_a + std::log(alpha)),
                                   ad::as_column(log_b + std::log1p(-alpha))};
  return ad::log_sum_exp(ad::concat(cols, 1), 1);
}

Tensor log_geometric(const Tensor& log_a, const Tensor& log_b, double alpha) {
  if (alpha == 1.0) return log_a;
  if (alpha == 0.0) return log_b;
  return alpha * log_a + (1.0 - alpha) * log_b;
}

}  // namespace

std::string_view mode_name(InterpolationMode mode) {
  switch (mode) {
    case InterpolationMode::kMixture: return "mixture";
    case InterpolationMode::kLinear: return "linear";
    case InterpolationMode::kProduct: return "product";
  }
  return "unknown";
}

BoundResult tuba(const Tensor& s, const Tensor& log_a) {
  const std::size_t k = square_size(s, "tuba");
  require_vector(log_a, k, "tuba");
  const ExpTerm e = offdiag_exp_mean(s, log_a);
  BoundResult r = from_objective(ad::mean(ad::diag(s)) - ad::mean(e.row_mean + log_a - 1.0));
  r.diagnostics.clamp_count = e.clamps;
  r.diagnostics.saturated = e.clamps > 0;
  return r;
}

BoundResult nwj(const Tensor& s) {
  const std::size_t k = square_size(s, "nwj");
  return tuba(s, Tensor::full({k}, 1.0));
}

BoundResult dv(const Tensor& s) {
  square_size(s, "dv");
  BoundResult r = from_objective(ad::mean(ad::diag(s)) - log_offdiag_mean(s));
  r.diagnostics.evaluation_only = true;
  return r;
}

BoundResult mine(const Tensor& s, std::optional<double> ema_state) {
  const std::size_t k = square_size(s, "mine");
  const double log_batch = log_offdiag_mean(s).item();
  const double log_ema = ema_state ? std::log(*ema_state) : log_batch;
  if (!std::isfinite(log_ema)) throw DomainError("mine: moving average must be positive and finite");
  BoundResult t = tuba(s, Tensor::full({k}, log_ema));
  const double dv_value = ad::mean(ad::diag(s)).item() - log_batch;
  BoundResult r;
  r.estimate = dv_value;
  r.objective = t.objective;
  r.diagnostics = t.diagnostics;
  r.diagnostics.evaluation_only = true;
  r.diagnostics.dv_value = dv_value;
  r.diagnostics.tuba_value = t.estimate;
  r.diagnostics.log_mean_exp_offdiag = log_batch;
  return r;
}

BoundResult infonce(const Tensor& s) {
  const std::size_t k = square_size(s, "infonce");
  const double log_k = std::log(static_cast<double>(k));
  BoundResult r = from_objective(ad::mean(ad::diag(s) - ad::log_sum_exp(s, 1)) + log_k);
  flag_cap(r, log_k);
  return r;
}

BoundResult interpolated(const Tensor& s, const Tensor& log_q, double alpha, InterpolationMode mode) {
  const std::size_t k = square_size(s, "interpolated");
  require_vector(log_q, k, "interpolated");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("interpolated: alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (mode == InterpolationMode::kLinear) {
    // The NWJ end uses the same q as the other modes, so all three agree at
    // alpha = 0 and alpha = 1.
    const BoundResult a = infonce(s);
    const BoundResult b = tuba(s, log_q);
    BoundResult r = from_objective(alpha * a.objective + (1.0 - alpha) * b.objective);
    r.diagnostics.clamp_count = b.diagnostics.clamp_count;
    r.diagnostics.saturated = a.diagnostics.saturated || b.diagnostics.saturated;
    return r;
  }
  const auto combine = mode == InterpolationMode::kMixture ? log_mix : log_geometric;
  // First term: every column of row i enters the mixture denominator.
  const Tensor log_first = combine(ad::log_mean_exp(s, 1), log_q, alpha);
  // Second term: y_i against the K - 1 independent x's, leave-one-out.
  const Tensor log_second = combine(log_offdiag_row_mean(s), log_q, alpha);
  const ExpTerm e = offdiag_exp_mean(s, log_second);
  BoundResult r = from_objective(1.0 + ad::mean(ad::diag(s) - log_first) - ad::mean(e.row_mean));
  r.diagnostics.clamp_count = e.clamps;
  if (alpha > 0.0 && mode == InterpolationMode::kMixture) {
    flag_cap(r, 1.0 + std::log(static_cast<double>(k) / alpha));
  } else {
    r.diagnostics.saturated = e.clamps > 0;
  }
  return r;
}

BoundResult js(const Tensor& s) {
  const std::size_t k = square_size(s, "js");
  const Tensor mask = offdiag_mask(k);
  const double pairs = static_cast<double>(k * (k - 1));
  BoundResult r;
  r.objective = ad::mean(-ad::softplus(-ad::diag(s))) - ad::sum(ad::softplus(s) * mask) / pairs;
  const ExpTerm e = offdiag_exp_mean(s, Tensor::zeros({k}));
  r.estimate = 1.0 + ad::mean(ad::diag(s)).item() - ad::mean(e.row_mean).item();
  r.diagnostics.clamp_count = e.clamps;
  r.diagnostics.saturated = e.clamps > 0;
  r.diagnostics.evaluation_only = true;
  return r;
}

BoundResult infonce_tractable(const Tensor& c) {
  square_size(c, "infonce_tractable");
  return infonce(c);
}

BoundResult loo_upper(const Tensor& c) {
  square_size(c, "loo_upper");
  BoundResult r = from_objective(ad::mean(ad::diag(c) - log_offdiag_row_mean(c)));
  r.diagnostics.expectation_only = true;
  return r;
}

BoundResult reparam_nwj(const Tensor& c, const Tensor& log_q) {
  square_size(c, "reparam_nwj");
  return tuba(c, log_q);
}

double rate_upper(const toy::GaussianPairSpec& spec, std::span<const double> q_variances) {
  spec.validate();
  if (q_variances.size() != spec.dim()) throw ShapeError("rate_upper: one variance per dimension is required");
  double rate = 0.0;
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const double v = q_variances[i];
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("rate_upper: variances must be positive");
    const double r2 = spec.rho[i] * spec.rho[i];
    rate += 0.5 * (1.0 / v - 1.0 + std::log(v) - std::log1p(-r2));
  }
  return rate;
}

double rate_upper_dim(const toy::LinearGaussianEncoder& encoder, std::size_t dim, double q_variance) {
  encoder.validate();
  if (dim >= encoder.output_dim()) throw ShapeError("rate_upper_dim: dimension out of range");
  if (!(q_variance > 0.0) || !std::isfinite(q_variance)) throw DomainError("rate_upper_dim: variance must be positive");
  const auto a = encoder.a.values();
  const std::size_t dx = encoder.input_dim();
  double row = 0.0;
  for (std::size_t j = 0; j < dx; ++j) row += a[dim * dx + j] * a[dim * dx + j];
  const double s2 = encoder.sigma * encoder.sigma;
  return 0.5 * ((s2 + row) / q_variance - 1.0 - std::log(s2 / q_variance));
}

LinearGaussianDecoder posterior_decoder(const toy::LinearGaussianEncoder& encoder) {
  encoder.validate();
  const std::size_t dy = encoder.output_dim(), dx = encoder.input_dim();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      encoder.a.values().data(), static_cast<Eigen::Index>(dy), static_cast<Eigen::Index>(dx));
  const Eigen::MatrixXd cov_y =
      a * a.transpose() + encoder.sigma * encoder.sigma * Eigen::MatrixXd::Identity(dy, dy);
  const Eigen::MatrixXd gain = cov_y.llt().solve(a).transpose();  // dx x dy
  const Eigen::MatrixXd post = Eigen::MatrixXd::Identity(dx, dx) - gain * a;
  std::vector<double> g(dx * dy), s(dx);
  for (std::size_t i = 0; i < dx; ++i) {
    for (std::size_t j = 0; j < dy; ++j) g[i * dy + j] = gain(i, j);
    s[i] = std::sqrt(post(i, i));
  }
  return {Tensor::matrix(dx, dy, std::move(g)), Tensor::vector(std::move(s))};
}

BoundResult ba_lower(const LinearGaussianDecoder& decoder, const toy::Batch& batch, double entropy_x) {
  const std::size_t dx = batch.x.dim(1), dy = batch.y.dim(1);
  if (decoder.a.rank() != 2 || decoder.a.dim(0) != dx || decoder.a.dim(1) != dy) {
    throw ShapeError("ba_lower: decoder matrix must be dx x dy");
  }
  if (decoder.s.rank() != 1 || decoder.s.size() != dx) throw ShapeError("ba_lower: one scale per x dimension");
  for (double v : decoder.s.values()) {
    if (!(v > 0.0)) throw DomainError("ba_lower: decoder scales must be positive");
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const Tensor var = ad::square(decoder.s);
  const Tensor resid = batch.x - ad::matmul(batch.y, ad::transpose(decoder.a));
  const Tensor log_q = -0.5 * ad::sum(ad::log(var)) - 0.5 * static_cast<double>(dx) * log_2pi -
                       0.5 * ad::sum(ad::square(resid) / var, 1);
  return from_objective(ad::mean(log_q) + entropy_x);
}

double tc_upper(std::span<const double> uppers, double lower) {
  double total = -lower;
  for (double u : uppers) total += u;
  return total;
}

}  // namespace mib::bounds
