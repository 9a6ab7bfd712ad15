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

#include "mib/toy/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "mib/autodiff/ops.hpp"
#include "mib/errors.hpp"

namespace mib::toy {
namespace {

using ad::Tensor;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kMaxCondition = 1e6;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Eigen::Map<const RowMatrix> as_matrix(const Tensor& t) {
  return {t.values().data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1))};
}

Tensor normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (auto& e : v) e = rng.normal();
  return Tensor::matrix(rows, cols, std::move(v));
}

void require_rows(const Tensor& t, std::size_t cols, const char* what) {
  if (t.rank() != 2 || t.dim(1) != cols) {
    throw ShapeError(std::string(what) + ": expected rows of width " + std::to_string(cols) + ", got " +
                     ad::to_string(t.shape()));
  }
}

double condition_number(const RowMatrix& w) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

}  // namespace

GaussianPairSpec GaussianPairSpec::uniform(std::size_t dim, double rho) {
  GaussianPairSpec spec{std::vector<double>(dim, rho)};
  spec.validate();
  return spec;
}

void GaussianPairSpec::validate() const {
  if (rho.empty()) throw ConfigError("GaussianPairSpec: dim must be positive");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(std::abs(rho[i]) < 1.0)) {
      throw ConfigError("GaussianPairSpec: |rho[" + std::to_string(i) + "]| must be < 1, got " +
                        std::to_string(rho[i]));
    }
  }
}

CubicTransformSpec CubicTransformSpec::sample(GaussianPairSpec base, Rng& rng) {
  base.validate();
  const std::size_t d = base.dim();
  for (;;) {
    Tensor w = normal_matrix(d, d, rng);
    if (condition_number(as_matrix(w)) < kMaxCondition) return {std::move(base), std::move(w)};
  }
}

void CubicTransformSpec::validate() const {
  base.validate();
  const std::size_t d = base.dim();
  if (w.rank() != 2 || w.dim(0) != d || w.dim(1) != d) {
    throw ConfigError("CubicTransformSpec: W must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as_matrix(w));
  if (static_cast<std::size_t>(qr.rank()) != d) throw ConfigError("CubicTransformSpec: W is rank deficient");
}

Batch sample_gaussian(const Tensor& rho, std::size_t k, Rng& rng) {
  if (k < 2) throw ConfigError("sample_joint: batch size must be at least 2, got " + std::to_string(k));
  if (rho.rank() != 1) throw ShapeError("sample_joint: rho must be a vector");
  const std::size_t d = rho.size();
  Tensor x = normal_matrix(k, d, rng);
  const Tensor eps = normal_matrix(k, d, rng);
  Tensor y = ad::multiply(x, rho) + ad::multiply(eps, ad::sqrt(1.0 - ad::square(rho)));
  return {std::move(x), std::move(y), rho};
}

Batch sample_joint(const DistributionSpec& spec, std::size_t k, Rng& rng, ad::Tape* tape) {
  if (const auto* g = std::get_if<GaussianPairSpec>(&spec)) {
    g->validate();
    const Tensor rho = Tensor::vector(g->rho);
    return sample_gaussian(tape != nullptr ? tape->leaf(rho) : rho, k, rng);
  }
  const auto& cubic = std::get<CubicTransformSpec>(spec);
  cubic.validate();
  const Tensor rho = Tensor::vector(cubic.base.rho);
  Batch b = sample_gaussian(tape != nullptr ? tape->leaf(rho) : rho, k, rng);
  b.y = cubic_transform(cubic, b.y);
  return b;
}

Tensor log_conditional(const GaussianPairSpec& spec, const Tensor& x, const Tensor& y) {
  return log_conditional(Tensor::vector(spec.rho), x, y);
}

Tensor log_conditional(const Tensor& rho, const Tensor& x, const Tensor& y) {
  if (rho.rank() != 1) throw ShapeError("log_conditional: rho must be a vector");
  const std::size_t d = rho.size();
  require_rows(x, d, "log_conditional");
  require_rows(y, d, "log_conditional");
  // Expanded square: -(y - rho x)^2 / 2s = -y^2/2s + y (rho/s) x - rho^2 x^2 / 2s.
  const Tensor s = 1.0 - ad::square(rho);
  const Tensor half_inv_s = 0.5 / s;
  const Tensor norm = -0.5 * ad::sum(ad::log(s)) - 0.5 * static_cast<double>(d) * kLog2Pi;
  const Tensor y_term = ad::matmul(ad::square(y), ad::as_column(half_inv_s));
  const Tensor cross = ad::matmul(ad::multiply(y, rho / s), ad::transpose(x));
  const Tensor x_term =
      ad::transpose(ad::matmul(ad::square(x), ad::as_column(ad::multiply(ad::square(rho), half_inv_s))));
  return cross - y_term - x_term + norm;
}

Tensor log_marginal(const Tensor& y) {
  if (y.rank() != 2) throw ShapeError("log_marginal: y must be a matrix, got " + ad::to_string(y.shape()));
  const double norm = -0.5 * static_cast<double>(y.dim(1)) * kLog2Pi;
  return norm - 0.5 * ad::sum(ad::square(y), 1);
}

double true_mi(const GaussianPairSpec& spec) {
  spec.validate();
  double mi = 0.0;
  for (double r : spec.rho) mi -= 0.5 * std::log1p(-r * r);
  return mi;
}

double true_mi(const DistributionSpec& spec) {
  if (const auto* g = std::get_if<GaussianPairSpec>(&spec)) return true_mi(*g);
  return true_mi(std::get<CubicTransformSpec>(spec).base);
}

double rho_for_mi(double target_mi, std::size_t dim) {
  if (!(target_mi >= 0.0)) throw ConfigError("rho_for_mi: target must be nonnegative");
  if (dim == 0) throw ConfigError("rho_for_mi: dim must be positive");
  return std::sqrt(-std::expm1(-2.0 * target_mi / static_cast<double>(dim)));
}

std::vector<double> true_mi_grad(const GaussianPairSpec& spec) {
  spec.validate();
  std::vector<double> g;
  g.reserve(spec.dim());
  for (double r : spec.rho) g.push_back(r / (1.0 - r * r));
  return g;
}

Tensor cubic_transform(const CubicTransformSpec& spec, const Tensor& y) {
  require_rows(y, spec.base.dim(), "cubic_transform");
  const Tensor z = ad::matmul(y, ad::transpose(spec.w));
  return ad::multiply(ad::square(z), z);
}

double standard_normal_entropy(std::size_t dim) {
  return 0.5 * static_cast<double>(dim) * (kLog2Pi + 1.0);
}

void LinearGaussianEncoder::validate() const {
  if (a.rank() != 2 || a.size() == 0) throw ConfigError("LinearGaussianEncoder: A must be a nonempty matrix");
  if (!(sigma > 0.0)) throw ConfigError("LinearGaussianEncoder: sigma must be positive");
}

Batch LinearGaussianEncoder::sample(std::size_t k, Rng& rng) const {
  validate();
  if (k < 2) throw ConfigError("LinearGaussianEncoder: batch size must be at least 2");
  Tensor x = normal_matrix(k, input_dim(), rng);
  const Tensor eps = normal_matrix(k, output_dim(), rng);
  Tensor y = ad::matmul(x, ad::transpose(a)) + eps * sigma;
  return {std::move(x), std::move(y), Tensor::vector({})};
}

Tensor LinearGaussianEncoder::log_conditional(const Tensor& x, const Tensor& y) const {
  validate();
  require_rows(x, input_dim(), "LinearGaussianEncoder::log_conditional");
  require_rows(y, output_dim(), "LinearGaussianEncoder::log_conditional");
  const RowMatrix mu = as_matrix(x) * as_matrix(a).transpose();
  const auto ym = as_matrix(y);
  const std::size_t m = y.dim(0), k = x.dim(0);
  const double norm = -0.5 * static_cast<double>(output_dim()) * (kLog2Pi + 2.0 * std::log(sigma));
  const double scale = 0.5 / (sigma * sigma);
  std::vector<double> c(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      c[i * k + j] = norm - scale * (ym.row(static_cast<Eigen::Index>(i)) - mu.row(static_cast<Eigen::Index>(j))).squaredNorm();
    }
  }
  return Tensor::matrix(m, k, std::move(c));
}

Tensor LinearGaussianEncoder::log_conditional_dim(const Tensor& x, const Tensor& y, std::size_t dim) const {
  validate();
  require_rows(x, input_dim(), "LinearGaussianEncoder::log_conditional_dim");
  require_rows(y, output_dim(), "LinearGaussianEncoder::log_conditional_dim");
  if (dim >= output_dim()) throw ShapeError("LinearGaussianEncoder::log_conditional_dim: dim out of range");
  const Eigen::VectorXd mu = as_matrix(x) * as_matrix(a).row(static_cast<Eigen::Index>(dim)).transpose();
  const std::size_t m = y.dim(0), k = x.dim(0);
  const double norm = -0.5 * (kLog2Pi + 2.0 * std::log(sigma));
  const double scale = 0.5 / (sigma * sigma);
  std::vector<double> c(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    const double yi = y.at(i, dim);
    for (std::size_t j = 0; j < k; ++j) {
      const double r = yi - mu(static_cast<Eigen::Index>(j));
      c[i * k + j] = norm - scale * r * r;
    }
  }
  return Tensor::matrix(m, k, std::move(c));
}

double LinearGaussianEncoder::total_correlation() const {
  validate();
  const Eigen::MatrixXd am = as_matrix(a);
  const Eigen::MatrixXd cov =
      am * am.transpose() + sigma * sigma * Eigen::MatrixXd::Identity(am.rows(), am.rows());
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * (cov.diagonal().array().log().sum() - log_det);
}

double LinearGaussianEncoder::mutual_information() const {
  validate();
  const Eigen::MatrixXd am = as_matrix(a);
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(am.rows(), am.rows()) + am * am.transpose() / (sigma * sigma);
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace mib::toy
