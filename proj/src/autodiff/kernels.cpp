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

#include "kernels.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mib/errors.hpp"

namespace mib::ad::detail {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void shape_error(Primitive op, const std::string& what) {
  throw ShapeError(std::string(primitive_name(op)) + ": " + what);
}

[[noreturn]] void domain_error(Primitive op, const std::string& what) {
  throw DomainError(std::string(primitive_name(op)) + ": " + what);
}

void expect_arity(Primitive op, std::span<const Tensor> in, std::size_t n) {
  if (in.size() != n) {
    shape_error(op, "expected " + std::to_string(n) + " inputs, got " + std::to_string(in.size()));
  }
}

void expect_rank2(Primitive op, const Tensor& t) {
  if (t.rank() != 2) shape_error(op, "expected a matrix, got shape " + to_string(t.shape()));
}

// Every tensor viewed as rows x cols; rank-1 is a single row.
struct Grid {
  std::size_t rows;
  std::size_t cols;
};

Grid as_grid(const Shape& s) {
  if (s.empty()) return {1, 1};
  if (s.size() == 1) return {1, s[0]};
  return {s[0], s[1]};
}

struct Strides {
  std::size_t row;
  std::size_t col;
};

// Strides of `in` read through the broadcast grid of `out` (0 on stretched axes).
Strides broadcast_strides(const Shape& in, const Shape& out) {
  const Grid g = as_grid(in);
  const Grid o = as_grid(out);
  return {g.rows == 1 && o.rows != 1 ? std::size_t{0} : g.cols, g.cols == 1 && o.cols != 1 ? std::size_t{0} : std::size_t{1}};
}

// Reduction groups: group g covers base(g) + k * step for k < count.
struct Reduction {
  std::size_t groups;
  std::size_t count;
  std::size_t group_stride;
  std::size_t step;
  Shape out_shape;
};

Reduction reduction_layout(Primitive op, const Shape& s, int axis) {
  const std::size_t n = element_count(s);
  if (axis < 0 || s.size() <= 1) {
    if (axis > 0 && s.size() <= 1) {
      shape_error(op, "axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
    }
    return {1, n, 0, 1, {}};
  }
  if (axis == 1) return {s[0], s[1], s[1], 1, {s[0]}};
  if (axis == 0) return {s[1], s[0], 1, s[1], {s[1]}};
  shape_error(op, "axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Forward binary_forward(Primitive op, const Tensor& a, const Tensor& b) {
  Shape out = broadcast_shapes(a.shape(), b.shape(), op);
  const std::size_t n = element_count(out);
  std::vector<double> v(n);
  auto av = a.values();
  auto bv = b.values();
  if (op == Primitive::kDivide) {
    for (double d : bv) {
      if (d == 0.0) domain_error(op, "division by zero");
    }
  }
  auto apply = [op](double x, double y) {
    switch (op) {
      case Primitive::kAdd: return x + y;
      case Primitive::kSubtract: return x - y;
      case Primitive::kMultiply: return x * y;
      default: return x / y;
    }
  };
  if (a.shape() == b.shape()) {
    for (std::size_t i = 0; i < n; ++i) v[i] = apply(av[i], bv[i]);
    return {std::move(out), std::move(v)};
  }
  const Grid g = as_grid(out);
  const Strides sa = broadcast_strides(a.shape(), out);
  const Strides sb = broadcast_strides(b.shape(), out);
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      v[r * g.cols + c] = apply(av[r * sa.row + c * sa.col], bv[r * sb.row + c * sb.col]);
    }
  }
  return {std::move(out), std::move(v)};
}

Forward unary_forward(Primitive op, const Tensor& x, const Attributes& attrs) {
  auto xv = x.values();
  std::vector<double> v(xv.size());
  switch (op) {
    case Primitive::kExp:
      std::transform(xv.begin(), xv.end(), v.begin(), [](double t) { return std::exp(t); });
      break;
    case Primitive::kLog:
      for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!(xv[i] > 0.0)) domain_error(op, "argument " + std::to_string(xv[i]) + " is not positive");
        v[i] = std::log(xv[i]);
      }
      break;
    case Primitive::kNegate:
      std::transform(xv.begin(), xv.end(), v.begin(), [](double t) { return -t; });
      break;
    case Primitive::kRelu:
      std::transform(xv.begin(), xv.end(), v.begin(), [](double t) { return t > 0.0 ? t : 0.0; });
      break;
    case Primitive::kTanh:
      std::transform(xv.begin(), xv.end(), v.begin(), [](double t) { return std::tanh(t); });
      break;
    case Primitive::kSoftplus:
      std::transform(xv.begin(), xv.end(), v.begin(), softplus);
      break;
    case Primitive::kSqrt:
      for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!(xv[i] >= 0.0)) domain_error(op, "argument " + std::to_string(xv[i]) + " is negative");
        v[i] = std::sqrt(xv[i]);
      }
      break;
    case Primitive::kSquare:
      std::transform(xv.begin(), xv.end(), v.begin(), [](double t) { return t * t; });
      break;
    case Primitive::kClamp:
      if (!(attrs.lo <= attrs.hi)) domain_error(op, "lower limit exceeds upper limit");
      std::transform(xv.begin(), xv.end(), v.begin(),
                     [&](double t) { return std::clamp(t, attrs.lo, attrs.hi); });
      break;
    default:
      shape_error(op, "not a unary primitive");
  }
  return {x.shape(), std::move(v)};
}

Forward reduce_forward(Primitive op, std::span<const Tensor> in, const Attributes& attrs) {
  const Tensor& x = in[0];
  const bool masked = op == Primitive::kMaskedLogSumExp;
  if (masked) {
    expect_arity(op, in, 2);
    if (in[1].shape() != x.shape()) {
      shape_error(op, "mask shape " + to_string(in[1].shape()) + " differs from input " +
                          to_string(x.shape()));
    }
  } else {
    expect_arity(op, in, 1);
  }
  const Reduction red = reduction_layout(op, x.shape(), attrs.axis);
  auto xv = x.values();
  std::vector<double> v(red.groups);
  for (std::size_t g = 0; g < red.groups; ++g) {
    const std::size_t base = g * red.group_stride;
    auto included = [&](std::size_t k) { return !masked || in[1][base + k * red.step] != 0.0; };
    if (op == Primitive::kReduceSum || op == Primitive::kReduceMean) {
      double s = 0.0;
      for (std::size_t k = 0; k < red.count; ++k) s += xv[base + k * red.step];
      v[g] = op == Primitive::kReduceSum ? s : s / static_cast<double>(red.count);
      continue;
    }
    double m = kNegInf;
    std::size_t used = 0;
    for (std::size_t k = 0; k < red.count; ++k) {
      if (!included(k)) continue;
      m = std::max(m, xv[base + k * red.step]);
      ++used;
    }
    if (used == 0) domain_error(op, "empty reduction");
    if (!std::isfinite(m)) {
      v[g] = m;
      continue;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < red.count; ++k) {
      if (included(k)) s += std::exp(xv[base + k * red.step] - m);
    }
    v[g] = op == Primitive::kLogMeanExp ? m + std::log(s / static_cast<double>(used))
                                        : m + std::log(s);
  }
  return {red.out_shape, std::move(v)};
}

Forward concat_forward(Primitive op, std::span<const Tensor> in, int axis) {
  if (in.empty()) shape_error(op, "no inputs");
  const std::size_t rank = in[0].rank();
  if (rank == 0 || (rank == 1 && axis > 0) || axis > 1) {
    shape_error(op, "axis " + std::to_string(axis) + " invalid for shape " + to_string(in[0].shape()));
  }
  const int ax = axis < 0 ? 0 : axis;
  for (const auto& t : in) {
    if (t.rank() != rank || (rank == 2 && t.dim(1 - ax) != in[0].dim(1 - ax))) {
      shape_error(op, "cannot join " + to_string(in[0].shape()) + " and " + to_string(t.shape()) +
                          " along axis " + std::to_string(ax));
    }
  }
  if (rank == 1 || ax == 0) {
    std::vector<double> v;
    std::size_t lead = 0;
    for (const auto& t : in) {
      v.insert(v.end(), t.values().begin(), t.values().end());
      lead += t.dim(0);
    }
    Shape s = rank == 1 ? Shape{lead} : Shape{lead, in[0].dim(1)};
    return {std::move(s), std::move(v)};
  }
  const std::size_t rows = in[0].dim(0);
  std::size_t cols = 0;
  for (const auto& t : in) cols += t.dim(1);
  std::vector<double> v(rows * cols);
  std::size_t offset = 0;
  for (const auto& t : in) {
    const std::size_t c = t.dim(1);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(t.values().begin() + r * c, c, v.begin() + r * cols + offset);
    }
    offset += c;
  }
  return {{rows, cols}, std::move(v)};
}

// Accumulates g (laid out like `out`) into the gradient of an input of
// shape `in`, summing over broadcast axes; `scale` is applied per element.
template <typename Scale>
void unbroadcast_add(const Shape& in, const Shape& out, std::span<const double> g,
                     std::vector<double>& dst, Scale&& scale) {
  if (in == out) {
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * scale(i, i);
    return;
  }
  const Grid o = as_grid(out);
  const Strides s = broadcast_strides(in, out);
  for (std::size_t r = 0; r < o.rows; ++r) {
    for (std::size_t c = 0; c < o.cols; ++c) {
      const std::size_t oi = r * o.cols + c;
      const std::size_t ii = r * s.row + c * s.col;
      dst[ii] += g[oi] * scale(oi, ii);
    }
  }
}

}  // namespace

Shape broadcast_shapes(const Shape& a, const Shape& b, Primitive op) {
  if (a == b) return a;
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
    const std::size_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      shape_error(op, "shapes " + to_string(a) + " and " + to_string(b) + " do not broadcast");
    }
    out[k] = da == 1 ? db : da;
  }
  return out;
}

Forward forward(Primitive op, std::span<const Tensor> in, const Attributes& attrs) {
  switch (op) {
    case Primitive::kMatMul: {
      expect_arity(op, in, 2);
      expect_rank2(op, in[0]);
      expect_rank2(op, in[1]);
      const std::size_t m = in[0].dim(0), k = in[0].dim(1), n = in[1].dim(1);
      if (in[1].dim(0) != k) {
        shape_error(op, "inner dimensions differ: " + to_string(in[0].shape()) + " x " +
                            to_string(in[1].shape()));
      }
      std::vector<double> v(m * n);
      ConstMap a(in[0].values().data(), m, k);
      ConstMap b(in[1].values().data(), k, n);
      MutMap(v.data(), m, n).noalias() = a * b;
      return {{m, n}, std::move(v)};
    }
    case Primitive::kAdd:
    case Primitive::kSubtract:
    case Primitive::kMultiply:
    case Primitive::kDivide:
      expect_arity(op, in, 2);
      return binary_forward(op, in[0], in[1]);
    case Primitive::kExp:
    case Primitive::kLog:
    case Primitive::kNegate:
    case Primitive::kRelu:
    case Primitive::kTanh:
    case Primitive::kSoftplus:
    case Primitive::kSqrt:
    case Primitive::kSquare:
    case Primitive::kClamp:
    case Primitive::kStopGradient:
      expect_arity(op, in, 1);
      if (op == Primitive::kStopGradient) {
        return {in[0].shape(), std::vector<double>(in[0].values().begin(), in[0].values().end())};
      }
      return unary_forward(op, in[0], attrs);
    case Primitive::kReduceSum:
    case Primitive::kReduceMean:
    case Primitive::kLogSumExp:
    case Primitive::kLogMeanExp:
    case Primitive::kMaskedLogSumExp:
      return reduce_forward(op, in, attrs);
    case Primitive::kDiag: {
      expect_arity(op, in, 1);
      expect_rank2(op, in[0]);
      const std::size_t k = in[0].dim(0);
      if (in[0].dim(1) != k) shape_error(op, "matrix " + to_string(in[0].shape()) + " is not square");
      std::vector<double> v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = in[0][i * k + i];
      return {{k}, std::move(v)};
    }
    case Primitive::kBroadcastTo: {
      expect_arity(op, in, 1);
      if (broadcast_shapes(in[0].shape(), attrs.shape, op) != attrs.shape) {
        shape_error(op, "cannot broadcast " + to_string(in[0].shape()) + " to " + to_string(attrs.shape));
      }
      const Grid o = as_grid(attrs.shape);
      const Strides s = broadcast_strides(in[0].shape(), attrs.shape);
      std::vector<double> v(o.rows * o.cols);
      for (std::size_t r = 0; r < o.rows; ++r) {
        for (std::size_t c = 0; c < o.cols; ++c) v[r * o.cols + c] = in[0][r * s.row + c * s.col];
      }
      return {attrs.shape, std::move(v)};
    }
    case Primitive::kReshape: {
      expect_arity(op, in, 1);
      if (element_count(attrs.shape) != in[0].size() || attrs.shape.size() > 2) {
        shape_error(op, "cannot reshape " + to_string(in[0].shape()) + " to " + to_string(attrs.shape));
      }
      return {attrs.shape, std::vector<double>(in[0].values().begin(), in[0].values().end())};
    }
    case Primitive::kTranspose: {
      expect_arity(op, in, 1);
      expect_rank2(op, in[0]);
      const std::size_t r = in[0].dim(0), c = in[0].dim(1);
      std::vector<double> v(r * c);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) v[j * r + i] = in[0][i * c + j];
      }
      return {{c, r}, std::move(v)};
    }
    case Primitive::kConcat:
      return concat_forward(op, in, attrs.axis);
    case Primitive::kPairConcat: {
      expect_arity(op, in, 2);
      expect_rank2(op, in[0]);
      expect_rank2(op, in[1]);
      const std::size_t nx = in[0].dim(0), dx = in[0].dim(1);
      const std::size_t ny = in[1].dim(0), dy = in[1].dim(1);
      const std::size_t w = dx + dy;
      std::vector<double> v(nx * ny * w);
      for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
          double* row = v.data() + (i * nx + j) * w;
          std::copy_n(in[0].values().begin() + j * dx, dx, row);
          std::copy_n(in[1].values().begin() + i * dy, dy, row + dx);
        }
      }
      return {{nx * ny, w}, std::move(v)};
    }
  }
  shape_error(op, "unknown primitive");
}

void vjp(Primitive op, std::span<const Tensor> in, const Tensor& out, std::span<const double> g,
         const Attributes& attrs, std::span<std::vector<double>* const> dst) {
  auto ov = out.values();
  switch (op) {
    case Primitive::kMatMul: {
      const std::size_t m = in[0].dim(0), k = in[0].dim(1), n = in[1].dim(1);
      ConstMap a(in[0].values().data(), m, k);
      ConstMap b(in[1].values().data(), k, n);
      ConstMap gm(g.data(), m, n);
      if (dst[0]) MutMap(dst[0]->data(), m, k).noalias() += gm * b.transpose();
      if (dst[1]) MutMap(dst[1]->data(), k, n).noalias() += a.transpose() * gm;
      return;
    }
    case Primitive::kAdd:
    case Primitive::kSubtract:
    case Primitive::kMultiply:
    case Primitive::kDivide: {
      const Tensor& a = in[0];
      const Tensor& b = in[1];
      const Strides sa = broadcast_strides(a.shape(), out.shape());
      const Strides sb = broadcast_strides(b.shape(), out.shape());
      const Grid o = as_grid(out.shape());
      const bool same = a.shape() == b.shape();
      // Value of the other operand at output position oi.
      auto a_at = [&](std::size_t oi) {
        return same ? a[oi] : a[(oi / o.cols) * sa.row + (oi % o.cols) * sa.col];
      };
      auto b_at = [&](std::size_t oi) {
        return same ? b[oi] : b[(oi / o.cols) * sb.row + (oi % o.cols) * sb.col];
      };
      if (dst[0]) {
        switch (op) {
          case Primitive::kMultiply:
            unbroadcast_add(a.shape(), out.shape(), g, *dst[0], [&](std::size_t oi, std::size_t) { return b_at(oi); });
            break;
          case Primitive::kDivide:
            unbroadcast_add(a.shape(), out.shape(), g, *dst[0], [&](std::size_t oi, std::size_t) { return 1.0 / b_at(oi); });
            break;
          default:
            unbroadcast_add(a.shape(), out.shape(), g, *dst[0], [](std::size_t, std::size_t) { return 1.0; });
        }
      }
      if (dst[1]) {
        switch (op) {
          case Primitive::kAdd:
            unbroadcast_add(b.shape(), out.shape(), g, *dst[1], [](std::size_t, std::size_t) { return 1.0; });
            break;
          case Primitive::kSubtract:
            unbroadcast_add(b.shape(), out.shape(), g, *dst[1], [](std::size_t, std::size_t) { return -1.0; });
            break;
          case Primitive::kMultiply:
            unbroadcast_add(b.shape(), out.shape(), g, *dst[1], [&](std::size_t oi, std::size_t) { return a_at(oi); });
            break;
          default:
            unbroadcast_add(b.shape(), out.shape(), g, *dst[1], [&](std::size_t oi, std::size_t) {
              const double bv = b_at(oi);
              return -a_at(oi) / (bv * bv);
            });
        }
      }
      return;
    }
    case Primitive::kExp:
    case Primitive::kLog:
    case Primitive::kNegate:
    case Primitive::kRelu:
    case Primitive::kTanh:
    case Primitive::kSoftplus:
    case Primitive::kSqrt:
    case Primitive::kSquare:
    case Primitive::kClamp: {
      if (!dst[0]) return;
      auto xv = in[0].values();
      auto& d = *dst[0];
      for (std::size_t i = 0; i < g.size(); ++i) {
        double local = 0.0;
        switch (op) {
          case Primitive::kExp: local = ov[i]; break;
          case Primitive::kLog: local = 1.0 / xv[i]; break;
          case Primitive::kNegate: local = -1.0; break;
          case Primitive::kRelu: local = xv[i] > 0.0 ? 1.0 : 0.0; break;
          case Primitive::kTanh: local = 1.0 - ov[i] * ov[i]; break;
          case Primitive::kSoftplus: local = sigmoid(xv[i]); break;
          case Primitive::kSqrt: local = 0.5 / ov[i]; break;
          case Primitive::kSquare: local = 2.0 * xv[i]; break;
          default: local = (xv[i] >= attrs.lo && xv[i] <= attrs.hi) ? 1.0 : 0.0;
        }
        d[i] += g[i] * local;
      }
      return;
    }
    case Primitive::kStopGradient:
      return;
    case Primitive::kReduceSum:
    case Primitive::kReduceMean:
    case Primitive::kLogSumExp:
    case Primitive::kLogMeanExp:
    case Primitive::kMaskedLogSumExp: {
      if (!dst[0]) return;
      const Reduction red = reduction_layout(op, in[0].shape(), attrs.axis);
      auto xv = in[0].values();
      auto& d = *dst[0];
      const bool masked = op == Primitive::kMaskedLogSumExp;
      for (std::size_t grp = 0; grp < red.groups; ++grp) {
        const std::size_t base = grp * red.group_stride;
        if (op == Primitive::kReduceSum || op == Primitive::kReduceMean) {
          const double w = op == Primitive::kReduceSum ? g[grp] : g[grp] / static_cast<double>(red.count);
          for (std::size_t k = 0; k < red.count; ++k) d[base + k * red.step] += w;
          continue;
        }
        // Softmax weights exp(x - lse); recompute the normaliser from the max.
        double m = kNegInf;
        for (std::size_t k = 0; k < red.count; ++k) {
          const std::size_t idx = base + k * red.step;
          if (!masked || in[1][idx] != 0.0) m = std::max(m, xv[idx]);
        }
        double s = 0.0;
        for (std::size_t k = 0; k < red.count; ++k) {
          const std::size_t idx = base + k * red.step;
          if (!masked || in[1][idx] != 0.0) s += std::exp(xv[idx] - m);
        }
        for (std::size_t k = 0; k < red.count; ++k) {
          const std::size_t idx = base + k * red.step;
          if (!masked || in[1][idx] != 0.0) d[idx] += g[grp] * std::exp(xv[idx] - m) / s;
        }
      }
      return;
    }
    case Primitive::kDiag: {
      if (!dst[0]) return;
      const std::size_t k = in[0].dim(0);
      for (std::size_t i = 0; i < k; ++i) (*dst[0])[i * k + i] += g[i];
      return;
    }
    case Primitive::kBroadcastTo:
      if (dst[0]) {
        unbroadcast_add(in[0].shape(), out.shape(), g, *dst[0], [](std::size_t, std::size_t) { return 1.0; });
      }
      return;
    case Primitive::kReshape:
      if (dst[0]) {
        for (std::size_t i = 0; i < g.size(); ++i) (*dst[0])[i] += g[i];
      }
      return;
    case Primitive::kTranspose: {
      if (!dst[0]) return;
      const std::size_t r = in[0].dim(0), c = in[0].dim(1);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) (*dst[0])[i * c + j] += g[j * r + i];
      }
      return;
    }
    case Primitive::kConcat: {
      const int ax = attrs.axis < 0 ? 0 : attrs.axis;
      if (in[0].rank() == 1 || ax == 0) {
        std::size_t offset = 0;
        for (std::size_t t = 0; t < in.size(); ++t) {
          const std::size_t n = in[t].size();
          if (dst[t]) {
            for (std::size_t i = 0; i < n; ++i) (*dst[t])[i] += g[offset + i];
          }
          offset += n;
        }
        return;
      }
      const std::size_t rows = in[0].dim(0);
      const std::size_t cols = out.dim(1);
      std::size_t offset = 0;
      for (std::size_t t = 0; t < in.size(); ++t) {
        const std::size_t c = in[t].dim(1);
        if (dst[t]) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) (*dst[t])[r * c + j] += g[r * cols + offset + j];
          }
        }
        offset += c;
      }
      return;
    }
    case Primitive::kPairConcat: {
      const std::size_t nx = in[0].dim(0), dx = in[0].dim(1);
      const std::size_t ny = in[1].dim(0), dy = in[1].dim(1);
      const std::size_t w = dx + dy;
      for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
          const double* row = g.data() + (i * nx + j) * w;
          if (dst[0]) {
            for (std::size_t k = 0; k < dx; ++k) (*dst[0])[j * dx + k] += row[k];
          }
          if (dst[1]) {
            for (std::size_t k = 0; k < dy; ++k) (*dst[1])[i * dy + k] += row[dx + k];
          }
        }
      }
      return;
    }
  }
}

}  // namespace mib::ad::detail
