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

#include "mib/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mib/errors.hpp"

namespace mib::ad {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::shared_ptr<TensorImpl> make_impl(Shape shape, std::vector<double> values) {
  if (shape.size() > 2) {
    throw ShapeError("tensor: rank " + std::to_string(shape.size()) + " unsupported (max 2)");
  }
  if (element_count(shape) != values.size()) {
    throw ShapeError("tensor: shape " + to_string(shape) + " holds " +
                     std::to_string(element_count(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  return impl;
}

}  // namespace

Tensor::Tensor() : impl_(make_impl({}, {0.0})) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : impl_(make_impl(std::move(shape), std::move(values))) {}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return matrix(n, n, std::move(v));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (rank() == 0) return 1;
  if (axis >= rank()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape()));
  }
  return impl_->shape[axis];
}

std::span<double> Tensor::mutable_values() {
  if (impl_->tape != nullptr) {
    throw TapeError("tensor: values of a recorded tensor are immutable");
  }
  return impl_->values;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("tensor: item() on shape " + to_string(shape()));
  }
  return impl_->values[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw ShapeError("tensor: at(row, col) on shape " + to_string(shape()));
  return impl_->values[row * impl_->shape[1] + col];
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->values); }

bool Tensor::is_finite() const {
  return std::all_of(impl_->values.begin(), impl_->values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace mib::ad
