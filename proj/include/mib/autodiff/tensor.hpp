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

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mib::ad {

// Tensors are rank 0, 1 or 2. A rank-1 tensor broadcasts as a row.
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

class Tape;

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

struct TensorImpl {
  Shape shape;
  std::vector<double> values;
  bool requires_grad = false;
  Tape* tape = nullptr;
  std::size_t node = kNoNode;
};

// Dense row-major array of doubles. Copies share storage (handle
// semantics); use detach() for an independent constant copy.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->values.size(); }
  // Extent of `axis`; rank-0 tensors report 1.
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const { return impl_->values; }
  // Only allowed on tensors that are not recorded on a tape.
  std::span<double> mutable_values();

  double item() const;
  double operator[](std::size_t i) const { return impl_->values[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tape* tape() const { return impl_->tape; }
  std::size_t node() const { return impl_->node; }

  Tensor detach() const;
  bool is_finite() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;

  friend class Tape;
};

}  // namespace mib::ad
