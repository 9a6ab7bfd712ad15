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

#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mib/autodiff/tensor.hpp"

namespace mib::ad {

enum class Primitive : std::uint8_t {
  kMatMul,
  kAdd,
  kSubtract,
  kMultiply,
  kDivide,
  kExp,
  kLog,
  kNegate,
  kRelu,
  kTanh,
  kSoftplus,
  kSqrt,
  kSquare,
  kClamp,
  kReduceSum,
  kReduceMean,
  kLogSumExp,
  kLogMeanExp,
  kMaskedLogSumExp,
  kDiag,
  kBroadcastTo,
  kReshape,
  kTranspose,
  kConcat,
  kPairConcat,
  kStopGradient,
};

std::string_view primitive_name(Primitive op);

// Per-primitive options. `axis` = -1 reduces over every element.
struct Attributes {
  int axis = -1;
  double lo = 0.0;
  double hi = 0.0;
  Shape shape{};
};

// Evaluates `op` on `inputs`. The result is recorded on the inputs' tape
// when any input requires a gradient. kStopGradient always yields a constant.
Tensor apply_primitive(Primitive op, std::span<const Tensor> inputs,
                       const Attributes& attrs = {});

class GradientMap {
 public:
  // Gradient with respect to a leaf registered on the producing tape.
  const Tensor& at(const Tensor& leaf) const;
  std::span<const Tensor> in_leaf_order() const { return grads_; }
  // Record indices in the order backward visited them.
  std::span<const std::size_t> visit_order() const { return visits_; }

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> grads_;
  std::unordered_map<std::size_t, std::size_t> index_of_node_;
  std::vector<std::size_t> visits_;
};

// Define-by-run record of primitive applications. Build a fresh tape per
// step; a tape and its tensors belong to one thread.
class Tape {
 public:
  Tape() = default;
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a trainable leaf holding a copy of `value`.
  Tensor leaf(const Tensor& value);
  std::vector<Tensor> leaves(std::span<const Tensor> values);

  // d loss / d leaf for every registered leaf; unreached leaves get zeros.
  GradientMap backward(const Tensor& loss) const;

  // Recomputes every record from its recorded inputs and reports whether
  // all outputs come back bit-identical.
  bool replay_matches() const;

  std::size_t num_records() const { return records_.size(); }
  std::size_t num_leaves() const { return leaves_.size(); }
  std::vector<Primitive> primitive_sequence() const;

 private:
  struct Record {
    Primitive op;
    std::vector<Tensor> inputs;
    Tensor output;
    Attributes attrs;
  };

  friend Tensor apply_primitive(Primitive, std::span<const Tensor>, const Attributes&);
  Tensor record(Primitive op, std::span<const Tensor> inputs, const Attributes& attrs,
                Shape shape, std::vector<double> values);

  std::vector<Record> records_;
  std::vector<Tensor> leaves_;
  std::size_t next_node_ = 0;
};

}  // namespace mib::ad
