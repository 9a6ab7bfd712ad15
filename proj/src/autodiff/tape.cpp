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

#include "mib/autodiff/tape.hpp"

#include <cstring>

#include "kernels.hpp"
#include "mib/errors.hpp"

namespace mib::ad {

std::string_view primitive_name(Primitive op) {
  switch (op) {
    case Primitive::kMatMul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kSubtract: return "subtract";
    case Primitive::kMultiply: return "multiply";
    case Primitive::kDivide: return "divide";
    case Primitive::kExp: return "exp";
    case Primitive::kLog: return "log";
    case Primitive::kNegate: return "negate";
    case Primitive::kRelu: return "relu";
    case Primitive::kTanh: return "tanh";
    case Primitive::kSoftplus: return "softplus";
    case Primitive::kSqrt: return "sqrt";
    case Primitive::kSquare: return "square";
    case Primitive::kClamp: return "clamp";
    case Primitive::kReduceSum: return "reduce_sum";
    case Primitive::kReduceMean: return "reduce_mean";
    case Primitive::kLogSumExp: return "log_sum_exp";
    case Primitive::kLogMeanExp: return "log_mean_exp";
    case Primitive::kMaskedLogSumExp: return "masked_log_sum_exp";
    case Primitive::kDiag: return "diag";
    case Primitive::kBroadcastTo: return "broadcast_to";
    case Primitive::kReshape: return "reshape";
    case Primitive::kTranspose: return "transpose";
    case Primitive::kConcat: return "concat";
    case Primitive::kPairConcat: return "pair_concat";
    case Primitive::kStopGradient: return "stop_gradient";
  }
  return "unknown";
}

Tensor apply_primitive(Primitive op, std::span<const Tensor> inputs, const Attributes& attrs) {
  detail::Forward result = detail::forward(op, inputs, attrs);
  Tape* tape = nullptr;
  if (op != Primitive::kStopGradient) {
    for (const auto& t : inputs) {
      if (!t.requires_grad()) continue;
      if (tape != nullptr && t.tape() != tape) {
        throw TapeError(std::string(primitive_name(op)) + ": inputs live on different tapes");
      }
      tape = t.tape();
    }
  }
  if (tape == nullptr) return Tensor(std::move(result.shape), std::move(result.values));
  return tape->record(op, inputs, attrs, std::move(result.shape), std::move(result.values));
}

Tape::~Tape() {
  // Tensors may outlive the tape; they become plain constants.
  auto release = [](Tensor& t) {
    t.impl_->tape = nullptr;
    t.impl_->requires_grad = false;
    t.impl_->node = kNoNode;
  };
  for (auto& t : leaves_) release(t);
  for (auto& r : records_) release(r.output);
}

Tensor Tape::leaf(const Tensor& value) {
  Tensor t = value.detach();
  t.impl_->requires_grad = true;
  t.impl_->tape = this;
  t.impl_->node = next_node_++;
  leaves_.push_back(t);
  return t;
}

std::vector<Tensor> Tape::leaves(std::span<const Tensor> values) {
  std::vector<Tensor> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(leaf(v));
  return out;
}

Tensor Tape::record(Primitive op, std::span<const Tensor> inputs, const Attributes& attrs,
                    Shape shape, std::vector<double> values) {
  Tensor out(std::move(shape), std::move(values));
  out.impl_->requires_grad = true;
  out.impl_->tape = this;
  out.impl_->node = next_node_++;
  records_.push_back(Record{op, std::vector<Tensor>(inputs.begin(), inputs.end()), out, attrs});
  return out;
}

const Tensor& GradientMap::at(const Tensor& leaf) const {
  auto it = index_of_node_.find(leaf.node());
  if (leaf.tape() != tape_ || it == index_of_node_.end()) {
    throw TapeError("gradient requested for a tensor that is not a leaf of this tape");
  }
  return grads_[it->second];
}

GradientMap Tape::backward(const Tensor& loss) const {
  if (loss.tape() != this || !loss.requires_grad()) {
    throw TapeError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw TapeError("backward: loss must be scalar, got shape " + to_string(loss.shape()));
  }
  std::vector<std::vector<double>> grads(next_node_);
  grads[loss.node()].assign(1, 1.0);

  GradientMap result;
  result.tape_ = this;
  std::vector<std::vector<double>*> dst;
  for (std::size_t r = records_.size(); r-- > 0;) {
    const Record& rec = records_[r];
    auto& out_grad = grads[rec.output.node()];
    if (out_grad.empty()) continue;
    result.visits_.push_back(r);
    dst.assign(rec.inputs.size(), nullptr);
    for (std::size_t k = 0; k < rec.inputs.size(); ++k) {
      const Tensor& in = rec.inputs[k];
      if (!in.requires_grad() || in.tape() != this) continue;
      auto& buf = grads[in.node()];
      if (buf.empty()) buf.assign(in.size(), 0.0);
      dst[k] = &buf;
    }
    detail::vjp(rec.op, rec.inputs, rec.output, out_grad, rec.attrs, dst);
  }

  result.grads_.reserve(leaves_.size());
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const Tensor& leaf = leaves_[i];
    auto& g = grads[leaf.node()];
    if (g.empty()) g.assign(leaf.size(), 0.0);
    result.grads_.emplace_back(leaf.shape(), std::move(g));
    result.index_of_node_.emplace(leaf.node(), i);
  }
  return result;
}

bool Tape::replay_matches() const {
  for (const auto& rec : records_) {
    detail::Forward again = detail::forward(rec.op, rec.inputs, rec.attrs);
    auto recorded = rec.output.values();
    if (again.shape != rec.output.shape() ||
        std::memcmp(again.values.data(), recorded.data(), recorded.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

std::vector<Primitive> Tape::primitive_sequence() const {
  std::vector<Primitive> ops;
  ops.reserve(records_.size());
  for (const auto& r : records_) ops.push_back(r.op);
  return ops;
}

}  // namespace mib::ad
