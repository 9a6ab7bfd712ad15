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

#include "mib/critics/critics.hpp"

#include <cmath>
#include <string>

#include "mib/autodiff/ops.hpp"
#include "mib/errors.hpp"

namespace mib::critics {
namespace {

using ad::Tensor;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t layer_in(const MLPSpec& spec, std::size_t layer) {
  return layer == 0 ? spec.input_dim : spec.hidden_sizes[layer - 1];
}

std::size_t layer_out(const MLPSpec& spec, std::size_t layer) {
  return layer + 1 == spec.num_layers() ? spec.output_dim : spec.hidden_sizes[layer];
}

void check_finite(const Tensor& s) {
  const auto v = s.values();
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!std::isfinite(v[n])) {
      const std::size_t cols = s.dim(1);
      throw NumericError("score_matrix: non-finite score at (" + std::to_string(n / cols) + ", " +
                         std::to_string(n % cols) + ")");
    }
  }
}

void require_params(std::span<const Tensor> params, std::size_t n, const char* what) {
  if (params.size() != n) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " parameter tensors, got " +
                      std::to_string(params.size()));
  }
}

}  // namespace

std::size_t MLPSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) n += (layer_in(*this, l) + 1) * layer_out(*this, l);
  return n;
}

void MLPSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("MLPSpec: input and output sizes must be positive");
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ConfigError("MLPSpec: hidden sizes must be positive");
  }
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) throw ConfigError("MLPSpec: init_scale must be >= 0");
}

ParameterSet init_params(const MLPSpec& spec, Rng& rng) {
  spec.validate();
  ParameterSet params;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = layer_in(spec, l), out = layer_out(spec, l);
    const double sd = spec.init_scale / std::sqrt(static_cast<double>(in));
    std::vector<double> w(in * out);
    for (auto& e : w) e = sd * rng.normal();
    params.push_back(Tensor::matrix(in, out, std::move(w)));
    params.push_back(Tensor::zeros({out}));
  }
  return params;
}

std::size_t parameter_count(const ParameterSet& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

Tensor mlp_forward(const MLPSpec& spec, std::span<const Tensor> params, const Tensor& x) {
  require_params(params, 2 * spec.num_layers(), "mlp_forward");
  Tensor h = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    h = ad::matmul(h, params[2 * l]) + params[2 * l + 1];
    if (l + 1 < spec.num_layers()) h = spec.activation == Activation::kRelu ? ad::relu(h) : ad::tanh(h);
  }
  return h;
}

void validate(const CriticSpec& spec) {
  std::visit(Overloaded{
                 [](const SeparableCritic& c) {
                   c.g.validate();
                   c.h.validate();
                   if (c.g.output_dim != c.h.output_dim) {
                     throw ConfigError("separable critic: embedding sizes of g and h differ");
                   }
                 },
                 [](const JointCritic& c) {
                   c.body.validate();
                   if (c.body.output_dim != 1) throw ConfigError("joint critic: output_dim must be 1");
                 },
                 [](const KnownConditionalCritic& c) { c.spec.validate(); },
                 [](const ReparameterizedCritic& c) {
                   c.spec.validate();
                   if (c.log_q) {
                     c.log_q->validate();
                     if (c.log_q->output_dim != 1) throw ConfigError("reparameterized critic: log_q must be scalar");
                   }
                 },
             },
             spec);
}

ParameterSet init_params(const CriticSpec& spec, Rng& rng) {
  validate(spec);
  return std::visit(Overloaded{
                        [&](const SeparableCritic& c) {
                          ParameterSet p = init_params(c.g, rng);
                          ParameterSet q = init_params(c.h, rng);
                          p.insert(p.end(), q.begin(), q.end());
                          return p;
                        },
                        [&](const JointCritic& c) { return init_params(c.body, rng); },
                        [](const KnownConditionalCritic&) { return ParameterSet{}; },
                        [&](const ReparameterizedCritic& c) {
                          return c.log_q ? init_params(*c.log_q, rng) : ParameterSet{};
                        },
                    },
                    spec);
}

namespace {

Tensor conditional_scores(const toy::GaussianPairSpec& spec, const toy::Batch& batch) {
  if (batch.rho.size() == 0) return toy::log_conditional(spec, batch.x, batch.y);
  if (batch.rho.size() != spec.dim()) throw ShapeError("score_matrix: batch rho does not match critic dimension");
  return toy::log_conditional(batch.rho, batch.x, batch.y);
}

}  // namespace

Scores score_matrix(const CriticSpec& spec, std::span<const Tensor> params, const toy::Batch& batch) {
  if (batch.x.rank() != 2 || batch.y.rank() != 2 || batch.x.dim(0) != batch.y.dim(0)) {
    throw ShapeError("score_matrix: x and y must be K x d matrices with equal K");
  }
  const std::size_t k = batch.x.dim(0);
  Scores out = std::visit(
      Overloaded{
          [&](const SeparableCritic& c) {
            const std::size_t ng = 2 * c.g.num_layers();
            require_params(params, ng + 2 * c.h.num_layers(), "separable critic");
            const Tensor gx = mlp_forward(c.g, params.subspan(0, ng), batch.x);
            const Tensor hy = mlp_forward(c.h, params.subspan(ng), batch.y);
            return Scores{ad::matmul(hy, ad::transpose(gx)), 2 * k};
          },
          [&](const JointCritic& c) {
            const Tensor pairs = ad::pair_concat(batch.x, batch.y);
            return Scores{ad::reshape(mlp_forward(c.body, params, pairs), {k, k}), k * k};
          },
          [&](const KnownConditionalCritic& c) {
            require_params(params, 0, "known-conditional critic");
            return Scores{conditional_scores(c.spec, batch), 0};
          },
          [&](const ReparameterizedCritic& c) {
            const Tensor cond = conditional_scores(c.spec, batch);
            if (!c.log_q) {
              require_params(params, 0, "reparameterized critic");
              return Scores{1.0 + cond - ad::as_column(toy::log_marginal(batch.y)), 0};
            }
            const Tensor log_q = mlp_forward(*c.log_q, params, batch.y);  // K x 1
            return Scores{1.0 + cond - log_q, k};
          },
      },
      spec);
  check_finite(out.s);
  return out;
}

void validate(const BaselineSpec& spec) {
  if (const auto* c = std::get_if<ConstantBaseline>(&spec)) {
    if (!std::isfinite(c->value)) throw ConfigError("constant baseline: value must be finite");
  } else if (const auto* l = std::get_if<LearnedBaseline>(&spec)) {
    l->net.validate();
    if (l->net.output_dim != 1) throw ConfigError("learned baseline: output_dim must be 1");
  } else if (const auto* e = std::get_if<EmaBaseline>(&spec)) {
    if (!(e->decay >= 0.0 && e->decay < 1.0)) throw ConfigError("ema baseline: decay must lie in [0, 1)");
  }
}

ParameterSet init_params(const BaselineSpec& spec, Rng& rng) {
  validate(spec);
  if (const auto* l = std::get_if<LearnedBaseline>(&spec)) return init_params(l->net, rng);
  return {};
}

double ema_update(std::optional<double> state, double batch_mean_exp_f, double decay) {
  if (!(batch_mean_exp_f > 0.0) || !std::isfinite(batch_mean_exp_f)) {
    throw DomainError("ema_update: observation must be positive and finite, got " +
                      std::to_string(batch_mean_exp_f));
  }
  if (!state) return batch_mean_exp_f;
  return decay * *state + (1.0 - decay) * batch_mean_exp_f;
}

Tensor baseline_log_value(const BaselineSpec& spec, std::span<const Tensor> params, const Tensor& y,
                          std::optional<double> ema_state) {
  if (y.rank() != 2) throw ShapeError("baseline_log_value: y must be a K x d matrix");
  const std::size_t k = y.dim(0);
  return std::visit(Overloaded{
                        [&](const ConstantBaseline& c) { return Tensor::full({k}, c.value); },
                        [&](const LearnedBaseline& l) { return ad::reshape(mlp_forward(l.net, params, y), {k}); },
                        [&](const MarginalBaseline&) { return toy::log_marginal(y); },
                        [&](const EmaBaseline&) {
                          if (!ema_state) throw ConfigError("ema baseline queried before its first update");
                          return Tensor::full({k}, std::log(*ema_state));
                        },
                    },
                    spec);
}

}  // namespace mib::critics
