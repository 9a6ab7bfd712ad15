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

#include "mib/training/training.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "mib/autodiff/ops.hpp"
#include "mib/autodiff/tape.hpp"
#include "mib/errors.hpp"

namespace mib::training {
namespace {

using ad::Tensor;
using bounds::Estimator;

bool needs_conditional(Estimator e) {
  return e == Estimator::kInfonceTractable || e == Estimator::kLooUpper || e == Estimator::kReparamNwj;
}

bool trainable(Estimator e) {
  switch (e) {
    case Estimator::kTuba:
    case Estimator::kNwj:
    case Estimator::kMine:
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

void check_input(const critics::MLPSpec& m, std::size_t want, const char* what) {
  if (m.input_dim != want) {
    throw ConfigError(std::string("train: ") + what + " input_dim must be " + std::to_string(want) + ", got " +
                      std::to_string(m.input_dim));
  }
}

}  // namespace

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

void adam_step(critics::ParameterSet& params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config) {
  if (grads.size() != params.size()) throw ShapeError("adam_step: one gradient per parameter tensor is required");
  if (state.t == 0) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t p = 0; p < params.size(); ++p) {
      state.m[p].assign(params[p].size(), 0.0);
      state.v[p].assign(params[p].size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameters");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (grads[p].shape() != params[p].shape() || state.m[p].size() != params[p].size()) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(p) + ": " +
                       ad::to_string(params[p].shape()) + " vs gradient " + ad::to_string(grads[p].shape()));
    }
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p].mutable_values();
    const auto g = grads[p].values();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      w[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
  }
}

bounds::BoundResult evaluate(const EstimatorSpec& spec, const Tensor& scores, const Tensor& log_aux,
                             std::optional<double> ema_state) {
  switch (spec.kind) {
    case Estimator::kTuba: return bounds::tuba(scores, log_aux);
    case Estimator::kNwj: return bounds::nwj(scores);
    case Estimator::kDv: return bounds::dv(scores);
    case Estimator::kMine: return bounds::mine(scores, ema_state);
    case Estimator::kInfonce: return bounds::infonce(scores);
    case Estimator::kInterpolated: return bounds::interpolated(scores, log_aux, spec.alpha, spec.mode);
    case Estimator::kJs: return bounds::js(scores);
    case Estimator::kInfonceTractable: return bounds::infonce_tractable(scores);
    case Estimator::kLooUpper: return bounds::loo_upper(scores);
    case Estimator::kReparamNwj: return bounds::reparam_nwj(scores, log_aux);
    default:
      throw ConfigError("estimator '" + std::string(bounds::estimator_info(spec.kind).name) +
                        "' does not take a score matrix");
  }
}

std::vector<SchedulePoint> staircase(std::size_t steps, std::span<const double> levels) {
  if (levels.empty()) throw ConfigError("staircase: at least one MI level is required");
  std::vector<SchedulePoint> out;
  for (std::size_t i = 0; i < levels.size(); ++i) out.push_back({i * steps / levels.size(), levels[i]});
  return out;
}

critics::BaselineSpec default_baseline(const EstimatorSpec& spec, std::size_t dim) {
  switch (spec.kind) {
    case Estimator::kTuba:
    case Estimator::kInterpolated:
    case Estimator::kReparamNwj:
      return critics::LearnedBaseline{critics::MLPSpec{dim, {256, 256}, 1, critics::Activation::kRelu, 1.0}};
    case Estimator::kMine:
      return critics::EmaBaseline{0.99};
    default:
      return critics::ConstantBaseline{1.0};
  }
}

std::vector<SchedulePoint> TrainConfig::effective_schedule() const {
  if (!schedule.empty()) return schedule;
  const double levels[] = {2.0, 4.0, 6.0, 8.0, 10.0};
  return staircase(steps, levels);
}

critics::BaselineSpec TrainConfig::effective_baseline() const {
  return baseline ? *baseline : default_baseline(estimator, dim);
}

void TrainConfig::validate() const {
  if (steps < 1) throw ConfigError("train: steps must be >= 1");
  if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (dim < 1) throw ConfigError("train: dim must be >= 1");
  const std::string name(bounds::estimator_info(estimator.kind).name);
  if (!trainable(estimator.kind)) throw ConfigError("train: estimator '" + name + "' has no score-matrix objective");
  if (!(estimator.alpha >= 0.0 && estimator.alpha <= 1.0)) throw ConfigError("train: alpha must lie in [0, 1]");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ConfigError("train: smoothing must lie in [0, 1)");
  adam.validate();
  critics::validate(critic);
  const critics::BaselineSpec base = effective_baseline();
  critics::validate(base);
  const auto sched = effective_schedule();
  if (sched.front().step_start != 0) throw ConfigError("train: schedule must start at step 0");
  for (std::size_t i = 0; i < sched.size(); ++i) {
    if (!(sched[i].target_mi >= 0.0) || !std::isfinite(sched[i].target_mi)) {
      throw ConfigError("train: target MI must be finite and nonnegative");
    }
    if (i > 0 && sched[i].step_start <= sched[i - 1].step_start) {
      throw ConfigError("train: schedule steps must be increasing");
    }
  }
  const bool conditional = std::holds_alternative<critics::KnownConditionalCritic>(critic) ||
                           std::holds_alternative<critics::ReparameterizedCritic>(critic);
  if (conditional && dataset != Dataset::kGaussian) {
    throw ConfigError("train: conditional critics need the Gaussian dataset");
  }
  if (needs_conditional(estimator.kind) && !std::holds_alternative<critics::KnownConditionalCritic>(critic)) {
    throw ConfigError("train: estimator '" + name + "' needs the known_conditional critic");
  }
  if (estimator.kind == Estimator::kMine && !std::holds_alternative<critics::EmaBaseline>(base)) {
    throw ConfigError("train: mine needs an ema baseline");
  }
  if (const auto* s = std::get_if<critics::SeparableCritic>(&critic)) {
    check_input(s->g, dim, "critic g");
    check_input(s->h, dim, "critic h");
  } else if (const auto* j = std::get_if<critics::JointCritic>(&critic)) {
    check_input(j->body, 2 * dim, "joint critic");
  } else if (const auto* k = std::get_if<critics::KnownConditionalCritic>(&critic)) {
    if (k->spec.dim() != dim) throw ConfigError("train: critic dimension mismatch");
  } else if (const auto* r = std::get_if<critics::ReparameterizedCritic>(&critic)) {
    if (r->spec.dim() != dim) throw ConfigError("train: critic dimension mismatch");
    if (r->log_q) check_input(*r->log_q, dim, "critic log_q");
  }
  if (const auto* l = std::get_if<critics::LearnedBaseline>(&base)) check_input(l->net, dim, "baseline");
}

Trace train_estimator(const TrainConfig& config) {
  config.validate();
  const auto schedule = config.effective_schedule();
  const critics::BaselineSpec baseline = config.effective_baseline();
  const std::size_t d = config.dim;

  Rng init_rng(derive_seed(config.seed, 0, 1));
  Rng data_rng(derive_seed(config.seed, 0, 2));
  critics::ParameterSet params = critics::init_params(config.critic, init_rng);
  const std::size_t n_critic = params.size();
  const critics::ParameterSet base_params = critics::init_params(baseline, init_rng);
  params.insert(params.end(), base_params.begin(), base_params.end());

  std::optional<Tensor> cubic_w;
  if (config.dataset == Dataset::kCubic) {
    // One W per seed, shared by every MI level.
    Rng w_rng(derive_seed(config.seed, 0, 3));
    cubic_w = toy::CubicTransformSpec::sample(toy::GaussianPairSpec::uniform(d, 0.0), w_rng).w;
  }
  std::optional<double> ema;
  const double ema_decay =
      std::holds_alternative<critics::EmaBaseline>(baseline) ? std::get<critics::EmaBaseline>(baseline).decay : 0.0;

  Trace trace;
  trace.seed = config.seed;
  trace.records.reserve(config.steps);
  AdamState adam;
  std::size_t segment = 0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    while (segment + 1 < schedule.size() && schedule[segment + 1].step_start <= step) ++segment;
    const double target = schedule[segment].target_mi;
    const auto pair = toy::GaussianPairSpec::uniform(d, toy::rho_for_mi(target, d));
    toy::DistributionSpec spec = pair;
    if (cubic_w) spec = toy::CubicTransformSpec{pair, *cubic_w};
    const toy::Batch batch = toy::sample_joint(spec, config.batch_size, data_rng);

    ad::Tape tape;
    const std::vector<Tensor> leaves = tape.leaves(params);
    const std::span<const Tensor> all(leaves);
    const Tensor s = critics::score_matrix(config.critic, all.subspan(0, n_critic), batch).s;
    const bool needs_aux = config.estimator.kind == Estimator::kTuba ||
                           config.estimator.kind == Estimator::kInterpolated ||
                           config.estimator.kind == Estimator::kReparamNwj;
    const Tensor log_aux =
        needs_aux ? critics::baseline_log_value(baseline, all.subspan(n_critic), batch.y) : Tensor::vector({});
    const bounds::BoundResult r = evaluate(config.estimator, s, log_aux, ema);
    const double objective = r.objective.item();
    if (!std::isfinite(objective) || !std::isfinite(r.estimate)) {
      throw NumericError("train: non-finite objective at step " + std::to_string(step) +
                         " (clamp_count=" + std::to_string(r.diagnostics.clamp_count) +
                         ", target_mi=" + format_double(target) + ")");
    }
    if (!params.empty() && r.objective.requires_grad()) {
      const auto grads = tape.backward(ad::negate(r.objective));
      adam_step(params, grads.in_leaf_order(), adam, config.adam);
    }
    if (config.estimator.kind == Estimator::kMine) {
      const double log_batch = *r.diagnostics.log_mean_exp_offdiag;
      if (log_batch > 700.0) throw NumericError("train: moving average overflow at step " + std::to_string(step));
      ema = critics::ema_update(ema, std::exp(log_batch), ema_decay);
    }
    trace.records.push_back({step, r.estimate, objective, r.diagnostics.clamp_count, target});
  }
  return trace;
}

std::vector<double> smooth_series(std::span<const double> values, double decay) {
  if (values.empty()) throw ConfigError("smooth_trace: empty series");
  if (!(decay >= 0.0 && decay < 1.0)) throw ConfigError("smooth_trace: decay must lie in [0, 1)");
  std::vector<double> out(values.size());
  out[0] = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) out[i] = decay * out[i - 1] + (1.0 - decay) * values[i];
  return out;
}

std::vector<double> smooth_trace(const Trace& trace, double decay) {
  std::vector<double> v;
  v.reserve(trace.records.size());
  for (const auto& r : trace.records) v.push_back(r.estimate);
  return smooth_series(v, decay);
}

std::string format_double(double value, bool hex) {
  char buf[64];
  const auto res = hex ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::hex)
                       : std::to_chars(buf, buf + sizeof buf, value);
  if (!hex || !std::isfinite(value)) return std::string(buf, res.ptr);
  // to_chars omits the prefix that strtod needs.
  std::string s(buf, res.ptr);
  return s[0] == '-' ? "-0x" + s.substr(1) : "0x" + s;
}

void write_trace_csv(std::ostream& out, const Trace& trace, std::span<const double> smoothed, bool hex) {
  if (smoothed.size() != trace.records.size()) throw ShapeError("write_trace_csv: smoothed series length differs");
  out << "step,estimate,smoothed,objective,target_mi,clamp_count,seed,config_hash\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    out << r.step << ',' << format_double(r.estimate, hex) << ',' << format_double(smoothed[i], hex) << ','
        << format_double(r.objective, hex) << ',' << format_double(r.target_mi, hex) << ',' << r.clamp_count << ','
        << trace.seed << ',' << trace.config_hash << '\n';
  }
}

}  // namespace mib::training
