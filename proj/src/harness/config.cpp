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

#include "mib/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <type_traits>
#include <utility>

#include "mib/bounds/registry.hpp"
#include "mib/errors.hpp"
#include "mib/harness/experiments.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::harness {

using nlohmann::json;
using training::Dataset;

namespace {

// Object view that remembers which keys were read, so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = get(key)) out = convert<T>(*v, at(key));
  }

  template <typename T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(path, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(path, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) fail(path, "expected a nonnegative integer");
      return v.get<T>();
    } else {
      if (!v.is_array()) fail(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

critics::Activation parse_activation(const std::string& s, const std::string& path) {
  if (s == "relu") return critics::Activation::kRelu;
  if (s == "tanh") return critics::Activation::kTanh;
  Reader::fail(path, "unknown activation '" + s + "' (relu | tanh)");
}

std::string activation_name(critics::Activation a) { return a == critics::Activation::kRelu ? "relu" : "tanh"; }

template <typename F>
auto rethrow_at(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    Reader::fail(path, e.what());
  }
}

CriticConfig parse_critic(const json& j, const std::string& path) {
  Reader r(j, path);
  CriticConfig c;
  r.read("kind", c.kind);
  r.read("hidden_sizes", c.hidden_sizes);
  std::string act = activation_name(c.activation);
  r.read("activation", act);
  c.activation = parse_activation(act, r.at("activation"));
  r.read("embed_dim", c.embed_dim);
  r.read("init_scale", c.init_scale);
  r.read("learned_q", c.learned_q);
  r.finish();
  rethrow_at(path, [&] {
    c.validate();
    return 0;
  });
  return c;
}

BaselineConfig parse_baseline(const json& j, const std::string& path) {
  Reader r(j, path);
  BaselineConfig b;
  r.read("kind", b.kind);
  r.read("value", b.value);
  r.read("hidden_sizes", b.hidden_sizes);
  std::string act = activation_name(b.activation);
  r.read("activation", act);
  b.activation = parse_activation(act, r.at("activation"));
  r.read("ema_decay", b.ema_decay);
  r.finish();
  rethrow_at(path, [&] {
    b.validate();
    return 0;
  });
  return b;
}

EstimatorEntry named(bounds::Estimator kind) {
  EstimatorEntry e;
  e.spec.kind = kind;
  return e;
}

EstimatorEntry interpolated_at(double alpha) {
  EstimatorEntry e = named(bounds::Estimator::kInterpolated);
  e.spec.alpha = alpha;
  e.alpha_given = true;
  return e;
}

EstimatorEntry parse_estimator_entry(const json& j, const std::string& path) {
  if (j.is_string()) {
    return named(rethrow_at(path, [&] { return bounds::parse_estimator(j.get<std::string>()); }));
  }
  Reader r(j, path);
  std::string name;
  r.read("name", name);
  if (name.empty()) Reader::fail(path, "missing estimator name");
  EstimatorEntry e = named(rethrow_at(r.at("name"), [&] { return bounds::parse_estimator(name); }));
  const bool interp = e.spec.kind == bounds::Estimator::kInterpolated;
  if (const json* a = r.get("alpha")) {
    if (!interp) Reader::fail(r.at("alpha"), "alpha applies to interpolated only");
    e.spec.alpha = Reader::convert<double>(*a, r.at("alpha"));
    if (!(e.spec.alpha >= 0.0 && e.spec.alpha <= 1.0)) Reader::fail(r.at("alpha"), "alpha must lie in [0, 1]");
    e.alpha_given = true;
  }
  if (const json* m = r.get("mode")) {
    if (!interp) Reader::fail(r.at("mode"), "mode applies to interpolated only");
    const auto s = Reader::convert<std::string>(*m, r.at("mode"));
    e.spec.mode = rethrow_at(r.at("mode"), [&] { return bounds::parse_mode(s); });
    e.mode_given = true;
  }
  if (const json* c = r.get("critic")) e.critic = parse_critic(*c, r.at("critic"));
  if (const json* b = r.get("baseline")) e.baseline = parse_baseline(*b, r.at("baseline"));
  r.finish();
  return e;
}

json critic_json(const CriticConfig& c) {
  return json{{"kind", c.kind},         {"hidden_sizes", c.hidden_sizes},
              {"activation", activation_name(c.activation)}, {"embed_dim", c.embed_dim},
              {"init_scale", c.init_scale}, {"learned_q", c.learned_q}};
}

json baseline_json(const BaselineConfig& b) {
  return json{{"kind", b.kind},
              {"value", b.value},
              {"hidden_sizes", b.hidden_sizes},
              {"activation", activation_name(b.activation)},
              {"ema_decay", b.ema_decay}};
}

json estimator_json(const EstimatorEntry& e) {
  json j{{"name", std::string(bounds::estimator_info(e.spec.kind).name)}};
  if (e.alpha_given) j["alpha"] = e.spec.alpha;
  if (e.mode_given) j["mode"] = std::string(bounds::mode_name(e.spec.mode));
  if (e.critic) j["critic"] = critic_json(*e.critic);
  if (e.baseline) j["baseline"] = baseline_json(*e.baseline);
  return j;
}

critics::MLPSpec mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, critics::Activation a,
                     double scale) {
  critics::MLPSpec s;
  s.input_dim = in;
  s.hidden_sizes = hidden;
  s.output_dim = out;
  s.activation = a;
  s.init_scale = scale;
  return s;
}

bool is_sweep(Experiment e) {
  return e == Experiment::kOptimalSweep || e == Experiment::kGradient || e == Experiment::kInterpCompare;
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kFig2: return "fig2";
    case Experiment::kOptimalSweep: return "optimal_sweep";
    case Experiment::kGradient: return "gradient";
    case Experiment::kInterpCompare: return "interp_compare";
    case Experiment::kTable3: return "table3";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::kFig2, Experiment::kOptimalSweep, Experiment::kGradient, Experiment::kInterpCompare,
                 Experiment::kTable3}) {
    if (experiment_name(e) == name) return e;
  }
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (fig2 | optimal_sweep | gradient | interp_compare | table3)");
}

std::string_view dataset_name(Dataset d) { return d == Dataset::kGaussian ? "gaussian" : "cubic"; }

Dataset parse_dataset(std::string_view name) {
  if (name == "gaussian") return Dataset::kGaussian;
  if (name == "cubic") return Dataset::kCubic;
  throw ConfigError("unknown dataset '" + std::string(name) + "' (gaussian | cubic)");
}

void CriticConfig::validate() const {
  if (kind != "separable" && kind != "joint" && kind != "known_conditional" && kind != "reparameterized") {
    throw ConfigError("critic kind '" + kind + "' (separable | joint | known_conditional | reparameterized)");
  }
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ConfigError("hidden sizes must be positive");
  }
  if (kind == "separable" && embed_dim == 0) throw ConfigError("embed_dim must be positive");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw ConfigError("init_scale must be positive");
  if (learned_q && kind != "reparameterized") throw ConfigError("learned_q applies to the reparameterized critic");
}

critics::CriticSpec CriticConfig::build(std::size_t dim) const {
  validate();
  if (kind == "separable") {
    return critics::SeparableCritic{mlp(dim, hidden_sizes, embed_dim, activation, init_scale),
                                    mlp(dim, hidden_sizes, embed_dim, activation, init_scale)};
  }
  if (kind == "joint") return critics::JointCritic{mlp(2 * dim, hidden_sizes, 1, activation, init_scale)};
  // rho comes from each batch; only the dimension is fixed here.
  const auto pair = toy::GaussianPairSpec::uniform(dim, 0.0);
  if (kind == "known_conditional") return critics::KnownConditionalCritic{pair};
  critics::ReparameterizedCritic r{pair, std::nullopt};
  if (learned_q) r.log_q = mlp(dim, hidden_sizes, 1, activation, init_scale);
  return r;
}

void BaselineConfig::validate() const {
  if (kind != "constant" && kind != "learned" && kind != "marginal" && kind != "ema") {
    throw ConfigError("baseline kind '" + kind + "' (constant | learned | marginal | ema)");
  }
  if (kind == "constant" && !(value > 0.0 && std::isfinite(value))) {
    throw ConfigError("constant baseline must be positive");
  }
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must lie in [0, 1)");
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ConfigError("hidden sizes must be positive");
  }
}

critics::BaselineSpec BaselineConfig::build(std::size_t dim) const {
  validate();
  if (kind == "constant") return critics::ConstantBaseline{value};
  if (kind == "learned") return critics::LearnedBaseline{mlp(dim, hidden_sizes, 1, activation, 1.0)};
  if (kind == "marginal") return critics::MarginalBaseline{};
  return critics::EmaBaseline{ema_decay};
}

ExperimentConfig default_config(Experiment e) {
  using bounds::Estimator;
  using bounds::InterpolationMode;
  ExperimentConfig c;
  c.experiment = e;
  c.mi_levels = {2, 4, 6, 8, 10};
  c.modes = {InterpolationMode::kMixture};
  switch (e) {
    case Experiment::kFig2: {
      c.estimators = {named(Estimator::kNwj), named(Estimator::kJs), named(Estimator::kInfonce),
                      named(Estimator::kInterpolated)};
      CriticConfig sep;
      CriticConfig joint;
      joint.kind = "joint";
      c.critics = {sep, joint};
      c.batch_sizes = {64};
      c.alphas = {0.01, 0.1, 0.5};
      c.reps = 1;
      break;
    }
    case Experiment::kOptimalSweep:
      c.estimators = {named(Estimator::kNwj),    named(Estimator::kTuba),         named(Estimator::kDv),
                      named(Estimator::kJs),     named(Estimator::kInfonce),      named(Estimator::kInterpolated),
                      named(Estimator::kInfonceTractable), named(Estimator::kLooUpper), named(Estimator::kReparamNwj)};
      c.batch_sizes = {16, 64, 256};
      c.alphas = {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0};
      c.reps = 5000;
      break;
    case Experiment::kGradient:
      c.estimators = {named(Estimator::kNwj), named(Estimator::kInfonce), named(Estimator::kInterpolated)};
      c.batch_sizes = {16, 64, 256};
      c.alphas = {0.0, 0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
      c.reps = 1000;
      break;
    case Experiment::kInterpCompare:
      c.estimators = {named(Estimator::kNwj), named(Estimator::kInfonce), named(Estimator::kInterpolated)};
      c.batch_sizes = {64};
      c.mi_levels = {2, 6, 10};
      c.alphas = {0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0};
      c.modes = {InterpolationMode::kMixture, InterpolationMode::kLinear, InterpolationMode::kProduct};
      c.reps = 5000;
      break;
    case Experiment::kTable3:
      c.estimators = {named(Estimator::kNwj), named(Estimator::kJs), named(Estimator::kInfonce),
                      interpolated_at(0.01), named(Estimator::kReparamNwj)};
      c.batch_sizes = {64};
      c.alphas = {0.01};
      c.reps = 1;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) -> void { throw ConfigError("config: " + m); };
  if (datasets.empty()) fail("no dataset");
  if (estimators.empty()) fail("no estimators");
  if (reps < 1) fail("reps must be >= 1");
  if (steps < 1) fail("steps must be >= 1");
  if (dim < 1) fail("dim must be >= 1");
  if (mi_levels.empty()) fail("mi_levels is empty");
  for (double mi : mi_levels) {
    if (!(mi >= 0.0) || !std::isfinite(mi)) fail("MI levels must be finite and >= 0");
  }
  if (experiment != Experiment::kTable3) {
    if (batch_sizes.empty()) fail("batch_sizes is empty");
    for (std::size_t k : batch_sizes) {
      if (k < 2) fail("batch sizes must be >= 2");
    }
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) fail("alphas must lie in [0, 1]");
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) fail("smoothing must lie in [0, 1)");
  adam.validate();
  const bool needs_alphas = std::any_of(estimators.begin(), estimators.end(), [](const EstimatorEntry& e) {
    return e.spec.kind == bounds::Estimator::kInterpolated && !e.alpha_given;
  });
  if (needs_alphas && alphas.empty()) fail("interpolated without alpha needs a non-empty alphas list");
  if (is_sweep(experiment)) {
    for (Dataset d : datasets) {
      if (d != Dataset::kGaussian) fail(std::string(experiment_name(experiment)) + " needs the gaussian dataset");
    }
    if (modes.empty()) fail("modes is empty");
    for (const auto& e : estimators) {
      if (!has_optimal_form(e.spec.kind)) {
        fail("estimator '" + std::string(bounds::estimator_info(e.spec.kind).name) +
             "' has no optimal-critic form");
      }
    }
  }
  if (experiment == Experiment::kGradient) {
    for (const auto& e : estimators) {
      if (e.spec.kind == bounds::Estimator::kJs) fail("js reports a value that is not its training objective; use nwj");
    }
  }
  if (experiment == Experiment::kFig2 && critics.empty()) fail("fig2 needs at least one critic");
  for (const auto& cc : critics) cc.validate();
  if (experiment == Experiment::kTable3) {
    if (grid.critic_kinds.empty() || grid.layers.empty() || grid.widths.empty() || grid.learning_rates.empty() ||
        grid.batch_sizes.empty()) {
      fail("table3 grid has an empty axis");
    }
    for (const auto& k : grid.critic_kinds) {
      if (k != "separable" && k != "joint") fail("grid critic kinds are separable | joint");
    }
    for (std::size_t l : grid.layers) {
      if (l < 1) fail("grid layers must be >= 1");
    }
    for (std::size_t w : grid.widths) {
      if (w < 1) fail("grid widths must be >= 1");
    }
    for (double lr : grid.learning_rates) {
      if (!(lr > 0.0) || !std::isfinite(lr)) fail("grid learning rates must be positive");
    }
    for (std::size_t k : grid.batch_sizes) {
      if (k < 2) fail("grid batch sizes must be >= 2");
    }
  }
}

ExperimentConfig parse_config(const json& j) {
  Reader r(j, "");
  std::string name;
  r.read("experiment", name);
  if (name.empty()) Reader::fail("experiment", "missing experiment name");
  ExperimentConfig c = default_config(rethrow_at("experiment", [&] { return parse_experiment(name); }));

  if (const json* d = r.get("dataset")) {
    c.datasets.clear();
    if (d->is_string()) {
      c.datasets.push_back(rethrow_at("dataset", [&] { return parse_dataset(d->get<std::string>()); }));
    } else {
      for (const auto& s : Reader::convert<std::vector<std::string>>(*d, "dataset")) {
        c.datasets.push_back(rethrow_at("dataset", [&] { return parse_dataset(s); }));
      }
    }
  }
  if (const json* es = r.get("estimators")) {
    if (!es->is_array()) Reader::fail("estimators", "expected an array");
    c.estimators.clear();
    for (std::size_t i = 0; i < es->size(); ++i) {
      c.estimators.push_back(parse_estimator_entry((*es)[i], "estimators[" + std::to_string(i) + "]"));
    }
  }
  if (const json* cs = r.get("critics")) {
    if (!cs->is_array()) Reader::fail("critics", "expected an array");
    c.critics.clear();
    for (std::size_t i = 0; i < cs->size(); ++i) {
      c.critics.push_back(parse_critic((*cs)[i], "critics[" + std::to_string(i) + "]"));
    }
  }
  r.read("batch_sizes", c.batch_sizes);
  r.read("mi_levels", c.mi_levels);
  r.read("reps", c.reps);
  r.read("steps", c.steps);
  r.read("dim", c.dim);
  r.read("alphas", c.alphas);
  if (const json* ms = r.get("modes")) {
    c.modes.clear();
    for (const auto& s : Reader::convert<std::vector<std::string>>(*ms, "modes")) {
      c.modes.push_back(rethrow_at("modes", [&] { return bounds::parse_mode(s); }));
    }
  }
  r.read("smoothing", c.smoothing);
  r.read("seed", c.seed);
  r.read("workers", c.workers);
  if (const json* a = r.get("adam")) {
    Reader ra(*a, "adam");
    ra.read("learning_rate", c.adam.learning_rate);
    ra.read("beta1", c.adam.beta1);
    ra.read("beta2", c.adam.beta2);
    ra.read("eps", c.adam.eps);
    ra.finish();
  }
  if (const json* g = r.get("grid")) {
    Reader rg(*g, "grid");
    rg.read("critic_kinds", c.grid.critic_kinds);
    rg.read("layers", c.grid.layers);
    rg.read("widths", c.grid.widths);
    rg.read("learning_rates", c.grid.learning_rates);
    rg.read("batch_sizes", c.grid.batch_sizes);
    rg.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json datasets = json::array();
  for (Dataset d : c.datasets) datasets.push_back(std::string(dataset_name(d)));
  json estimators = json::array();
  for (const auto& e : c.estimators) estimators.push_back(estimator_json(e));
  json crit = json::array();
  for (const auto& cc : c.critics) crit.push_back(critic_json(cc));
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(std::string(bounds::mode_name(m)));
  return json{{"experiment", std::string(experiment_name(c.experiment))},
              {"dataset", datasets},
              {"estimators", estimators},
              {"critics", crit},
              {"batch_sizes", c.batch_sizes},
              {"mi_levels", c.mi_levels},
              {"reps", c.reps},
              {"steps", c.steps},
              {"dim", c.dim},
              {"alphas", c.alphas},
              {"modes", modes},
              {"smoothing", c.smoothing},
              {"seed", c.seed},
              {"adam",
               {{"learning_rate", c.adam.learning_rate},
                {"beta1", c.adam.beta1},
                {"beta2", c.adam.beta2},
                {"eps", c.adam.eps}}},
              {"grid",
               {{"critic_kinds", c.grid.critic_kinds},
                {"layers", c.grid.layers},
                {"widths", c.grid.widths},
                {"learning_rates", c.grid.learning_rates},
                {"batch_sizes", c.grid.batch_sizes}}}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(to_json(c).dump()); }

std::vector<EstimatorEntry> expand_estimators(const ExperimentConfig& c) {
  std::vector<EstimatorEntry> out;
  for (const auto& e : c.estimators) {
    if (e.spec.kind != bounds::Estimator::kInterpolated || (e.alpha_given && e.mode_given)) {
      out.push_back(e);
      continue;
    }
    const auto modes = e.mode_given ? std::vector<bounds::InterpolationMode>{e.spec.mode} : c.modes;
    const auto alphas = e.alpha_given ? std::vector<double>{e.spec.alpha} : c.alphas;
    for (auto m : modes) {
      for (double a : alphas) {
        EstimatorEntry x = e;
        x.spec.mode = m;
        x.spec.alpha = a;
        x.alpha_given = x.mode_given = true;
        out.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace mib::harness
