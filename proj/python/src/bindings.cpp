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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mib/autodiff/tape.hpp"
#include "mib/bounds/bounds.hpp"
#include "mib/bounds/registry.hpp"
#include "mib/errors.hpp"
#include "mib/harness/config.hpp"
#include "mib/harness/experiments.hpp"
#include "mib/harness/runner.hpp"
#include "mib/harness/selfcheck.hpp"
#include "mib/toy/distributions.hpp"
#include "mib/training/training.hpp"

namespace py = pybind11;
using namespace mib;
using ad::Tensor;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

Tensor matrix_from(const Array& a, const char* what) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) {
    throw ShapeError(std::string(what) + " must be a square 2-D array");
  }
  const auto n = static_cast<std::size_t>(a.shape(0));
  return Tensor::matrix(n, n, std::vector<double>(a.data(), a.data() + a.size()));
}

Tensor vector_from(const Array& a, const char* what) {
  if (a.ndim() != 1) throw ShapeError(std::string(what) + " must be a 1-D array");
  return Tensor::vector(std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

training::EstimatorSpec spec_from(const std::string& name, double alpha, const std::string& mode) {
  training::EstimatorSpec s;
  s.kind = bounds::parse_estimator(name);
  s.alpha = alpha;
  s.mode = bounds::parse_mode(mode);
  return s;
}

// Dispatches on the estimator for a score (or conditional) matrix.
bounds::BoundResult dispatch(const training::EstimatorSpec& spec, const Tensor& s, const std::optional<Tensor>& aux,
                             std::optional<double> ema) {
  using bounds::Estimator;
  auto need_aux = [&](const char* what) -> const Tensor& {
    if (!aux) throw ConfigError(std::string(bounds::estimator_info(spec.kind).name) + " needs " + what);
    return *aux;
  };
  switch (spec.kind) {
    case Estimator::kTuba:
      return bounds::tuba(s, need_aux("log_aux = log a(y)"));
    case Estimator::kNwj:
      return bounds::nwj(s);
    case Estimator::kDv:
      return bounds::dv(s);
    case Estimator::kMine:
      return bounds::mine(s, ema);
    case Estimator::kInfonce:
      return bounds::infonce(s);
    case Estimator::kInterpolated:
      return bounds::interpolated(s, need_aux("log_aux = log q(y)"), spec.alpha, spec.mode);
    case Estimator::kJs:
      return bounds::js(s);
    case Estimator::kInfonceTractable:
      return bounds::infonce_tractable(s);
    case Estimator::kLooUpper:
      return bounds::loo_upper(s);
    case Estimator::kReparamNwj:
      return bounds::reparam_nwj(s, need_aux("log_aux = log q(y)"));
    default:
      throw ConfigError(std::string(bounds::estimator_info(spec.kind).name) +
                        " is a closed-form estimator; it does not take a score matrix");
  }
}

py::dict result_dict(const bounds::BoundResult& r) {
  py::dict d;
  d["estimate"] = r.estimate;
  d["objective"] = r.objective.item();
  d["clamp_count"] = r.diagnostics.clamp_count;
  d["saturated"] = r.diagnostics.saturated;
  d["evaluation_only"] = r.diagnostics.evaluation_only;
  d["expectation_only"] = r.diagnostics.expectation_only;
  return d;
}

py::dict bound(const std::string& name, const Array& scores, std::optional<Array> log_aux, double alpha,
               const std::string& mode, std::optional<double> ema_state, bool grad) {
  const auto spec = spec_from(name, alpha, mode);
  const Tensor s0 = matrix_from(scores, "scores");
  std::optional<Tensor> aux0;
  if (log_aux) aux0 = vector_from(*log_aux, "log_aux");
  if (!grad) return result_dict(dispatch(spec, s0, aux0, ema_state));
  ad::Tape tape;
  const Tensor s = tape.leaf(s0);
  std::optional<Tensor> aux;
  if (aux0) aux = tape.leaf(*aux0);
  const auto r = dispatch(spec, s, aux, ema_state);
  py::dict d = result_dict(r);
  const auto g = tape.backward(r.objective);
  d["grad_scores"] = to_array(g.at(s));
  if (aux) d["grad_log_aux"] = to_array(g.at(*aux));
  return d;
}

std::vector<training::EstimatorSpec> specs_from(const std::vector<py::dict>& entries) {
  std::vector<training::EstimatorSpec> out;
  for (const auto& e : entries) {
    out.push_back(spec_from(e["name"].cast<std::string>(), e.contains("alpha") ? e["alpha"].cast<double>() : 0.01,
                            e.contains("mode") ? e["mode"].cast<std::string>() : "mixture"));
  }
  return out;
}

py::object alpha_of(const std::optional<double>& a) { return a ? py::cast(*a) : py::none(); }

py::object from_json(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_mib, m) {
  m.doc() = "Variational mutual-information bounds with analytic toy problems";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("bound", &bound, py::arg("name"), py::arg("scores"), py::arg("log_aux") = py::none(),
        py::arg("alpha") = 0.01, py::arg("mode") = "mixture", py::arg("ema_state") = py::none(),
        py::arg("grad") = false,
        "Evaluate a bound on a K x K matrix with scores[i, j] = f(x_j, y_i). With grad=True the "
        "result also holds the gradient of the training objective.");

  m.def("estimators", [] {
    py::list out;
    for (const auto& e : bounds::estimator_table()) {
      py::dict d;
      d["name"] = std::string(e.name);
      d["summary"] = std::string(e.summary);
      d["uses_critic"] = e.uses_critic;
      d["lower_bound"] = e.lower_bound;
      out.append(d);
    }
    return out;
  });

  m.def("true_mi", [](std::vector<double> rho) { return toy::true_mi(toy::GaussianPairSpec{std::move(rho)}); },
        py::arg("rho"), "MI in nats of the correlated Gaussian pair.");
  m.def("rho_for_mi", &toy::rho_for_mi, py::arg("target_mi"), py::arg("dim"));

  m.def(
      "optimal_sweep",
      [](const std::vector<py::dict>& estimators, std::vector<std::size_t> batch_sizes,
         std::vector<double> mi_levels, std::size_t n_batches, std::size_t dim, std::uint64_t seed,
         std::size_t workers) {
        harness::OptimalSweepSpec spec;
        spec.estimators = specs_from(estimators);
        spec.batch_sizes = std::move(batch_sizes);
        spec.mi_levels = std::move(mi_levels);
        spec.n_batches = n_batches;
        spec.dim = dim;
        spec.seed = seed;
        spec.workers = workers;
        std::vector<harness::SweepRecord> recs;
        {
          py::gil_scoped_release release;
          recs = harness::optimal_sweep(spec);
        }
        py::list out;
        for (const auto& r : recs) {
          py::dict d;
          d["estimator"] = r.estimator;
          d["alpha"] = alpha_of(r.alpha);
          d["mode"] = r.mode;
          d["batch_size"] = r.batch_size;
          d["target_mi"] = r.target_mi;
          d["mean"] = r.mean;
          d["stderr"] = r.stderr_mean;
          d["variance"] = r.variance;
          d["bias"] = r.bias;
          d["mse"] = r.mse;
          d["n_batches"] = r.n_batches;
          out.append(d);
        }
        return out;
      },
      py::arg("estimators"), py::arg("batch_sizes") = std::vector<std::size_t>{16, 64, 256},
      py::arg("mi_levels") = std::vector<double>{2, 4, 6, 8, 10}, py::arg("n_batches") = 5000,
      py::arg("dim") = 20, py::arg("seed") = 0, py::arg("workers") = 1,
      "Bias, variance and MSE under the analytic optimal critic. Each estimator is a dict with "
      "'name' and optional 'alpha' and 'mode'.");

  m.def(
      "gradient_sweep",
      [](const std::vector<py::dict>& estimators, std::vector<std::size_t> batch_sizes,
         std::vector<double> mi_levels, std::size_t reps, std::size_t dim, std::uint64_t seed,
         std::size_t workers) {
        harness::GradientSpec spec;
        spec.estimators = specs_from(estimators);
        spec.batch_sizes = std::move(batch_sizes);
        spec.mi_levels = std::move(mi_levels);
        spec.reps = reps;
        spec.dim = dim;
        spec.seed = seed;
        spec.workers = workers;
        std::vector<harness::GradientRecord> recs;
        {
          py::gil_scoped_release release;
          recs = harness::gradient_sweep(spec);
        }
        py::list out;
        for (const auto& r : recs) {
          py::dict d;
          d["estimator"] = r.estimator;
          d["alpha"] = alpha_of(r.alpha);
          d["mode"] = r.mode;
          d["batch_size"] = r.batch_size;
          d["target_mi"] = r.target_mi;
          d["true_grad"] = r.true_grad;
          d["grad_mse"] = r.grad_mse;
          d["grad_mse_stderr"] = r.grad_mse_stderr;
          d["grad_mean"] = r.grad_mean;
          d["grad_stderr"] = r.grad_stderr;
          d["reps"] = r.reps;
          d["nonfinite"] = r.nonfinite;
          d["skipped"] = r.skipped;
          out.append(d);
        }
        return out;
      },
      py::arg("estimators"), py::arg("batch_sizes") = std::vector<std::size_t>{16, 64, 256},
      py::arg("mi_levels") = std::vector<double>{2, 4, 6, 8, 10}, py::arg("reps") = 1000, py::arg("dim") = 20,
      py::arg("seed") = 0, py::arg("workers") = 1,
      "Gradient of each estimator with respect to rho through the reparameterized sampler.");

  m.def(
      "default_config",
      [](const std::string& experiment) {
        return harness::to_json(harness::default_config(harness::parse_experiment(experiment))).dump(2);
      },
      py::arg("experiment"), "Default configuration of an experiment as a JSON string.");

  m.def(
      "config_hash", [](const std::string& text) { return harness::config_hash(harness::parse_config_text(text)); },
      py::arg("config"));

  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& out_dir, std::size_t workers, bool hex) {
        const auto c = harness::parse_config_text(config);
        harness::RunOptions opt;
        opt.out_dir = out_dir;
        opt.workers = workers;
        opt.hex = hex;
        harness::RunResult r;
        {
          py::gil_scoped_release release;
          r = harness::run_experiment(c, opt);
        }
        nlohmann::json j;
        j["config_hash"] = r.config_hash;
        j["files"] = nlohmann::json::array();
        for (const auto& f : r.files) j["files"].push_back({{"path", f.path}, {"kind", f.kind}, {"rows", f.rows}});
        j["figures"] = nlohmann::json::array();
        for (const auto& f : r.figures) {
          j["figures"].push_back({{"id", f.id}, {"inputs", f.inputs}, {"output", f.output}});
        }
        j["aborts"] = r.aborts;
        j["wall_clock_seconds"] = r.wall_seconds;
        return from_json(j);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("workers") = 1, py::arg("hex") = false,
      "Run an experiment from a JSON config string; writes CSVs and manifest.json to out_dir.");

  m.def(
      "selfcheck",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : harness::run_selfcheck(seed)) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0);
}
