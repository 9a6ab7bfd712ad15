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

#include "mib/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "mib/bounds/registry.hpp"
#include "mib/errors.hpp"
#include "mib/harness/pool.hpp"
#include "mib/rng.hpp"

namespace mib::harness {

using bounds::Estimator;
using training::Dataset;
using training::format_double;

namespace {

bool needs_conditional(Estimator e) {
  return e == Estimator::kInfonceTractable || e == Estimator::kLooUpper || e == Estimator::kReparamNwj;
}

bool learned_baseline_default(Estimator e) {
  return e == Estimator::kTuba || e == Estimator::kInterpolated || e == Estimator::kReparamNwj;
}

std::string file_safe(std::string s) {
  std::string out;
  for (char ch : s) {
    if (ch == '[' || ch == ',') {
      out += '-';
    } else if (ch != ']') {
      out += ch;
    }
  }
  return out;
}

std::string alpha_field(const std::optional<double>& a, bool hex) { return a ? format_double(*a, hex) : ""; }

training::TrainConfig base_train(const ExperimentConfig& c, Dataset d, const EstimatorEntry& e, std::size_t k) {
  training::TrainConfig t;
  t.estimator = e.spec;
  t.dataset = d;
  t.dim = c.dim;
  t.batch_size = k;
  t.steps = c.steps;
  t.adam = c.adam;
  t.smoothing = c.smoothing;
  t.schedule = training::staircase(c.steps, c.mi_levels);
  if (e.baseline) t.baseline = e.baseline->build(c.dim);
  return t;
}

void finalize_jobs(const ExperimentConfig& c, std::vector<TrainJob>& jobs) {
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    jobs[i].train.seed = derive_seed(c.seed, i, 0);
    try {
      jobs[i].train.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("job " + jobs[i].dataset + "/" + jobs[i].estimator + "/" + jobs[i].critic +
                        (jobs[i].point.empty() ? "" : "/" + jobs[i].point) + ": " + e.what());
    }
  }
}

std::string job_id(const TrainJob& j) {
  std::string s = j.dataset + "_" + file_safe(j.estimator) + "_" + j.critic;
  if (!j.point.empty()) s += "_" + j.point;
  s += "_k" + std::to_string(j.train.batch_size);
  return s;
}

class Logger {
 public:
  explicit Logger(std::ostream* out) : out_(out) {}
  void line(const std::string& s) {
    if (out_ == nullptr) return;
    std::lock_guard<std::mutex> lock(mu_);
    *out_ << s << std::endl;
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

struct JobOutcome {
  std::optional<training::Trace> trace;
  std::vector<double> smoothed;
  std::string error;
};

// Runs every job on the pool. With `continue_on_abort`, numeric aborts are
// recorded per job; otherwise the first one is rethrown with the job identity.
std::vector<JobOutcome> run_jobs(const std::vector<TrainJob>& jobs, const RunOptions& opt, const std::string& hash,
                                 bool continue_on_abort) {
  std::vector<JobOutcome> out(jobs.size());
  Logger log(opt.log);
  parallel_for(jobs.size(), opt.workers, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto trace = training::train_estimator(jobs[i].train);
      out[i].smoothed = training::smooth_trace(trace, jobs[i].train.smoothing);
      out[i].trace = std::move(trace);
    } catch (const NumericError& e) {
      const std::string msg = job_id(jobs[i]) + " (config " + hash + "): " + e.what();
      if (!continue_on_abort) throw NumericError(msg);
      out[i].error = msg;
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.line("[" + std::to_string(i + 1) + "/" + std::to_string(jobs.size()) + "] " + job_id(jobs[i]) +
             (out[i].error.empty() ? " ok " : " aborted ") + format_double(std::round(dt * 10) / 10) + "s");
  });
  return out;
}

std::ofstream open_csv(const RunOptions& opt, const std::string& name) {
  std::ofstream f(opt.out_dir / name);
  if (!f) throw ConfigError("cannot write " + (opt.out_dir / name).string());
  f.imbue(std::locale::classic());
  return f;
}

std::string stem(const ExperimentConfig& c, const std::string& hash) {
  return std::string(experiment_name(c.experiment)) + "_" + hash.substr(0, 8);
}

}  // namespace

std::vector<double> segment_ends(const training::Trace& trace, std::span<const double> smoothed,
                                 std::span<const training::SchedulePoint> schedule) {
  std::vector<double> out;
  const std::size_t n = trace.records.size();
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const std::size_t begin = schedule[s].step_start;
    const std::size_t end = s + 1 < schedule.size() ? schedule[s + 1].step_start : n;
    if (begin >= end || end > n) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(smoothed[end - 1]);
    }
  }
  return out;
}

std::vector<TrainJob> fig2_jobs(const ExperimentConfig& c) {
  c.validate();
  std::vector<TrainJob> jobs;
  for (Dataset d : c.datasets) {
    for (const auto& e : expand_estimators(c)) {
      std::vector<CriticConfig> critics_for;
      if (e.critic) {
        critics_for = {*e.critic};
      } else if (needs_conditional(e.spec.kind)) {
        CriticConfig k;
        k.kind = "known_conditional";
        critics_for = {k};
      } else {
        critics_for = c.critics;
      }
      for (std::size_t k : c.batch_sizes) {
        for (const auto& cc : critics_for) {
          TrainJob j;
          j.dataset = std::string(dataset_name(d));
          j.estimator = estimator_label(e.spec);
          j.critic = cc.label();
          j.train = base_train(c, d, e, k);
          j.train.critic = cc.build(c.dim);
          jobs.push_back(std::move(j));
        }
      }
    }
  }
  finalize_jobs(c, jobs);
  return jobs;
}

std::vector<TrainJob> table3_jobs(const ExperimentConfig& c) {
  c.validate();
  std::vector<TrainJob> jobs;
  const auto& g = c.grid;
  for (Dataset d : c.datasets) {
    for (const auto& e : expand_estimators(c)) {
      const bool conditional = needs_conditional(e.spec.kind);
      for (std::size_t ck = 0; ck < g.critic_kinds.size(); ++ck) {
        // The critic axis is moot when the critic is fixed.
        if ((conditional || e.critic) && ck > 0) break;
        for (std::size_t layers : g.layers) {
          for (std::size_t width : g.widths) {
            for (double lr : g.learning_rates) {
              for (std::size_t k : g.batch_sizes) {
                const std::vector<std::size_t> hidden(layers, width);
                CriticConfig cc;
                if (e.critic) {
                  cc = *e.critic;
                } else if (conditional) {
                  cc.kind = "known_conditional";
                } else {
                  cc.kind = g.critic_kinds[ck];
                  cc.hidden_sizes = hidden;
                }
                TrainJob j;
                j.dataset = std::string(dataset_name(d));
                j.estimator = estimator_label(e.spec);
                j.critic = cc.label();
                j.point = cc.kind + "-" + std::to_string(layers) + "x" + std::to_string(width) + "-lr" +
                          format_double(lr);
                j.train = base_train(c, d, e, k);
                j.train.adam.learning_rate = lr;
                j.train.critic = cc.build(c.dim);
                if (!e.baseline && learned_baseline_default(e.spec.kind)) {
                  BaselineConfig b;
                  b.kind = "learned";
                  b.hidden_sizes = hidden;
                  j.train.baseline = b.build(c.dim);
                }
                jobs.push_back(std::move(j));
              }
            }
          }
        }
      }
    }
  }
  finalize_jobs(c, jobs);
  return jobs;
}

OptimalSweepSpec sweep_spec(const ExperimentConfig& c, std::size_t workers) {
  c.validate();
  OptimalSweepSpec s;
  for (const auto& e : expand_estimators(c)) s.estimators.push_back(e.spec);
  s.batch_sizes = c.batch_sizes;
  s.mi_levels = c.mi_levels;
  s.n_batches = c.reps;
  s.dim = c.dim;
  s.seed = c.seed;
  s.workers = workers;
  s.validate();
  return s;
}

GradientSpec gradient_spec(const ExperimentConfig& c, std::size_t workers) {
  c.validate();
  GradientSpec s;
  for (const auto& e : expand_estimators(c)) s.estimators.push_back(e.spec);
  s.batch_sizes = c.batch_sizes;
  s.mi_levels = c.mi_levels;
  s.reps = c.reps;
  s.dim = c.dim;
  s.seed = c.seed;
  s.workers = workers;
  s.validate();
  return s;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, std::uint64_t seed,
                     const std::string& hash, bool hex) {
  out << "estimator,alpha,mode,batch_size,target_mi,mean,stderr,variance,bias,mse,n_batches,seed,config_hash\n";
  for (const auto& r : records) {
    out << r.estimator << ',' << alpha_field(r.alpha, hex) << ',' << r.mode << ',' << r.batch_size << ','
        << format_double(r.target_mi, hex) << ',' << format_double(r.mean, hex) << ','
        << format_double(r.stderr_mean, hex) << ',' << format_double(r.variance, hex) << ','
        << format_double(r.bias, hex) << ',' << format_double(r.mse, hex) << ',' << r.n_batches << ',' << seed
        << ',' << hash << '\n';
  }
}

void write_gradient_csv(std::ostream& out, const std::vector<GradientRecord>& records, std::uint64_t seed,
                        const std::string& hash, bool hex) {
  out << "estimator,alpha,mode,batch_size,target_mi,true_grad,grad_mse,grad_mse_stderr,grad_mean,grad_max_abs_z,"
         "reps,nonfinite,skipped,seed,config_hash\n";
  for (const auto& r : records) {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double max_z = std::numeric_limits<double>::quiet_NaN();
    if (!r.skipped) {
      mean = 0.0;
      max_z = 0.0;
      for (std::size_t k = 0; k < r.grad_mean.size(); ++k) {
        mean += r.grad_mean[k];
        const double dev = std::abs(r.grad_mean[k] - r.true_grad);
        const double z = r.grad_stderr[k] > 0.0 ? dev / r.grad_stderr[k]
                                                : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        max_z = std::max(max_z, z);
      }
      mean /= static_cast<double>(r.grad_mean.size());
    }
    out << r.estimator << ',' << alpha_field(r.alpha, hex) << ',' << r.mode << ',' << r.batch_size << ','
        << format_double(r.target_mi, hex) << ',' << format_double(r.true_grad, hex) << ','
        << format_double(r.grad_mse, hex) << ',' << format_double(r.grad_mse_stderr, hex) << ','
        << format_double(mean, hex) << ',' << format_double(max_z, hex) << ',' << r.reps << ',' << r.nonfinite
        << ',' << (r.skipped ? 1 : 0) << ',' << seed << ',' << hash << '\n';
  }
}

void write_best_alpha_csv(std::ostream& out, const std::vector<BestAlpha>& best, std::uint64_t seed,
                          const std::string& hash, bool hex) {
  out << "batch_size,target_mi,best_alpha,grad_mse,seed,config_hash\n";
  for (const auto& b : best) {
    out << b.batch_size << ',' << format_double(b.target_mi, hex) << ',' << format_double(b.alpha, hex) << ','
        << format_double(b.grad_mse, hex) << ',' << seed << ',' << hash << '\n';
  }
}

RunResult run_fig2(const ExperimentConfig& c, const RunOptions& opt) {
  const std::string hash = config_hash(c);
  const auto jobs = fig2_jobs(c);
  const auto outcomes = run_jobs(jobs, opt, hash, false);
  RunResult res;
  res.config_hash = hash;
  std::map<std::string, FigureEntry> per_dataset;
  const std::string summary_name = stem(c, hash) + "_summary.csv";
  auto summary = open_csv(opt, summary_name);
  summary << "dataset,estimator,alpha,mode,critic,batch_size,segment,target_mi,smoothed,seed,config_hash\n";
  std::size_t summary_rows = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto trace = *outcomes[i].trace;
    trace.seed = c.seed;
    trace.config_hash = hash;
    const std::string name = stem(c, hash) + "_" + job_id(jobs[i]) + ".csv";
    auto f = open_csv(opt, name);
    training::write_trace_csv(f, trace, outcomes[i].smoothed, opt.hex);
    res.files.push_back({name, "trace", trace.records.size()});
    auto& fig = per_dataset[jobs[i].dataset];
    fig.id = "fig2";
    fig.output = stem(c, hash) + "_fig2_" + jobs[i].dataset;
    fig.inputs.push_back(name);

    const auto schedule = jobs[i].train.effective_schedule();
    const auto ends = segment_ends(trace, outcomes[i].smoothed, schedule);
    const auto& spec = jobs[i].train.estimator;
    const bool interp = spec.kind == Estimator::kInterpolated;
    for (std::size_t s = 0; s < ends.size(); ++s) {
      summary << jobs[i].dataset << ',' << bounds::estimator_info(spec.kind).name << ','
              << (interp ? format_double(spec.alpha, opt.hex) : "") << ','
              << (interp ? std::string(bounds::mode_name(spec.mode)) : "") << ',' << jobs[i].critic << ','
              << jobs[i].train.batch_size << ',' << s << ',' << format_double(schedule[s].target_mi, opt.hex) << ','
              << format_double(ends[s], opt.hex) << ',' << c.seed << ',' << hash << '\n';
      ++summary_rows;
    }
  }
  res.files.push_back({summary_name, "fig2_summary", summary_rows});
  for (auto& [d, fig] : per_dataset) res.figures.push_back(std::move(fig));
  return res;
}

RunResult run_optimal_sweep(const ExperimentConfig& c, const RunOptions& opt) {
  const std::string hash = config_hash(c);
  const auto records = optimal_sweep(sweep_spec(c, opt.workers));
  const std::string name = stem(c, hash) + ".csv";
  auto f = open_csv(opt, name);
  write_sweep_csv(f, records, c.seed, hash, opt.hex);
  RunResult res;
  res.config_hash = hash;
  res.files.push_back({name, "sweep", records.size()});
  res.figures.push_back({"fig3", {name}, stem(c, hash) + "_fig3"});
  return res;
}

RunResult run_interp_compare(const ExperimentConfig& c, const RunOptions& opt) {
  const std::string hash = config_hash(c);
  const auto records = optimal_sweep(sweep_spec(c, opt.workers));
  const std::string name = stem(c, hash) + ".csv";
  auto f = open_csv(opt, name);
  write_sweep_csv(f, records, c.seed, hash, opt.hex);
  RunResult res;
  res.config_hash = hash;
  res.files.push_back({name, "sweep", records.size()});
  res.figures.push_back({"fig7", {name}, stem(c, hash) + "_fig7"});
  return res;
}

RunResult run_gradient(const ExperimentConfig& c, const RunOptions& opt) {
  const std::string hash = config_hash(c);
  const auto records = gradient_sweep(gradient_spec(c, opt.workers));
  const auto best = best_alpha(records);
  RunResult res;
  res.config_hash = hash;
  const std::string name = stem(c, hash) + ".csv";
  const std::string best_name = stem(c, hash) + "_best_alpha.csv";
  {
    auto f = open_csv(opt, name);
    write_gradient_csv(f, records, c.seed, hash, opt.hex);
    auto b = open_csv(opt, best_name);
    write_best_alpha_csv(b, best, c.seed, hash, opt.hex);
  }
  res.files.push_back({name, "gradient", records.size()});
  res.files.push_back({best_name, "best_alpha", best.size()});
  res.figures.push_back({"fig4", {name, best_name}, stem(c, hash) + "_fig4"});
  return res;
}

RunResult run_table3(const ExperimentConfig& c, const RunOptions& opt) {
  const std::string hash = config_hash(c);
  const auto jobs = table3_jobs(c);
  const auto outcomes = run_jobs(jobs, opt, hash, true);
  RunResult res;
  res.config_hash = hash;

  struct Best {
    double value = std::numeric_limits<double>::quiet_NaN();
    std::string point;
    std::size_t points = 0;
    std::size_t ok = 0;
    const TrainJob* job = nullptr;
  };
  // (dataset, estimator label, segment) in first-seen order.
  std::vector<std::tuple<std::string, std::string, std::size_t>> order;
  std::map<std::tuple<std::string, std::string, std::size_t>, Best> best;

  const std::string points_name = stem(c, hash) + "_points.csv";
  auto pf = open_csv(opt, points_name);
  pf << "dataset,estimator,alpha,mode,critic,point,batch_size,learning_rate,segment,target_mi,smoothed,status,seed,"
        "config_hash\n";
  std::size_t point_rows = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& j = jobs[i];
    const auto schedule = j.train.effective_schedule();
    std::vector<double> ends(schedule.size(), std::numeric_limits<double>::quiet_NaN());
    const bool ok = outcomes[i].error.empty();
    if (ok) {
      ends = segment_ends(*outcomes[i].trace, outcomes[i].smoothed, schedule);
    } else {
      res.aborts.push_back(outcomes[i].error);
    }
    const bool interp = j.train.estimator.kind == Estimator::kInterpolated;
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      pf << j.dataset << ',' << bounds::estimator_info(j.train.estimator.kind).name << ','
         << (interp ? format_double(j.train.estimator.alpha, opt.hex) : "") << ','
         << (interp ? std::string(bounds::mode_name(j.train.estimator.mode)) : "") << ',' << j.critic << ','
         << j.point << ',' << j.train.batch_size << ',' << format_double(j.train.adam.learning_rate, opt.hex) << ','
         << s << ',' << format_double(schedule[s].target_mi, opt.hex) << ',' << format_double(ends[s], opt.hex)
         << ',' << (ok ? "ok" : "aborted") << ',' << c.seed << ',' << hash << '\n';
      ++point_rows;
      const auto key = std::make_tuple(j.dataset, j.estimator, s);
      auto [it, fresh] = best.try_emplace(key);
      if (fresh) order.push_back(key);
      Best& b = it->second;
      b.job = &j;
      ++b.points;
      if (!ok || std::isnan(ends[s])) continue;
      ++b.ok;
      const double mi = schedule[s].target_mi;
      if (std::isnan(b.value) || std::abs(ends[s] - mi) < std::abs(b.value - mi)) {
        b.value = ends[s];
        b.point = j.point + "-k" + std::to_string(j.train.batch_size);
      }
    }
  }
  res.files.push_back({points_name, "table3_points", point_rows});

  const std::string name = stem(c, hash) + ".csv";
  auto f = open_csv(opt, name);
  f << "dataset,estimator,alpha,mode,segment,target_mi,best_smoothed,best_point,n_points,n_ok,seed,config_hash\n";
  for (const auto& key : order) {
    const Best& b = best.at(key);
    const auto& spec = b.job->train.estimator;
    const bool interp = spec.kind == Estimator::kInterpolated;
    const std::size_t s = std::get<2>(key);
    f << std::get<0>(key) << ',' << bounds::estimator_info(spec.kind).name << ','
      << (interp ? format_double(spec.alpha, opt.hex) : "") << ','
      << (interp ? std::string(bounds::mode_name(spec.mode)) : "") << ',' << s << ','
      << format_double(b.job->train.effective_schedule()[s].target_mi, opt.hex) << ','
      << format_double(b.value, opt.hex) << ',' << b.point << ',' << b.points << ',' << b.ok << ',' << c.seed << ','
      << hash << '\n';
  }
  res.files.push_back({name, "table3", order.size()});
  return res;
}

RunResult run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
  c.validate();
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + opt.out_dir.string() + ": " + ec.message());
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  switch (c.experiment) {
    case Experiment::kFig2: res = run_fig2(c, opt); break;
    case Experiment::kOptimalSweep: res = run_optimal_sweep(c, opt); break;
    case Experiment::kGradient: res = run_gradient(c, opt); break;
    case Experiment::kInterpCompare: res = run_interp_compare(c, opt); break;
    case Experiment::kTable3: res = run_table3(c, opt); break;
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : res.files) files.push_back({{"path", f.path}, {"kind", f.kind}, {"rows", f.rows}});
  nlohmann::json figures = nlohmann::json::array();
  for (const auto& f : res.figures) figures.push_back({{"id", f.id}, {"inputs", f.inputs}, {"output", f.output}});
  const nlohmann::json manifest{{"experiment", std::string(experiment_name(c.experiment))},
                                {"config_hash", res.config_hash},
                                {"seed", c.seed},
                                {"workers", opt.workers},
                                {"float_format", opt.hex ? "hex" : "decimal"},
                                {"config", to_json(c)},
                                {"files", files},
                                {"figures", figures},
                                {"aborts", res.aborts},
                                {"wall_clock_seconds", res.wall_seconds}};
  std::ofstream m(opt.out_dir / "manifest.json");
  if (!m) throw ConfigError("cannot write manifest in " + opt.out_dir.string());
  m << manifest.dump(2) << '\n';
  return res;
}

}  // namespace mib::harness
