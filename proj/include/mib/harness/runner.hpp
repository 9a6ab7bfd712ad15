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
#include <filesystem>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mib/harness/config.hpp"
#include "mib/harness/experiments.hpp"
#include "mib/training/training.hpp"

namespace mib::harness {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::size_t workers = 1;
  bool hex = false;               // floats as exact hexadecimal in every CSV
  std::ostream* log = nullptr;    // progress lines; silent when null
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string kind;  // trace | fig2_summary | sweep | gradient | best_alpha | table3_points | table3
  std::size_t rows = 0;
};

struct FigureEntry {
  std::string id;  // fig2 | fig3 | fig4 | fig7
  std::vector<std::string> inputs;
  std::string output;  // stem; the renderer appends the format extension
};

struct RunResult {
  std::string config_hash;
  std::vector<OutputFile> files;
  std::vector<FigureEntry> figures;
  std::vector<std::string> aborts;  // table3 grid points that hit a numeric abort
  double wall_seconds = 0.0;
};

// One trainer of a fig2 or table3 run.
struct TrainJob {
  std::string dataset;
  std::string estimator;  // estimator_label of the EstimatorSpec
  std::string critic;
  std::string point;      // table3 grid point, e.g. "joint-2x256-lr0.0005-k64"; empty for fig2
  training::TrainConfig train;
};

// Jobs in run order; seeds are derived from (config seed, job index).
// Throws ConfigError if any job is invalid, before anything runs.
std::vector<TrainJob> fig2_jobs(const ExperimentConfig& c);
std::vector<TrainJob> table3_jobs(const ExperimentConfig& c);

OptimalSweepSpec sweep_spec(const ExperimentConfig& c, std::size_t workers);
GradientSpec gradient_spec(const ExperimentConfig& c, std::size_t workers);

// Final smoothed estimate of each schedule segment.
std::vector<double> segment_ends(const training::Trace& trace, std::span<const double> smoothed,
                                 std::span<const training::SchedulePoint> schedule);

RunResult run_fig2(const ExperimentConfig& c, const RunOptions& opt);
RunResult run_optimal_sweep(const ExperimentConfig& c, const RunOptions& opt);
RunResult run_gradient(const ExperimentConfig& c, const RunOptions& opt);
RunResult run_interp_compare(const ExperimentConfig& c, const RunOptions& opt);
RunResult run_table3(const ExperimentConfig& c, const RunOptions& opt);

// Dispatches on c.experiment, creates the output directory and writes
// manifest.json next to the CSVs.
RunResult run_experiment(const ExperimentConfig& c, const RunOptions& opt);

// CSV writers shared by the runners and the bindings.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, std::uint64_t seed,
                     const std::string& hash, bool hex = false);
void write_gradient_csv(std::ostream& out, const std::vector<GradientRecord>& records, std::uint64_t seed,
                        const std::string& hash, bool hex = false);
void write_best_alpha_csv(std::ostream& out, const std::vector<BestAlpha>& best, std::uint64_t seed,
                          const std::string& hash, bool hex = false);

}  // namespace mib::harness
