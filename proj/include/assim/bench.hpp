// Copyright 2026 The assim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ASSIM_BENCH_HPP_
#define ASSIM_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "assim/bias.hpp"
#include "assim/config.hpp"
#include "assim/manifold.hpp"
#include "assim/obs.hpp"

namespace assim {

enum class Experiment { kExample1, kExample2, kExample3Analog };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Where the held-out truths come from.
enum class TruthSource { kHeldOut, kTraining };

struct ExperimentConfig {
  Experiment experiment = Experiment::kExample1;
  std::uint64_t master_seed = 20240917;
  int threads = 0;  // 0: hardware concurrency

  double grid_a = 0.0;
  double grid_b = 0.0;
  int grid_points = 0;

  SinusoidSpec sinusoid;
  MultiscaleSpec multiscale;
  PowerLawSpec powerlaw;

  int snapshot_count = 128;
  int validation_count = 64;
  TruthSource truth_source = TruthSource::kHeldOut;

  std::vector<int> n_values;
  int decay_modes = 30;
  std::vector<int> m_values;
  SensorKind sensor_kind = SensorKind::kBoxAverage;
  double sensor_width_factor = 1.0;

  NoiseKind noise_kind = NoiseKind::kLinearBiasGaussian;
  std::vector<double> alpha_values;
  std::vector<double> sigma_values;
  int mc_samples = 1000;
  EmpiricalTable table;

  bool boxed = false;
  double box_margin = 1.1;

  double spbdw_rel_tol = 0.05;
  int spbdw_max_iters = 5;
  int dictionary_stride = 4;
  bool deflate = true;
  bool spbdw_bias_correction = false;
  bool snap_jump = false;

  double truth_peak_velocity = 50.0;
  double truth_flow_index = 1.0;

  Grid grid() const { return Grid(grid_a, grid_b, grid_points); }
  NoiseModel noise_model(double alpha, double sigma) const;
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

ExperimentConfig default_config(Experiment e);

struct ConfigKey {
  std::string key;
  std::string type;
  std::string doc;
};
/// Every key accepted by experiment_config.
const std::vector<ConfigKey>& config_schema();

/// Resolves a parsed file (plus overrides) onto the defaults of its
/// `experiment`. Unknown keys and malformed values raise ConfigError with the
/// offending line.
ExperimentConfig experiment_config(const Config& cfg);

/// Fully resolved settings as (key, value) text in schema order.
std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& cfg);

struct ResultRow {
  int case_id = 0;
  std::string method;  // pbdw | bpbdw | spbdw
  int n = 0;
  int m = 0;
  double alpha = 0.0;
  double sigma = 0.0;
  double error_e = 0.0;
  double beta = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
};

struct AggregateRow {
  std::string method;
  int n = 0;
  int m = 0;
  double alpha = 0.0;
  double sigma = 0.0;
  int count = 0;
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single case
};

/// Groups rows by (method, n, m, alpha, sigma) in first-appearance order and
/// reduces error_e in row order.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

struct PodDecayRow {
  std::string manifold;
  int n = 0;
  double singular_value = 0.0;
  double cumulative_energy = 0.0;
  double approximation_error = 0.0;  // max over the validation truths
};

struct JumpDiagnostic {
  int case_id = 0;
  int n = 0;
  int m = 0;
  double true_jump = 0.0;
  double estimated_jump = 0.0;  // NaN when no smoother was extracted
  double jump_error_cells = 0.0;
  int num_smoothers = 0;
  double tv_truth = 0.0;
  double tv_spbdw = 0.0;
  double tv_pbdw = 0.0;
};

struct EnergyDiagnostic {
  int case_id = 0;
  std::string method;
  int n = 0;
  int m = 0;
  double mode1_energy_fraction = 0.0;  // <u*, v_1>^2 / ||u*||^2
};

struct RunResult {
  std::vector<ResultRow> rows;  // sorted by case_id, then sweep cell, then method
  std::vector<AggregateRow> aggregates;
  std::vector<PodDecayRow> pod_decay;
  std::vector<JumpDiagnostic> jumps;
  std::vector<EnergyDiagnostic> energies;
};

RunResult run_example1(const ExperimentConfig& cfg);
RunResult run_example2(const ExperimentConfig& cfg);
RunResult run_example3_analog(const ExperimentConfig& cfg);
RunResult run_experiment(const ExperimentConfig& cfg);

/// POD spectrum and approximation errors only.
std::vector<PodDecayRow> pod_decay(const ExperimentConfig& cfg);

/// Total variation sum_k |u_{k+1} - u_k| of the nodal values.
double total_variation(const GridFunction& u);
/// ||u - truth|| / ||truth||.
double relative_error(const GridFunction& u, const GridFunction& truth);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_timings_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_pod_decay_csv(std::ostream& out, const std::vector<PodDecayRow>& rows);
/// Error table in percent: method,mean,max,min,stddev.
void write_error_table_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_jump_diagnostics_csv(std::ostream& out, const std::vector<JumpDiagnostic>& rows);
void write_energy_diagnostics_csv(std::ostream& out, const std::vector<EnergyDiagnostic>& rows);
void write_run_json(std::ostream& out, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs);

/// Writes every output of the run into `dir` (created if missing) and returns
/// the file names written.
std::vector<std::string> write_outputs(const std::filesystem::path& dir,
                                       const ExperimentConfig& cfg, const RunResult& result);

}  // namespace assim

#endif  // ASSIM_BENCH_HPP_
