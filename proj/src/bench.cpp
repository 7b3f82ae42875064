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

#include "assim/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "assim/error.hpp"
#include "assim/multiscale.hpp"
#include "assim/rng.hpp"
#include "assim/rom.hpp"
#include "assim/solver.hpp"
#include "assim/version.hpp"
#include "json.hpp"

namespace assim {
namespace {

// Seed stream labels.
enum Stage : std::uint64_t {
  kTrainingStage = 1,
  kValidationStage = 2,
  kNoiseStage = 3,
  kExpectationStage = 4,
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string fmt(const Range& r) { return fmt(r.lo) + ", " + fmt(r.hi); }

// Runs body(i) for i in [0, count) on a small pool; the first exception wins.
template <class F>
void parallel_for(int count, int threads, F&& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, count));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ResultRow> flatten(std::vector<std::vector<ResultRow>>& per_case) {
  std::vector<ResultRow> rows;
  for (auto& block : per_case) {
    rows.insert(rows.end(), std::make_move_iterator(block.begin()),
                std::make_move_iterator(block.end()));
  }
  return rows;
}

int max_of(const std::vector<int>& v) { return *std::max_element(v.begin(), v.end()); }

SnapshotSet first(const SnapshotSet& set, int count) {
  SnapshotSet out{set.grid, {}, {}, set.label, set.seed};
  for (int k = 0; k < count; ++k) {
    out.snapshots.push_back(set.snapshots[k]);
    out.parameters.push_back(set.parameters[k]);
  }
  return out;
}

std::vector<PodDecayRow> decay_rows(const std::string& manifold, const ReducedBasis& basis,
                                    const SnapshotSet& validation, int modes) {
  std::vector<PodDecayRow> rows;
  const Eigen::VectorXd& s = basis.singular_values;
  const double total = s.squaredNorm();
  double running = 0.0;
  modes = std::min(modes, basis.dimension());
  for (int n = 1; n <= modes; ++n) {
    running += s[n - 1] * s[n - 1];
    rows.push_back({manifold, n, s[n - 1], total > 0 ? running / total : 1.0,
                    approximation_error(validation, basis.subspace.leading(n))});
  }
  return rows;
}

int decay_modes(const ExperimentConfig& cfg) {
  return std::min({cfg.decay_modes, cfg.snapshot_count, cfg.grid_points});
}

ObservationSpacePtr sensors_for(const ExperimentConfig& cfg, const Grid& grid, int m) {
  return build_observation_space(
      SensorArray::equidistant(grid, m, cfg.sensor_kind, cfg.sensor_width_factor), grid);
}

void require_experiment(const ExperimentConfig& cfg, Experiment e) {
  if (cfg.experiment != e) {
    throw ConfigError("configuration is for " + to_string(cfg.experiment) + ", not " +
                      to_string(e));
  }
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, Stage stage, int case_id, int n, int m,
                        std::size_t ai, std::size_t si) {
  return derive_seed(cfg.master_seed, {stage, static_cast<std::uint64_t>(case_id),
                                       static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(m), ai, si});
}

// Example 1 and the Example 3 analog share the PBDW / bPBDW sweep.
struct SweepCell {
  int n = 0;
  int m = 0;
  const PbdwSolver* solver = nullptr;
  const CoefficientBox* box = nullptr;
};

std::vector<ResultRow> run_two_methods(const ExperimentConfig& cfg, int case_id,
                                       const GridFunction& truth,
                                       const std::vector<SweepCell>& cells,
                                       std::vector<EnergyDiagnostic>* energies) {
  std::vector<ResultRow> rows;
  for (const SweepCell& cell : cells) {
    for (std::size_t ai = 0; ai < cfg.alpha_values.size(); ++ai) {
      for (std::size_t si = 0; si < cfg.sigma_values.size(); ++si) {
        const double alpha = cfg.alpha_values[ai];
        const double sigma = cfg.sigma_values[si];
        const NoiseModel model = cfg.noise_model(alpha, sigma);
        const std::uint64_t seed = cell_seed(cfg, kNoiseStage, case_id, cell.n, cell.m, ai, si);
        const std::uint64_t mc_seed =
            cell_seed(cfg, kExpectationStage, case_id, cell.n, cell.m, ai, si);
        const PbdwSolver& solver = *cell.solver;
        const Measurement omega = apply_noise(truth, solver.space(), model, seed);

        auto t0 = Clock::now();
        Reconstruction plain = cell.box ? solver.solve_boxed(omega, *cell.box) : solver.solve(omega);
        const double plain_ms = elapsed_ms(t0);
        t0 = Clock::now();
        BiasCorrectedReconstruction corrected =
            bpbdw_reconstruct(solver, omega, model, mc_seed, cell.box);
        const double corrected_ms = elapsed_ms(t0);

        rows.push_back({case_id, "pbdw", cell.n, cell.m, alpha, sigma,
                        relative_error(plain.state, truth), solver.beta(), plain_ms, seed});
        rows.push_back({case_id, "bpbdw", cell.n, cell.m, alpha, sigma,
                        relative_error(corrected.corrected.state, truth), solver.beta(),
                        corrected_ms, seed});
        if (energies != nullptr) {
          const GridFunction mode1 = solver.background().element(0);
          auto fraction = [&](const GridFunction& u) {
            const double c = inner_product(u, mode1);
            const double e = inner_product(u, u);
            return e > 0 ? c * c / e : 0.0;
          };
          energies->push_back({case_id, "pbdw", cell.n, cell.m, fraction(plain.state)});
          energies->push_back(
              {case_id, "bpbdw", cell.n, cell.m, fraction(corrected.corrected.state)});
        }
      }
    }
  }
  return rows;
}

double nearest_dictionary_node(const Grid& grid, const Range& range, int stride, double x) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < grid.num_points(); k += stride) {
    const double node = grid.node(k);
    if (node < range.lo || node > range.hi) continue;
    if (std::isnan(best) || std::abs(node - x) < std::abs(best - x)) best = node;
  }
  return best;
}

// Moves every truth jump onto the nearest dictionary location.
void snap_jumps(MultiscaleSnapshots& set, const ExperimentConfig& cfg) {
  const Grid& grid = set.full.grid;
  for (std::size_t k = 0; k < set.full.size(); ++k) {
    ParameterRecord& rec = set.full.parameters[k];
    const double height = parameter(rec, "jump_height");
    const double snapped = nearest_dictionary_node(grid, cfg.multiscale.jump_location,
                                                   cfg.dictionary_stride,
                                                   parameter(rec, "jump_location"));
    if (std::isnan(snapped)) throw ConfigError("no dictionary node inside the jump range");
    for (auto* r : {&set.fast.parameters[k], &set.slow.parameters[k], &rec}) {
      for (auto& [name, value] : *r) {
        if (name == "jump_location") value = snapped;
      }
    }
    set.slow.snapshots[k] = height * heaviside(grid, snapped);
    set.full.snapshots[k] = set.fast.snapshots[k] + set.slow.snapshots[k];
  }
}

MultiscaleSnapshots multiscale_truths(const ExperimentConfig& cfg, const Grid& grid,
                                      const MultiscaleSnapshots& training) {
  MultiscaleSnapshots truths =
      cfg.truth_source == TruthSource::kTraining
          ? MultiscaleSnapshots{first(training.fast, cfg.validation_count),
                                first(training.slow, cfg.validation_count),
                                first(training.full, cfg.validation_count)}
          : sample_multiscale(cfg.multiscale, grid, cfg.validation_count,
                              derive_seed(cfg.master_seed, {kValidationStage}));
  if (cfg.snap_jump) snap_jumps(truths, cfg);
  return truths;
}

struct ValidationIssue {
  std::string key;
  std::string message;
};

void check(bool ok, const std::string& key, const std::string& message,
           std::vector<ValidationIssue>& issues) {
  if (!ok) issues.push_back({key, message});
}

std::vector<ValidationIssue> issues_of(const ExperimentConfig& c) {
  std::vector<ValidationIssue> out;
  check(c.grid_points >= 3, "grid.points", "needs at least 3 nodes", out);
  check(c.grid_a < c.grid_b, "grid.b", "grid.b must exceed grid.a", out);
  check(c.threads >= 0, "threads", "must be >= 0", out);
  check(c.snapshot_count >= 1, "snapshots.count", "must be >= 1", out);
  check(c.validation_count >= 1, "validation.count", "must be >= 1", out);
  if (c.truth_source == TruthSource::kTraining) {
    check(c.validation_count <= c.snapshot_count, "validation.count",
          "cannot exceed snapshots.count when validation.source = training", out);
  }
  check(!c.n_values.empty(), "rom.n", "sweep is empty", out);
  for (int n : c.n_values) {
    check(n >= 1 && n <= c.snapshot_count && n <= c.grid_points, "rom.n",
          "each n must lie in [1, min(snapshots.count, grid.points)]", out);
  }
  check(c.decay_modes >= 1, "rom.decay_modes", "must be >= 1", out);
  check(!c.m_values.empty(), "sensors.m", "sweep is empty", out);
  for (int m : c.m_values) check(m >= 1, "sensors.m", "each m must be >= 1", out);
  check(c.sensor_width_factor > 0, "sensors.width_factor", "must be positive", out);
  check(!c.alpha_values.empty(), "noise.alpha", "sweep is empty", out);
  check(!c.sigma_values.empty(), "noise.sigma", "sweep is empty", out);
  for (double s : c.sigma_values) check(s >= 0, "noise.sigma", "each sigma must be >= 0", out);
  check(c.mc_samples >= 1, "noise.mc_samples", "must be >= 1", out);
  if (c.noise_kind == NoiseKind::kEmpiricalTable) {
    try {
      c.table.validate();
    } catch (const std::exception& e) {
      out.push_back({"noise.table_edges", e.what()});
    }
  }
  check(c.box_margin >= 1.0, "solver.box_margin", "must be >= 1", out);
  check(c.spbdw_rel_tol > 0 && c.spbdw_rel_tol <= 1, "spbdw.rel_tol", "must lie in (0, 1]", out);
  check(c.spbdw_max_iters >= 1, "spbdw.max_iters", "must be >= 1", out);
  check(c.dictionary_stride >= 1, "spbdw.dictionary_stride", "must be >= 1", out);
  if (!out.empty() || c.grid_points < 3) return out;
  try {
    switch (c.experiment) {
      case Experiment::kExample1: c.sinusoid.validate(); break;
      case Experiment::kExample2: c.multiscale.validate(c.grid()); break;
      case Experiment::kExample3Analog:
        c.powerlaw.validate();
        check(c.grid_a == -c.powerlaw.radius && c.grid_b == c.powerlaw.radius, "grid.a",
              "the power-law grid must be [-manifold.radius, manifold.radius]", out);
        break;
    }
  } catch (const std::exception& e) {
    out.push_back({"manifold", e.what()});
  }
  return out;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kExample1: return "example1";
    case Experiment::kExample2: return "example2";
    case Experiment::kExample3Analog: return "example3_analog";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  if (name == "example1") return Experiment::kExample1;
  if (name == "example2") return Experiment::kExample2;
  if (name == "example3_analog") return Experiment::kExample3Analog;
  throw std::invalid_argument("unknown experiment '" + name +
                              "' (expected example1, example2 or example3_analog)");
}

NoiseModel ExperimentConfig::noise_model(double alpha, double sigma) const {
  NoiseModel model;
  model.kind = noise_kind;
  model.alpha = alpha;
  model.sigma = sigma;
  model.mc_samples = mc_samples;
  model.table = table;
  return model;
}

void ExperimentConfig::validate() const {
  const auto issues = issues_of(*this);
  if (!issues.empty()) throw ConfigError(issues.front().key + ": " + issues.front().message);
}

ExperimentConfig default_config(Experiment e) {
  constexpr double pi = std::numbers::pi;
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::kExample1:
      c.grid_a = 0.0;
      c.grid_b = 2.0 * pi;
      c.grid_points = 512;
      c.snapshot_count = 128;
      c.validation_count = 64;
      for (int n = 1; n <= 15; ++n) c.n_values.push_back(n);
      c.m_values = {25};
      c.alpha_values = {0.1};
      c.sigma_values = {0.325};  // A_gt / 100 with A_gt = 32.5
      c.decay_modes = 30;
      break;
    case Experiment::kExample2:
      c.grid_a = 0.0;
      c.grid_b = 2.0 * pi;
      c.grid_points = 512;
      c.snapshot_count = 128;
      c.validation_count = 20;
      c.n_values = {20};
      c.m_values = {40};
      c.alpha_values = {0.0};
      c.sigma_values = {0.0};
      c.decay_modes = 40;
      break;
    case Experiment::kExample3Analog:
      c.grid_a = -0.5;
      c.grid_b = 0.5;
      c.grid_points = 256;
      c.snapshot_count = 128;
      c.validation_count = 40;
      c.n_values = {5};
      c.m_values = {32};
      c.alpha_values = {0.15};
      c.sigma_values = {2.0};
      c.decay_modes = 20;
      c.boxed = true;
      break;
  }
  return c;
}

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"experiment", "string", "example1 | example2 | example3_analog (required)"},
      {"master_seed", "uint64", "master seed for every random stream"},
      {"threads", "int", "worker threads, 0 for hardware concurrency"},
      {"grid.a", "real", "left end of the domain (accepts pi factors)"},
      {"grid.b", "real", "right end of the domain"},
      {"grid.points", "int", "number of grid nodes"},
      {"manifold.amplitude", "range", "example1 A range; example2 A_i range"},
      {"manifold.period", "range", "example1 T range; example2 T_i range"},
      {"manifold.num_frequencies", "int", "example2 number of sinusoids N_f"},
      {"manifold.phase", "range", "example2 phase range"},
      {"manifold.jump_location", "range", "example2 jump location range"},
      {"manifold.jump_height", "range", "example2 jump height range"},
      {"manifold.peak_velocity", "range", "example3 v0 range"},
      {"manifold.flow_index", "range", "example3 flow index range"},
      {"manifold.radius", "real", "example3 vessel radius R"},
      {"snapshots.count", "int", "training snapshots for the reduced basis"},
      {"validation.count", "int", "number of test cases"},
      {"validation.source", "string", "heldout | training"},
      {"rom.n", "int list", "reduced dimensions, e.g. 1:15 or 5,10"},
      {"rom.decay_modes", "int", "modes reported in pod_decay.csv"},
      {"sensors.m", "int list", "sensor counts"},
      {"sensors.kind", "string", "box_average | pointwise"},
      {"sensors.width_factor", "real", "box width as a multiple of the sensor spacing"},
      {"noise.kind", "string", "linear_bias_gaussian | empirical_table"},
      {"noise.alpha", "real list", "bias slopes"},
      {"noise.sigma", "real list", "Gaussian noise levels"},
      {"noise.mc_samples", "int", "Monte Carlo draws for non-analytic expectations"},
      {"noise.table_edges", "real list", "empirical_table bin edges"},
      {"noise.table_offsets", "real list", "empirical_table mean offsets per bin"},
      {"solver.boxed", "bool", "box-constrained background coordinates"},
      {"solver.box_margin", "real", "box widening factor about its midpoint"},
      {"spbdw.rel_tol", "real", "minimum relative residual reduction per smoother"},
      {"spbdw.max_iters", "int", "maximum number of smoothers"},
      {"spbdw.dictionary_stride", "int", "dictionary jumps at every k-th node"},
      {"spbdw.deflate", "bool", "search in the complement of the observed fast space"},
      {"spbdw.bias_correction", "bool", "bias-corrected fast solve and smoother refit"},
      {"truth.snap_jump", "bool", "example2 truths jump at dictionary nodes"},
      {"truth.peak_velocity", "real", "example3 truth v0"},
      {"truth.flow_index", "real", "example3 truth flow index"},
  };
  return schema;
}

ExperimentConfig experiment_config(const Config& cfg) {
  std::vector<std::string> known;
  for (const auto& k : config_schema()) known.push_back(k.key);
  cfg.require_known(known);
  if (!cfg.contains("experiment")) throw ConfigError("missing required key 'experiment'");

  auto enum_value = [&](const std::string& key, auto parse, auto fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
      return parse(cfg.get_string(key, ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("key '" + key + "': " + e.what(), cfg.line_of(key));
    }
  };
  const Experiment exp =
      enum_value("experiment", experiment_from_string, Experiment::kExample1);
  ExperimentConfig c = default_config(exp);

  c.master_seed = cfg.get_unsigned("master_seed", c.master_seed);
  c.threads = static_cast<int>(cfg.get_integer("threads", c.threads));
  c.grid_a = cfg.get_real("grid.a", c.grid_a);
  c.grid_b = cfg.get_real("grid.b", c.grid_b);
  c.grid_points = static_cast<int>(cfg.get_integer("grid.points", c.grid_points));

  c.sinusoid.amplitude = cfg.get_range("manifold.amplitude", c.sinusoid.amplitude);
  c.sinusoid.period = cfg.get_range("manifold.period", c.sinusoid.period);
  c.multiscale.amplitude = cfg.get_range("manifold.amplitude", c.multiscale.amplitude);
  c.multiscale.period = cfg.get_range("manifold.period", c.multiscale.period);
  c.multiscale.num_frequencies = static_cast<int>(
      cfg.get_integer("manifold.num_frequencies", c.multiscale.num_frequencies));
  c.multiscale.phase = cfg.get_range("manifold.phase", c.multiscale.phase);
  c.multiscale.jump_location = cfg.get_range("manifold.jump_location", c.multiscale.jump_location);
  c.multiscale.jump_height = cfg.get_range("manifold.jump_height", c.multiscale.jump_height);
  c.powerlaw.peak_velocity = cfg.get_range("manifold.peak_velocity", c.powerlaw.peak_velocity);
  c.powerlaw.flow_index = cfg.get_range("manifold.flow_index", c.powerlaw.flow_index);
  c.powerlaw.radius = cfg.get_real("manifold.radius", c.powerlaw.radius);

  c.snapshot_count = static_cast<int>(cfg.get_integer("snapshots.count", c.snapshot_count));
  c.validation_count = static_cast<int>(cfg.get_integer("validation.count", c.validation_count));
  c.truth_source = enum_value(
      "validation.source",
      [](const std::string& s) {
        if (s == "heldout") return TruthSource::kHeldOut;
        if (s == "training") return TruthSource::kTraining;
        throw std::invalid_argument("expected heldout or training, got '" + s + "'");
      },
      c.truth_source);

  c.n_values = cfg.get_integers("rom.n", c.n_values);
  c.decay_modes = static_cast<int>(cfg.get_integer("rom.decay_modes", c.decay_modes));
  c.m_values = cfg.get_integers("sensors.m", c.m_values);
  c.sensor_kind = enum_value("sensors.kind", sensor_kind_from_string, c.sensor_kind);
  c.sensor_width_factor = cfg.get_real("sensors.width_factor", c.sensor_width_factor);

  c.noise_kind = enum_value("noise.kind", noise_kind_from_string, c.noise_kind);
  c.alpha_values = cfg.get_reals("noise.alpha", c.alpha_values);
  c.sigma_values = cfg.get_reals("noise.sigma", c.sigma_values);
  c.mc_samples = static_cast<int>(cfg.get_integer("noise.mc_samples", c.mc_samples));
  c.table.edges = cfg.get_reals("noise.table_edges", c.table.edges);
  c.table.offsets = cfg.get_reals("noise.table_offsets", c.table.offsets);

  c.boxed = cfg.get_bool("solver.boxed", c.boxed);
  c.box_margin = cfg.get_real("solver.box_margin", c.box_margin);

  c.spbdw_rel_tol = cfg.get_real("spbdw.rel_tol", c.spbdw_rel_tol);
  c.spbdw_max_iters = static_cast<int>(cfg.get_integer("spbdw.max_iters", c.spbdw_max_iters));
  c.dictionary_stride =
      static_cast<int>(cfg.get_integer("spbdw.dictionary_stride", c.dictionary_stride));
  c.deflate = cfg.get_bool("spbdw.deflate", c.deflate);
  c.spbdw_bias_correction = cfg.get_bool("spbdw.bias_correction", c.spbdw_bias_correction);
  c.snap_jump = cfg.get_bool("truth.snap_jump", c.snap_jump);
  c.truth_peak_velocity = cfg.get_real("truth.peak_velocity", c.truth_peak_velocity);
  c.truth_flow_index = cfg.get_real("truth.flow_index", c.truth_flow_index);

  const auto issues = issues_of(c);
  if (!issues.empty()) {
    const auto& issue = issues.front();
    int line = cfg.line_of(issue.key);
    if (line == 0 && issue.key == "manifold") {
      for (const auto& [key, entry] : cfg.entries()) {
        if (key.rfind("manifold.", 0) == 0 && (line == 0 || entry.line < line)) line = entry.line;
      }
    }
    throw ConfigError(issue.key + ": " + issue.message, line);
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("experiment", to_string(c.experiment));
  out.emplace_back("master_seed", std::to_string(c.master_seed));
  out.emplace_back("threads", std::to_string(c.threads));
  out.emplace_back("grid.a", fmt(c.grid_a));
  out.emplace_back("grid.b", fmt(c.grid_b));
  out.emplace_back("grid.points", std::to_string(c.grid_points));
  switch (c.experiment) {
    case Experiment::kExample1:
      out.emplace_back("manifold.amplitude", fmt(c.sinusoid.amplitude));
      out.emplace_back("manifold.period", fmt(c.sinusoid.period));
      break;
    case Experiment::kExample2:
      out.emplace_back("manifold.amplitude", fmt(c.multiscale.amplitude));
      out.emplace_back("manifold.period", fmt(c.multiscale.period));
      out.emplace_back("manifold.num_frequencies", std::to_string(c.multiscale.num_frequencies));
      out.emplace_back("manifold.phase", fmt(c.multiscale.phase));
      out.emplace_back("manifold.jump_location", fmt(c.multiscale.jump_location));
      out.emplace_back("manifold.jump_height", fmt(c.multiscale.jump_height));
      break;
    case Experiment::kExample3Analog:
      out.emplace_back("manifold.peak_velocity", fmt(c.powerlaw.peak_velocity));
      out.emplace_back("manifold.flow_index", fmt(c.powerlaw.flow_index));
      out.emplace_back("manifold.radius", fmt(c.powerlaw.radius));
      break;
  }
  out.emplace_back("snapshots.count", std::to_string(c.snapshot_count));
  out.emplace_back("validation.count", std::to_string(c.validation_count));
  out.emplace_back("validation.source",
                   c.truth_source == TruthSource::kTraining ? "training" : "heldout");
  out.emplace_back("rom.n", join(c.n_values));
  out.emplace_back("rom.decay_modes", std::to_string(c.decay_modes));
  out.emplace_back("sensors.m", join(c.m_values));
  out.emplace_back("sensors.kind", to_string(c.sensor_kind));
  out.emplace_back("sensors.width_factor", fmt(c.sensor_width_factor));
  out.emplace_back("noise.kind", to_string(c.noise_kind));
  out.emplace_back("noise.alpha", join(c.alpha_values));
  out.emplace_back("noise.sigma", join(c.sigma_values));
  out.emplace_back("noise.mc_samples", std::to_string(c.mc_samples));
  if (c.noise_kind == NoiseKind::kEmpiricalTable) {
    out.emplace_back("noise.table_edges", join(c.table.edges));
    out.emplace_back("noise.table_offsets", join(c.table.offsets));
  }
  out.emplace_back("solver.boxed", c.boxed ? "true" : "false");
  out.emplace_back("solver.box_margin", fmt(c.box_margin));
  if (c.experiment == Experiment::kExample2) {
    out.emplace_back("spbdw.rel_tol", fmt(c.spbdw_rel_tol));
    out.emplace_back("spbdw.max_iters", std::to_string(c.spbdw_max_iters));
    out.emplace_back("spbdw.dictionary_stride", std::to_string(c.dictionary_stride));
    out.emplace_back("spbdw.deflate", c.deflate ? "true" : "false");
    out.emplace_back("spbdw.bias_correction", c.spbdw_bias_correction ? "true" : "false");
    out.emplace_back("truth.snap_jump", c.snap_jump ? "true" : "false");
  }
  if (c.experiment == Experiment::kExample3Analog) {
    out.emplace_back("truth.peak_velocity", fmt(c.truth_peak_velocity));
    out.emplace_back("truth.flow_index", fmt(c.truth_flow_index));
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, int, int, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<AggregateRow> out;
  std::vector<std::vector<double>> samples;
  for (const ResultRow& r : rows) {
    const Key key{r.method, r.n, r.m, r.alpha, r.sigma};
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      out.push_back({r.method, r.n, r.m, r.alpha, r.sigma});
      samples.emplace_back();
    }
    samples[it->second].push_back(r.error_e);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& s = samples[g];
    AggregateRow& a = out[g];
    a.count = static_cast<int>(s.size());
    double sum = 0.0;
    for (double e : s) sum += e;
    a.mean = sum / a.count;
    a.max = *std::max_element(s.begin(), s.end());
    a.min = *std::min_element(s.begin(), s.end());
    double ss = 0.0;
    for (double e : s) ss += (e - a.mean) * (e - a.mean);
    a.stddev = a.count > 1 ? std::sqrt(ss / (a.count - 1)) : 0.0;
  }
  return out;
}

double total_variation(const GridFunction& u) {
  double tv = 0.0;
  for (int k = 1; k < u.size(); ++k) tv += std::abs(u[k] - u[k - 1]);
  return tv;
}

double relative_error(const GridFunction& u, const GridFunction& truth) {
  const double t = norm(truth);
  if (t == 0.0) throw std::invalid_argument("relative_error: zero truth");
  return norm(u - truth) / t;
}

std::vector<PodDecayRow> pod_decay(const ExperimentConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  const int modes = decay_modes(cfg);
  const std::uint64_t train_seed = derive_seed(cfg.master_seed, {kTrainingStage});
  const std::uint64_t val_seed = derive_seed(cfg.master_seed, {kValidationStage});
  switch (cfg.experiment) {
    case Experiment::kExample1: {
      SnapshotSet training = sample_sinusoids(cfg.sinusoid, grid, cfg.snapshot_count, train_seed);
      SnapshotSet truths = cfg.truth_source == TruthSource::kTraining
                               ? first(training, cfg.validation_count)
                               : sample_sinusoids(cfg.sinusoid, grid, cfg.validation_count, val_seed);
      return decay_rows("sinusoid", pod(training, modes), truths, modes);
    }
    case Experiment::kExample2: {
      MultiscaleSnapshots training =
          sample_multiscale(cfg.multiscale, grid, cfg.snapshot_count, train_seed);
      MultiscaleSnapshots truths = multiscale_truths(cfg, grid, training);
      auto rows = decay_rows("fast", pod(training.fast, modes), truths.fast, modes);
      auto full = decay_rows("full", pod(training.full, modes), truths.full, modes);
      rows.insert(rows.end(), full.begin(), full.end());
      return rows;
    }
    case Experiment::kExample3Analog: {
      SnapshotSet training = sample_powerlaw(cfg.powerlaw, grid, cfg.snapshot_count, train_seed);
      SnapshotSet truths = cfg.truth_source == TruthSource::kTraining
                               ? first(training, cfg.validation_count)
                               : sample_powerlaw(cfg.powerlaw, grid, cfg.validation_count, val_seed);
      return decay_rows("powerlaw", pod(training, modes), truths, modes);
    }
  }
  return {};
}

RunResult run_example1(const ExperimentConfig& cfg) {
  require_experiment(cfg, Experiment::kExample1);
  cfg.validate();
  const Grid grid = cfg.grid();
  SnapshotSet training = sample_sinusoids(cfg.sinusoid, grid, cfg.snapshot_count,
                                          derive_seed(cfg.master_seed, {kTrainingStage}));
  SnapshotSet truths =
      cfg.truth_source == TruthSource::kTraining
          ? first(training, cfg.validation_count)
          : sample_sinusoids(cfg.sinusoid, grid, cfg.validation_count,
                             derive_seed(cfg.master_seed, {kValidationStage}));
  const int modes = std::max(max_of(cfg.n_values), decay_modes(cfg));
  const ReducedBasis basis = pod(training, modes);

  std::vector<ObservationSpacePtr> spaces;
  for (int m : cfg.m_values) spaces.push_back(sensors_for(cfg, grid, m));
  std::vector<PbdwSolver> solvers;
  std::vector<CoefficientBox> boxes;
  std::vector<std::pair<int, int>> shape;
  for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
    for (int n : cfg.n_values) {
      Subspace v = basis.subspace.leading(n);
      if (cfg.boxed) boxes.push_back(compute_box(training, v, cfg.box_margin));
      solvers.emplace_back(std::move(v), spaces[mi]);
      shape.emplace_back(n, cfg.m_values[mi]);
    }
  }
  std::vector<SweepCell> cells;
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    cells.push_back({shape[i].first, shape[i].second, &solvers[i],
                     cfg.boxed ? &boxes[i] : nullptr});
  }

  std::vector<std::vector<ResultRow>> per_case(truths.size());
  parallel_for(static_cast<int>(truths.size()), cfg.threads, [&](int k) {
    per_case[k] = run_two_methods(cfg, k, truths.snapshots[k], cells, nullptr);
  });

  RunResult result;
  result.rows = flatten(per_case);
  result.aggregates = aggregate(result.rows);
  result.pod_decay = decay_rows("sinusoid", basis, truths, decay_modes(cfg));
  return result;
}

RunResult run_example2(const ExperimentConfig& cfg) {
  require_experiment(cfg, Experiment::kExample2);
  cfg.validate();
  const Grid grid = cfg.grid();
  MultiscaleSnapshots training = sample_multiscale(cfg.multiscale, grid, cfg.snapshot_count,
                                                   derive_seed(cfg.master_seed, {kTrainingStage}));
  MultiscaleSnapshots truths = multiscale_truths(cfg, grid, training);
  const int modes = std::max(max_of(cfg.n_values), decay_modes(cfg));
  const ReducedBasis fast_basis = pod(training.fast, modes);
  const ReducedBasis full_basis = pod(training.full, modes);
  const SnapshotSet steps =
      step_candidates(grid, cfg.multiscale.jump_location, cfg.dictionary_stride);

  struct Cell {
    int n;
    int m;
    PbdwSolver fast;
    PbdwSolver full;
    SlowDictionary dict;
  };
  std::vector<Cell> cells;
  for (int m : cfg.m_values) {
    ObservationSpacePtr space = sensors_for(cfg, grid, m);
    SlowDictionary base = build_slow_dictionary(steps, *space);
    for (int n : cfg.n_values) {
      PbdwSolver fast(fast_basis.subspace.leading(n), space);
      PbdwSolver full(full_basis.subspace.leading(n), space);
      SlowDictionary dict = cfg.deflate ? deflate_against(base, fast.cross_gramian()) : base;
      cells.push_back({n, m, std::move(fast), std::move(full), std::move(dict)});
    }
  }
  const SpbdwOptions options{cfg.spbdw_rel_tol, cfg.spbdw_max_iters};

  const int count = static_cast<int>(truths.full.size());
  std::vector<std::vector<ResultRow>> per_case(count);
  std::vector<std::vector<JumpDiagnostic>> per_case_jumps(count);
  parallel_for(count, cfg.threads, [&](int k) {
    const GridFunction& truth = truths.full.snapshots[k];
    const double true_jump = parameter(truths.full.parameters[k], "jump_location");
    for (const Cell& cell : cells) {
      for (std::size_t ai = 0; ai < cfg.alpha_values.size(); ++ai) {
        for (std::size_t si = 0; si < cfg.sigma_values.size(); ++si) {
          const double alpha = cfg.alpha_values[ai];
          const double sigma = cfg.sigma_values[si];
          const NoiseModel model = cfg.noise_model(alpha, sigma);
          const bool noisy = alpha != 0.0 || sigma != 0.0 || model.kind != NoiseKind::kLinearBiasGaussian;
          const std::uint64_t seed = cell_seed(cfg, kNoiseStage, k, cell.n, cell.m, ai, si);
          const std::uint64_t mc_seed = cell_seed(cfg, kExpectationStage, k, cell.n, cell.m, ai, si);
          const Measurement omega = observe(truth, cell.full.space(), noisy ? &model : nullptr, seed);

          auto t0 = Clock::now();
          const Reconstruction plain = cell.full.solve(omega);
          const double plain_ms = elapsed_ms(t0);
          t0 = Clock::now();
          const MultiscaleDecomposition dec = spbdw_reconstruct(
              omega, cell.fast, cell.dict,
              noisy && cfg.spbdw_bias_correction ? &model : nullptr, mc_seed, options);
          const double split_ms = elapsed_ms(t0);

          per_case[k].push_back({k, "pbdw", cell.n, cell.m, alpha, sigma,
                                 relative_error(plain.state, truth), cell.full.beta(), plain_ms,
                                 seed});
          per_case[k].push_back({k, "spbdw", cell.n, cell.m, alpha, sigma,
                                 relative_error(dec.u_star, truth), cell.fast.beta(), split_ms,
                                 seed});

          JumpDiagnostic jd;
          jd.case_id = k;
          jd.n = cell.n;
          jd.m = cell.m;
          jd.true_jump = true_jump;
          jd.estimated_jump = std::numeric_limits<double>::quiet_NaN();
          double strongest = -1.0;
          for (const Smoother& s : dec.smoothers) {
            if (std::abs(s.amplitude) > strongest) {
              strongest = std::abs(s.amplitude);
              jd.estimated_jump = s.location;
            }
          }
          jd.jump_error_cells = std::abs(jd.estimated_jump - true_jump) / grid.spacing();
          jd.num_smoothers = static_cast<int>(dec.smoothers.size());
          jd.tv_truth = total_variation(truth);
          jd.tv_spbdw = total_variation(dec.u_star);
          jd.tv_pbdw = total_variation(plain.state);
          per_case_jumps[k].push_back(jd);
        }
      }
    }
  });

  RunResult result;
  result.rows = flatten(per_case);
  result.aggregates = aggregate(result.rows);
  const int dm = decay_modes(cfg);
  result.pod_decay = decay_rows("fast", fast_basis, truths.fast, dm);
  auto full_rows = decay_rows("full", full_basis, truths.full, dm);
  result.pod_decay.insert(result.pod_decay.end(), full_rows.begin(), full_rows.end());
  for (auto& block : per_case_jumps) {
    result.jumps.insert(result.jumps.end(), block.begin(), block.end());
  }
  return result;
}

RunResult run_example3_analog(const ExperimentConfig& cfg) {
  require_experiment(cfg, Experiment::kExample3Analog);
  cfg.validate();
  const Grid grid = cfg.grid();
  SnapshotSet training = sample_powerlaw(cfg.powerlaw, grid, cfg.snapshot_count,
                                         derive_seed(cfg.master_seed, {kTrainingStage}));
  const GridFunction truth = GridFunction::from_function(grid, [&](double r) {
    return powerlaw_value(cfg.truth_peak_velocity, cfg.truth_flow_index, cfg.powerlaw.radius, r);
  });
  const int modes = std::max(max_of(cfg.n_values), decay_modes(cfg));
  const ReducedBasis basis = pod(training, modes);

  std::vector<PbdwSolver> solvers;
  std::vector<CoefficientBox> boxes;
  std::vector<std::pair<int, int>> shape;
  for (int m : cfg.m_values) {
    ObservationSpacePtr space = sensors_for(cfg, grid, m);
    for (int n : cfg.n_values) {
      Subspace v = basis.subspace.leading(n);
      if (cfg.boxed) boxes.push_back(compute_box(training, v, cfg.box_margin));
      solvers.emplace_back(std::move(v), space);
      shape.emplace_back(n, m);
    }
  }
  std::vector<SweepCell> cells;
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    cells.push_back({shape[i].first, shape[i].second, &solvers[i],
                     cfg.boxed ? &boxes[i] : nullptr});
  }

  const int count = cfg.validation_count;
  std::vector<std::vector<ResultRow>> per_case(count);
  std::vector<std::vector<EnergyDiagnostic>> per_case_energy(count);
  parallel_for(count, cfg.threads, [&](int k) {
    per_case[k] = run_two_methods(cfg, k, truth, cells, &per_case_energy[k]);
  });

  RunResult result;
  result.rows = flatten(per_case);
  result.aggregates = aggregate(result.rows);
  SnapshotSet held_out{grid, {truth}, {{{"peak_velocity", cfg.truth_peak_velocity},
                                        {"flow_index", cfg.truth_flow_index}}},
                       SnapshotLabel::kFull, 0};
  result.pod_decay = decay_rows("powerlaw", basis, held_out, decay_modes(cfg));
  for (auto& block : per_case_energy) {
    result.energies.insert(result.energies.end(), block.begin(), block.end());
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::kExample1: return run_example1(cfg);
    case Experiment::kExample2: return run_example2(cfg);
    case Experiment::kExample3Analog: return run_example3_analog(cfg);
  }
  throw std::logic_error("unknown experiment");
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "case_id,method,n,m,alpha,sigma,error_e,beta,seed\n";
  for (const auto& r : rows) {
    out << r.case_id << ',' << r.method << ',' << r.n << ',' << r.m << ',' << fmt(r.alpha) << ','
        << fmt(r.sigma) << ',' << fmt(r.error_e) << ',' << fmt(r.beta) << ',' << r.seed << '\n';
  }
}

void write_timings_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "case_id,method,n,m,alpha,sigma,runtime_ms\n";
  for (const auto& r : rows) {
    out << r.case_id << ',' << r.method << ',' << r.n << ',' << r.m << ',' << fmt(r.alpha) << ','
        << fmt(r.sigma) << ',' << fmt(r.runtime_ms) << '\n';
  }
}

void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "method,n,m,alpha,sigma,count,mean,max,min,stddev\n";
  for (const auto& a : rows) {
    out << a.method << ',' << a.n << ',' << a.m << ',' << fmt(a.alpha) << ',' << fmt(a.sigma)
        << ',' << a.count << ',' << fmt(a.mean) << ',' << fmt(a.max) << ',' << fmt(a.min) << ','
        << fmt(a.stddev) << '\n';
  }
}

void write_pod_decay_csv(std::ostream& out, const std::vector<PodDecayRow>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "manifold,n,singular_value,cumulative_energy,approximation_error\n";
  for (const auto& r : rows) {
    out << r.manifold << ',' << r.n << ',' << fmt(r.singular_value) << ','
        << fmt(r.cumulative_energy) << ',' << fmt(r.approximation_error) << '\n';
  }
}

void write_error_table_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "method,n,m,alpha,sigma,mean_pct,max_pct,min_pct,stddev_pct\n";
  char buf[160];
  for (const auto& a : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%s,%.2f,%.2f,%.2f,%.2f\n", a.method.c_str(), a.n,
                  a.m, fmt(a.alpha).c_str(), fmt(a.sigma).c_str(), 100 * a.mean, 100 * a.max,
                  100 * a.min, 100 * a.stddev);
    out << buf;
  }
}

void write_jump_diagnostics_csv(std::ostream& out, const std::vector<JumpDiagnostic>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "case_id,n,m,true_jump,estimated_jump,jump_error_cells,num_smoothers,tv_truth,tv_spbdw,"
         "tv_pbdw\n";
  for (const auto& r : rows) {
    out << r.case_id << ',' << r.n << ',' << r.m << ',' << fmt(r.true_jump) << ','
        << fmt(r.estimated_jump) << ',' << fmt(r.jump_error_cells) << ',' << r.num_smoothers
        << ',' << fmt(r.tv_truth) << ',' << fmt(r.tv_spbdw) << ',' << fmt(r.tv_pbdw) << '\n';
  }
}

void write_energy_diagnostics_csv(std::ostream& out, const std::vector<EnergyDiagnostic>& rows) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "case_id,method,n,m,mode1_energy_fraction\n";
  for (const auto& r : rows) {
    out << r.case_id << ',' << r.method << ',' << r.n << ',' << r.m << ','
        << fmt(r.mode1_energy_fraction) << '\n';
  }
}

void write_run_json(std::ostream& out, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "assim";
  j["version"] = kVersion;
  j["schema_version"] = kCsvSchemaVersion;
  j["experiment"] = to_string(cfg.experiment);
  j["master_seed"] = cfg.master_seed;
  nlohmann::ordered_json resolved;
  for (const auto& [key, value] : resolved_entries(cfg)) resolved[key] = value;
  j["config"] = resolved;
  j["versions"] = {
      {"assim", kVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
      {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
      {"compiler", "gcc " __VERSION__},
#else
      {"compiler", "unknown"},
#endif
  };
  j["outputs"] = outputs;
  out << j.dump(2) << '\n';
}

std::vector<std::string> write_outputs(const std::filesystem::path& dir,
                                       const ExperimentConfig& cfg, const RunResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, auto&& writer) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    writer(out);
    written.push_back(name);
  };
  emit("results.csv", [&](std::ostream& o) { write_results_csv(o, result.rows); });
  emit("timings.csv", [&](std::ostream& o) { write_timings_csv(o, result.rows); });
  emit("aggregates.csv", [&](std::ostream& o) { write_aggregates_csv(o, result.aggregates); });
  emit("pod_decay.csv", [&](std::ostream& o) { write_pod_decay_csv(o, result.pod_decay); });
  if (cfg.experiment == Experiment::kExample2) {
    emit("example2_diagnostics.csv",
         [&](std::ostream& o) { write_jump_diagnostics_csv(o, result.jumps); });
  }
  if (cfg.experiment == Experiment::kExample3Analog) {
    emit("error_table.csv", [&](std::ostream& o) { write_error_table_csv(o, result.aggregates); });
    emit("example3_diagnostics.csv",
         [&](std::ostream& o) { write_energy_diagnostics_csv(o, result.energies); });
  }
  std::vector<std::string> listing = written;
  listing.push_back("run.json");
  emit("run.json", [&](std::ostream& o) { write_run_json(o, cfg, listing); });
  return written;
}

}  // namespace assim
