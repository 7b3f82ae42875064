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

#include "assim/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "assim/error.hpp"
#include "assim/rng.hpp"
#include "json.hpp"

namespace assim {
namespace {

double draw(Rng& rng, const Range& range) {
  if (range.lo == range.hi) {
    // Keep the stream position independent of degenerate ranges.
    rng.discard(1);
    return range.lo;
  }
  std::uniform_real_distribution<double> dist(range.lo, range.hi);
  return dist(rng);
}

void require_ordered(const Range& r, const char* what) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi)) || !r.well_ordered()) {
    throw std::invalid_argument(std::string(what) + " range must be finite with lo <= hi");
  }
}

void require_count(int count) {
  if (count < 1) throw std::invalid_argument("snapshot count must be at least 1");
}

}  // namespace

void SinusoidSpec::validate() const {
  require_ordered(amplitude, "amplitude");
  require_ordered(period, "period");
  if (!(period.lo > 0)) throw std::invalid_argument("period range must be positive");
}

void MultiscaleSpec::validate(const Grid& grid) const {
  if (num_frequencies < 1) throw std::invalid_argument("num_frequencies must be at least 1");
  require_ordered(amplitude, "amplitude");
  require_ordered(period, "period");
  require_ordered(phase, "phase");
  require_ordered(jump_location, "jump_location");
  require_ordered(jump_height, "jump_height");
  if (!(period.lo > 0)) throw std::invalid_argument("period range must be positive");
  if (!(jump_location.lo > grid.a() && jump_location.hi < grid.b())) {
    throw std::invalid_argument("jump_location range must lie strictly inside the domain");
  }
}

void PowerLawSpec::validate() const {
  require_ordered(peak_velocity, "peak_velocity");
  require_ordered(flow_index, "flow_index");
  if (peak_velocity.lo < 0) throw std::invalid_argument("peak_velocity must be nonnegative");
  if (!(flow_index.lo > 0)) throw std::invalid_argument("flow_index must be positive");
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
}

std::string to_string(SnapshotLabel label) {
  switch (label) {
    case SnapshotLabel::kFast:
      return "fast";
    case SnapshotLabel::kSlow:
      return "slow";
    case SnapshotLabel::kFull:
      return "full";
  }
  return "full";
}

double parameter(const ParameterRecord& record, const std::string& name) {
  for (const auto& [key, value] : record) {
    if (key == name) return value;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

Eigen::MatrixXd SnapshotSet::matrix() const {
  Eigen::MatrixXd m(grid.num_points(), static_cast<Eigen::Index>(snapshots.size()));
  for (std::size_t j = 0; j < snapshots.size(); ++j) m.col(j) = snapshots[j].values();
  return m;
}

GridFunction heaviside(const Grid& grid, double jump) {
  return GridFunction::from_function(grid, [jump](double x) { return x >= jump ? 1.0 : 0.0; });
}

double sinusoid_value(double amplitude, double period, double x) {
  return amplitude * std::sin(2.0 * std::numbers::pi * x / period);
}

double powerlaw_value(double peak_velocity, double flow_index, double radius, double r) {
  const double s = std::min(1.0, std::abs(r) / radius);
  return peak_velocity * (1.0 - std::pow(s, 1.0 + 1.0 / flow_index));
}

SnapshotSet sample_sinusoids(const SinusoidSpec& spec, const Grid& grid, int count,
                             std::uint64_t seed) {
  spec.validate();
  require_count(count);
  Rng rng(seed);
  SnapshotSet set{grid, {}, {}, SnapshotLabel::kFull, seed};
  set.snapshots.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double amplitude = draw(rng, spec.amplitude);
    const double period = draw(rng, spec.period);
    set.snapshots.push_back(GridFunction::from_function(
        grid, [=](double x) { return sinusoid_value(amplitude, period, x); }));
    set.parameters.push_back({{"amplitude", amplitude}, {"period", period}});
  }
  return set;
}

MultiscaleSnapshots sample_multiscale(const MultiscaleSpec& spec, const Grid& grid, int count,
                                      std::uint64_t seed) {
  spec.validate(grid);
  require_count(count);
  Rng rng(seed);
  MultiscaleSnapshots out{SnapshotSet{grid, {}, {}, SnapshotLabel::kFast, seed},
                          SnapshotSet{grid, {}, {}, SnapshotLabel::kSlow, seed},
                          SnapshotSet{grid, {}, {}, SnapshotLabel::kFull, seed}};
  const int nf = spec.num_frequencies;
  const Eigen::VectorXd x = grid.nodes();
  for (int k = 0; k < count; ++k) {
    ParameterRecord record;
    Eigen::VectorXd fast = Eigen::VectorXd::Zero(grid.num_points());
    for (int i = 0; i < nf; ++i) {
      const double a = draw(rng, spec.amplitude);
      const double t = draw(rng, spec.period);
      const double delta = draw(rng, spec.phase);
      for (int p = 0; p < grid.num_points(); ++p) {
        fast[p] += a * std::sin(2.0 * std::numbers::pi * x[p] / t + delta);
      }
      const std::string idx = std::to_string(i + 1);
      record.emplace_back("amplitude_" + idx, a);
      record.emplace_back("period_" + idx, t);
      record.emplace_back("phase_" + idx, delta);
    }
    fast /= nf;
    const double jump = draw(rng, spec.jump_location);
    const double height = draw(rng, spec.jump_height);
    record.emplace_back("jump_location", jump);
    record.emplace_back("jump_height", height);

    GridFunction fast_fn(grid, fast);
    GridFunction slow_fn = height * heaviside(grid, jump);
    GridFunction full_fn = fast_fn + slow_fn;
    out.fast.snapshots.push_back(std::move(fast_fn));
    out.slow.snapshots.push_back(std::move(slow_fn));
    out.full.snapshots.push_back(std::move(full_fn));
    out.fast.parameters.push_back(record);
    out.slow.parameters.push_back(record);
    out.full.parameters.push_back(std::move(record));
  }
  return out;
}

SnapshotSet sample_powerlaw(const PowerLawSpec& spec, const Grid& grid, int count,
                            std::uint64_t seed) {
  spec.validate();
  require_count(count);
  const double tol = 1e-12 * spec.radius;
  if (std::abs(grid.a() + spec.radius) > tol || std::abs(grid.b() - spec.radius) > tol) {
    throw IncompatibleGridError("sample_powerlaw: grid must span [-R, R] for R = " +
                                std::to_string(spec.radius));
  }
  Rng rng(seed);
  SnapshotSet set{grid, {}, {}, SnapshotLabel::kFull, seed};
  for (int k = 0; k < count; ++k) {
    const double v0 = draw(rng, spec.peak_velocity);
    const double n = draw(rng, spec.flow_index);
    set.snapshots.push_back(GridFunction::from_function(
        grid, [&](double r) { return powerlaw_value(v0, n, spec.radius, r); }));
    set.parameters.push_back({{"peak_velocity", v0}, {"flow_index", n}});
  }
  return set;
}

void write_snapshots_csv(std::ostream& out, const SnapshotSet& set) {
  char buf[32];
  out << "x";
  for (std::size_t j = 0; j < set.size(); ++j) out << ",s" << j;
  out << '\n';
  for (int k = 0; k < set.grid.num_points(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", set.grid.node(k));
    out << buf;
    for (const auto& s : set.snapshots) {
      std::snprintf(buf, sizeof buf, ",%.17g", s[k]);
      out << buf;
    }
    out << '\n';
  }
}

void write_snapshots_json(std::ostream& out, const SnapshotSet& set) {
  nlohmann::ordered_json j;
  j["label"] = to_string(set.label);
  j["seed"] = set.seed;
  j["grid"] = {{"a", set.grid.a()}, {"b", set.grid.b()}, {"num_points", set.grid.num_points()}};
  auto params = nlohmann::ordered_json::array();
  for (const auto& record : set.parameters) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [key, value] : record) p[key] = value;
    params.push_back(std::move(p));
  }
  j["parameters"] = std::move(params);
  out << j.dump(2) << '\n';
}

}  // namespace assim
