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

#ifndef ASSIM_MANIFOLD_HPP_
#define ASSIM_MANIFOLD_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "assim/space.hpp"

namespace assim {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool well_ordered() const { return lo <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// A sin(2 pi x / T) with (A, T) uniform over the ranges.
struct SinusoidSpec {
  Range amplitude{25.0, 40.0};
  Range period{3.14159265358979323846, 2.0 * 3.14159265358979323846};

  void validate() const;
};

/// (1/N_f) sum_i A_i sin(2 pi x / T_i + delta_i) + h * HS(x').
struct MultiscaleSpec {
  int num_frequencies = 3;
  Range amplitude{0.5, 1.5};
  Range period{3.14159265358979323846, 2.0 * 3.14159265358979323846};
  Range phase{0.0, 2.0 * 3.14159265358979323846};
  Range jump_location{0.5 * 3.14159265358979323846, 1.5 * 3.14159265358979323846};
  Range jump_height{0.5, 2.0};

  void validate(const Grid& grid) const;
};

/// v0 [1 - (|r| / R)^(1 + 1/n)] on r in [-R, R].
struct PowerLawSpec {
  Range peak_velocity{40.0, 60.0};
  Range flow_index{0.8, 1.2};
  double radius = 0.5;

  void validate() const;
};

enum class SnapshotLabel { kFast, kSlow, kFull };

std::string to_string(SnapshotLabel label);

/// Named parameter values of one snapshot, in generation order.
using ParameterRecord = std::vector<std::pair<std::string, double>>;

double parameter(const ParameterRecord& record, const std::string& name);

struct SnapshotSet {
  Grid grid;
  std::vector<GridFunction> snapshots;
  std::vector<ParameterRecord> parameters;
  SnapshotLabel label = SnapshotLabel::kFull;
  std::uint64_t seed = 0;

  std::size_t size() const { return snapshots.size(); }
  bool empty() const { return snapshots.empty(); }
  /// Nodal values, one column per snapshot.
  Eigen::MatrixXd matrix() const;
};

// Unit step closed on the right: 1 for x >= jump, else 0.
GridFunction heaviside(const Grid& grid, double jump);

double sinusoid_value(double amplitude, double period, double x);
double powerlaw_value(double peak_velocity, double flow_index, double radius, double r);

SnapshotSet sample_sinusoids(const SinusoidSpec& spec, const Grid& grid, int count,
                             std::uint64_t seed);

struct MultiscaleSnapshots {
  SnapshotSet fast;
  SnapshotSet slow;
  SnapshotSet full;
};

/// Shares parameter draws across the three sets so full[k] = fast[k] + slow[k].
MultiscaleSnapshots sample_multiscale(const MultiscaleSpec& spec, const Grid& grid, int count,
                                      std::uint64_t seed);

SnapshotSet sample_powerlaw(const PowerLawSpec& spec, const Grid& grid, int count,
                            std::uint64_t seed);

// CSV matrix: first column x, one column per snapshot.
void write_snapshots_csv(std::ostream& out, const SnapshotSet& set);
// Sidecar JSON with label, seed and parameter records.
void write_snapshots_json(std::ostream& out, const SnapshotSet& set);

}  // namespace assim

#endif  // ASSIM_MANIFOLD_HPP_
