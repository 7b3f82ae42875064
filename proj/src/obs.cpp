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

#include "assim/obs.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "assim/error.hpp"

namespace assim {

std::string to_string(SensorKind kind) {
  return kind == SensorKind::kPointwise ? "pointwise" : "box_average";
}

SensorKind sensor_kind_from_string(const std::string& name) {
  if (name == "pointwise") return SensorKind::kPointwise;
  if (name == "box_average") return SensorKind::kBoxAverage;
  throw std::invalid_argument("unknown sensor kind '" + name + "'");
}

void SensorArray::validate(const Grid& grid) const {
  if (centers.empty()) throw std::invalid_argument("SensorArray: need at least one sensor");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double c = centers[i];
    if (!(c > grid.a() && c < grid.b())) {
      throw std::invalid_argument("SensorArray: sensor " + std::to_string(i) +
                                  " lies outside the open domain");
    }
    if (i > 0 && !(c > centers[i - 1])) {
      throw std::invalid_argument("SensorArray: centers must be strictly increasing (sensor " +
                                  std::to_string(i) + ")");
    }
  }
  if (kind == SensorKind::kBoxAverage && !(width > 0)) {
    throw std::invalid_argument("SensorArray: box width must be positive");
  }
}

SensorArray SensorArray::equidistant(const Grid& grid, int m, SensorKind kind,
                                     double width_factor) {
  if (m < 1) throw std::invalid_argument("SensorArray::equidistant: m must be at least 1");
  const double cell = grid.length() / m;
  SensorArray out;
  out.kind = kind;
  out.width = kind == SensorKind::kBoxAverage ? width_factor * cell : 0.0;
  for (int i = 0; i < m; ++i) out.centers.push_back(grid.a() + (i + 0.5) * cell);
  return out;
}

ObservationSpace::ObservationSpace(Key, SensorArray sensors, std::vector<GridFunction> raw,
                                   Subspace onb)
    : sensors_(std::move(sensors)), raw_(std::move(raw)), onb_(std::move(onb)) {
  Eigen::MatrixXd omega(grid().num_points(), static_cast<Eigen::Index>(raw_.size()));
  for (std::size_t i = 0; i < raw_.size(); ++i) omega.col(i) = raw_[i].values();
  sensor_matrix_ = weighted_cross(grid(), omega, onb_.basis());
  sensor_lu_.compute(sensor_matrix_);
}

Eigen::VectorXd ObservationSpace::sensor_values(const GridFunction& u) const {
  require_same_grid(grid(), u.grid());
  Eigen::VectorXd out(raw_.size());
  for (std::size_t i = 0; i < raw_.size(); ++i) out[i] = inner_product(raw_[i], u);
  return out;
}

Eigen::VectorXd ObservationSpace::project_coefficients(const GridFunction& u) const {
  return onb_.coefficients(u);
}

Eigen::VectorXd ObservationSpace::coefficients_from_sensor_values(
    const Eigen::VectorXd& readings) const {
  if (readings.size() != dimension()) {
    throw std::invalid_argument("coefficients_from_sensor_values: expected " +
                                std::to_string(dimension()) + " readings");
  }
  return sensor_lu_.solve(readings);
}

Eigen::VectorXd ObservationSpace::sensor_values_from_coefficients(
    const Eigen::VectorXd& coeffs) const {
  return sensor_matrix_ * coeffs;
}

GridFunction ObservationSpace::lift(const Eigen::VectorXd& coeffs) const {
  return onb_.combine(coeffs);
}

ObservationSpacePtr build_observation_space(const SensorArray& sensors, const Grid& grid) {
  sensors.validate(grid);
  const double slack = 1e-12 * grid.length();
  std::vector<GridFunction> raw;
  raw.reserve(sensors.centers.size());
  for (std::size_t i = 0; i < sensors.centers.size(); ++i) {
    const double c = sensors.centers[i];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.num_points());
    if (sensors.kind == SensorKind::kPointwise) {
      const int k = grid.nearest_node(c);
      v[k] = 1.0 / grid.weight(k);
    } else {
      double measure = 0.0;
      for (int k = 0; k < grid.num_points(); ++k) {
        if (std::abs(grid.node(k) - c) <= 0.5 * sensors.width + slack) {
          v[k] = 1.0;
          measure += grid.weight(k);
        }
      }
      if (measure == 0.0) {
        throw RankDeficientError("sensor " + std::to_string(i) +
                                 ": box window contains no grid node");
      }
      v /= measure;
    }
    raw.emplace_back(grid, std::move(v));
  }

  auto ortho = orthonormalize_tracked(grid, raw);
  if (!ortho.dropped.empty()) {
    std::ostringstream msg;
    msg << "sensor functionals are linearly dependent; sensors";
    for (auto i : ortho.dropped) msg << ' ' << i << " (center " << sensors.centers[i] << ")";
    msg << " add nothing to the observation space";
    throw RankDeficientError(msg.str());
  }
  return std::make_shared<const ObservationSpace>(ObservationSpace::Key{}, sensors,
                                                  std::move(raw), std::move(ortho.subspace));
}

GridFunction Measurement::lift() const {
  if (!space) throw std::logic_error("Measurement without observation space");
  return space->lift(coeffs);
}

Eigen::VectorXd Measurement::sensor_values() const {
  if (!space) throw std::logic_error("Measurement without observation space");
  return space->sensor_values_from_coefficients(coeffs);
}

Measurement make_measurement(const ObservationSpace& space, Eigen::VectorXd coeffs) {
  if (coeffs.size() != space.dimension()) {
    throw std::invalid_argument("measurement has " + std::to_string(coeffs.size()) +
                                " coordinates, observation space has " +
                                std::to_string(space.dimension()));
  }
  if (!coeffs.allFinite()) throw std::invalid_argument("measurement has non-finite entries");
  return Measurement{std::move(coeffs), space.shared_from_this()};
}

Measurement observe(const GridFunction& u, const ObservationSpace& space) {
  return make_measurement(space, space.project_coefficients(u));
}

Eigen::MatrixXd cross_gramian(const Subspace& background, const ObservationSpace& space) {
  require_same_grid(background.grid(), space.grid());
  return weighted_cross(space.grid(), space.onb().basis(), background.basis());
}

double inf_sup_beta(const Subspace& background, const ObservationSpace& space) {
  if (background.dimension() < 1) {
    throw std::invalid_argument("inf_sup_beta: background space must be nonempty");
  }
  if (background.dimension() > space.dimension()) return 0.0;
  const Eigen::MatrixXd g = cross_gramian(background, space);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  return svd.singularValues().minCoeff();
}

void write_sensors_csv(std::ostream& out, const SensorArray& sensors) {
  char buf[96];
  out << "center,kind,width\n";
  for (double c : sensors.centers) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g\n", c, to_string(sensors.kind).c_str(),
                  sensors.width);
    out << buf;
  }
}

SensorArray read_sensors_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("center,kind,width", 0) != 0) {
    throw std::invalid_argument("read_sensors_csv: expected header 'center,kind,width'");
  }
  SensorArray out;
  bool first = true;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string center, kind, width;
    if (!std::getline(row, center, ',') || !std::getline(row, kind, ',') ||
        !std::getline(row, width)) {
      throw std::invalid_argument("read_sensors_csv: malformed line " + std::to_string(line_no));
    }
    const SensorKind k = sensor_kind_from_string(kind);
    const double wdt = std::stod(width);
    if (first) {
      out.kind = k;
      out.width = wdt;
      first = false;
    } else if (k != out.kind || wdt != out.width) {
      throw std::invalid_argument("read_sensors_csv: mixed sensor kinds or widths (line " +
                                  std::to_string(line_no) + ")");
    }
    out.centers.push_back(std::stod(center));
  }
  return out;
}

}  // namespace assim
