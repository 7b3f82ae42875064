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

#ifndef ASSIM_OBS_HPP_
#define ASSIM_OBS_HPP_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "assim/space.hpp"

namespace assim {

enum class SensorKind { kPointwise, kBoxAverage };

std::string to_string(SensorKind kind);
SensorKind sensor_kind_from_string(const std::string& name);

struct SensorArray {
  std::vector<double> centers;
  SensorKind kind = SensorKind::kBoxAverage;
  double width = 0.0;  // window width, box_average only

  int size() const { return static_cast<int>(centers.size()); }
  /// Centers strictly inside the domain and strictly increasing; width > 0 for boxes.
  void validate(const Grid& grid) const;

  /// m sensors at the midpoints of m equal cells; box width = width_factor * cell size.
  static SensorArray equidistant(const Grid& grid, int m, SensorKind kind,
                                 double width_factor = 1.0);
};

class ObservationSpace;
using ObservationSpacePtr = std::shared_ptr<const ObservationSpace>;

/// W_m = span{omega_1, ..., omega_m} with an orthonormal basis q_1..q_m.
///
/// Measurements are stored as coordinates in the orthonormal basis. Physical
/// sensor readings l_i(u) = <omega_i, u> relate to those coordinates through
/// the m x m matrix A_ij = <omega_i, q_j>.
class ObservationSpace : public std::enable_shared_from_this<ObservationSpace> {
  struct Key {};

 public:
  ObservationSpace(Key, SensorArray sensors, std::vector<GridFunction> raw, Subspace onb);

  const Grid& grid() const { return onb_.grid(); }
  const SensorArray& sensors() const { return sensors_; }
  const std::vector<GridFunction>& raw_representers() const { return raw_; }
  const Subspace& onb() const { return onb_; }
  int dimension() const { return onb_.dimension(); }

  /// A_ij = <omega_i, q_j>.
  const Eigen::MatrixXd& sensor_matrix() const { return sensor_matrix_; }

  /// l_i(u) for each sensor.
  Eigen::VectorXd sensor_values(const GridFunction& u) const;
  /// Coordinates of P_W u in the orthonormal basis.
  Eigen::VectorXd project_coefficients(const GridFunction& u) const;
  /// Orthonormal coordinates of the unique element of W_m with the given readings.
  Eigen::VectorXd coefficients_from_sensor_values(const Eigen::VectorXd& readings) const;
  Eigen::VectorXd sensor_values_from_coefficients(const Eigen::VectorXd& coeffs) const;
  GridFunction lift(const Eigen::VectorXd& coeffs) const;

 private:
  friend ObservationSpacePtr build_observation_space(const SensorArray& sensors,
                                                     const Grid& grid);

  SensorArray sensors_;
  std::vector<GridFunction> raw_;
  Subspace onb_;
  Eigen::MatrixXd sensor_matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> sensor_lu_;
};

/// Pointwise sensors use the discrete delta e_k / w_k at the nearest node;
/// box sensors use the window indicator divided by its quadrature measure.
/// Throws RankDeficientError naming the sensors that add nothing to W_m.
ObservationSpacePtr build_observation_space(const SensorArray& sensors, const Grid& grid);

/// An element omega* of W_m in orthonormal coordinates.
struct Measurement {
  Eigen::VectorXd coeffs;
  ObservationSpacePtr space;

  int size() const { return static_cast<int>(coeffs.size()); }
  GridFunction lift() const;
  Eigen::VectorXd sensor_values() const;
};

Measurement make_measurement(const ObservationSpace& space, Eigen::VectorXd coeffs);

/// Noise-free observation: coordinates of P_W u.
Measurement observe(const GridFunction& u, const ObservationSpace& space);

/// G_ij = <q_i, v_j>, an m x n matrix.
Eigen::MatrixXd cross_gramian(const Subspace& background, const ObservationSpace& space);

/// Smallest singular value of the cross-Gramian; zero when dim V_n > m.
double inf_sup_beta(const Subspace& background, const ObservationSpace& space);

// Sensor layout CSV: center,kind,width.
void write_sensors_csv(std::ostream& out, const SensorArray& sensors);
SensorArray read_sensors_csv(std::istream& in);

}  // namespace assim

#endif  // ASSIM_OBS_HPP_
