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
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "assim/bias.hpp"
#include "assim/error.hpp"
#include "assim/rom.hpp"
#include "test_util.hpp"

namespace assim {
namespace {

constexpr double kPi = std::numbers::pi;

SensorArray full_domain_box(const Grid& grid) {
  return SensorArray{{0.5 * (grid.a() + grid.b())}, SensorKind::kBoxAverage, grid.length()};
}

TEST(SensorArrayTest, Validation) {
  Grid grid(0.0, 1.0, 11);
  EXPECT_THROW(SensorArray({{0.0}, SensorKind::kPointwise, 0.0}).validate(grid),
               std::invalid_argument);
  EXPECT_THROW(SensorArray({{0.5, 0.4}, SensorKind::kPointwise, 0.0}).validate(grid),
               std::invalid_argument);
  EXPECT_THROW(SensorArray({{0.5}, SensorKind::kBoxAverage, 0.0}).validate(grid),
               std::invalid_argument);
  EXPECT_NO_THROW(SensorArray::equidistant(grid, 4, SensorKind::kBoxAverage).validate(grid));
}

TEST(ObservationSpaceTest, PointwiseReproducesNodeValue) {
  Grid grid(0.0, 2 * kPi, 64);
  std::mt19937_64 rng(1);
  SensorArray sensors{{grid.node(5), grid.node(20) + 0.01, grid.node(40)}, SensorKind::kPointwise, 0};
  auto space = build_observation_space(sensors, grid);
  for (int trial = 0; trial < 5; ++trial) {
    auto u = testing::random_function(grid, rng);
    Eigen::VectorXd l = space->sensor_values(u);
    EXPECT_NEAR(l[0], u[5], 1e-12 * u.values().cwiseAbs().maxCoeff());
    EXPECT_NEAR(l[1], u[20], 1e-12 * u.values().cwiseAbs().maxCoeff());
    EXPECT_NEAR(l[2], u[40], 1e-12 * u.values().cwiseAbs().maxCoeff());
  }
}

TEST(ObservationSpaceTest, FullDomainBoxMeasuresConstant) {
  Grid grid(0.0, 2 * kPi, 101);
  auto space = build_observation_space(full_domain_box(grid), grid);
  GridFunction c(grid, Eigen::VectorXd::Constant(101, 3.25));
  EXPECT_NEAR(space->sensor_values(c)[0], 3.25, 1e-12);
  EXPECT_NEAR(observe(c, *space).sensor_values()[0], 3.25, 1e-12);
}

TEST(ObservationSpaceTest, TwentyFiveBoxesGramIsIdentity) {
  Grid grid(0.0, 2 * kPi, 512);
  auto space = build_observation_space(SensorArray::equidistant(grid, 25, SensorKind::kBoxAverage), grid);
  ASSERT_EQ(space->dimension(), 25);
  const Eigen::MatrixXd& q = space->onb().basis();
  Eigen::MatrixXd gram(25, 25);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) gram(i, j) = testing::quadrature(grid, q.col(i), q.col(j));
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(25, 25)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ObservationSpaceTest, RieszConsistency) {
  Grid grid(0.0, 1.0, 97);
  std::mt19937_64 rng(2);
  auto space = build_observation_space(SensorArray::equidistant(grid, 7, SensorKind::kBoxAverage, 0.6), grid);
  const auto& sensors = space->sensors();
  for (int trial = 0; trial < 10; ++trial) {
    auto u = testing::random_function(grid, rng);
    Eigen::VectorXd l = space->sensor_values(u);
    for (int i = 0; i < 7; ++i) {
      // l_i(u): weighted mean over the nodes in the window.
      double num = 0.0;
      double den = 0.0;
      for (int k = 0; k < grid.num_points(); ++k) {
        if (std::abs(grid.node(k) - sensors.centers[i]) <= sensors.width / 2 + 1e-12) {
          num += grid.weight(k) * u[k];
          den += grid.weight(k);
        }
      }
      EXPECT_NEAR(l[i], num / den, 1e-10);
      EXPECT_NEAR(l[i], inner_product(space->raw_representers()[i], u), 1e-10);
    }
  }
}

TEST(ObservationSpaceTest, DependentSensorsAreNamed) {
  Grid grid(0.0, 1.0, 11);
  SensorArray sensors{{0.3, 0.31, 0.6}, SensorKind::kPointwise, 0};
  try {
    build_observation_space(sensors, grid);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_NE(std::string(e.what()).find("sensors 1"), std::string::npos) << e.what();
  }
}

TEST(ObservationSpaceTest, SensorValueRoundTrip) {
  Grid grid(0.0, 2 * kPi, 256);
  std::mt19937_64 rng(3);
  auto space = build_observation_space(SensorArray::equidistant(grid, 12, SensorKind::kBoxAverage), grid);
  Eigen::VectorXd d = testing::random_vector(rng, 12);
  Eigen::VectorXd back = space->coefficients_from_sensor_values(space->sensor_values_from_coefficients(d));
  EXPECT_LE((back - d).cwiseAbs().maxCoeff(), 1e-10);
  auto u = testing::random_function(grid, rng);
  EXPECT_LE((space->coefficients_from_sensor_values(space->sensor_values(u)) -
             space->project_coefficients(u)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(ObserveTest, ElementOfWIsReproduced) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(4);
  auto space = build_observation_space(SensorArray::equidistant(grid, 10, SensorKind::kBoxAverage), grid);
  GridFunction u = space->lift(testing::random_vector(rng, 10));
  EXPECT_LE(norm(observe(u, *space).lift() - u), 1e-10 * norm(u));
}

TEST(ObserveTest, OrthogonalStateGivesZero) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(5);
  auto space = build_observation_space(SensorArray::equidistant(grid, 10, SensorKind::kBoxAverage), grid);
  auto u = testing::random_function(grid, rng);
  u -= project_onto(u, space->onb());
  EXPECT_LE(observe(u, *space).coeffs.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ObserveTest, LinearBiasOnConstant) {
  Grid grid(0.0, 2 * kPi, 200);
  auto space = build_observation_space(full_domain_box(grid), grid);
  GridFunction one(grid, Eigen::VectorXd::Ones(200));
  NoiseModel model;
  model.alpha = 0.2;
  EXPECT_NEAR(observe(one, *space, &model, 1).sensor_values()[0], 1.2, 1e-12);
  EXPECT_NEAR(observe(one, *space, nullptr, 1).sensor_values()[0], 1.0, 1e-12);
}

TEST(MeasurementTest, Validation) {
  Grid grid(0.0, 1.0, 32);
  auto space = build_observation_space(SensorArray::equidistant(grid, 4, SensorKind::kBoxAverage), grid);
  EXPECT_THROW(make_measurement(*space, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  bad[1] = INFINITY;
  EXPECT_THROW(make_measurement(*space, bad), std::invalid_argument);
  EXPECT_EQ(make_measurement(*space, Eigen::VectorXd::Zero(4)).space.get(), space.get());
}

TEST(InfSupTest, ContainedSubspaceIsOne) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(6);
  auto space = build_observation_space(SensorArray::equidistant(grid, 8, SensorKind::kBoxAverage), grid);
  std::vector<GridFunction> fns;
  for (int i = 0; i < 3; ++i) fns.push_back(space->lift(testing::random_vector(rng, 8)));
  EXPECT_NEAR(inf_sup_beta(orthonormalize(grid, fns), *space), 1.0, 1e-10);
}

TEST(InfSupTest, OrthogonalSubspaceIsZero) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(7);
  auto space = build_observation_space(SensorArray::equidistant(grid, 8, SensorKind::kBoxAverage), grid);
  std::vector<GridFunction> fns;
  for (int i = 0; i < 2; ++i) {
    auto u = testing::random_function(grid, rng);
    fns.push_back(u - project_onto(u, space->onb()));
  }
  EXPECT_NEAR(inf_sup_beta(orthonormalize(grid, fns), *space), 0.0, 1e-10);
}

TEST(InfSupTest, PlanarAngle) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(8);
  auto space = build_observation_space(SensorArray::equidistant(grid, 8, SensorKind::kBoxAverage), grid);
  GridFunction w = space->onb().element(3);
  auto r = testing::random_function(grid, rng);
  r -= project_onto(r, space->onb());
  GridFunction w_perp = (1.0 / norm(r)) * r;
  for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
    GridFunction v = std::cos(theta) * w + std::sin(theta) * w_perp;
    Subspace line(grid, ((1.0 / norm(v)) * v).values());
    EXPECT_NEAR(inf_sup_beta(line, *space), std::abs(std::cos(theta)), 1e-10);
  }
}

TEST(InfSupTest, MoreModesThanSensorsIsZero) {
  Grid grid(0.0, 1.0, 64);
  std::mt19937_64 rng(9);
  auto space = build_observation_space(SensorArray::equidistant(grid, 3, SensorKind::kBoxAverage), grid);
  EXPECT_EQ(inf_sup_beta(testing::random_subspace(grid, 4, rng), *space), 0.0);
  EXPECT_THROW(inf_sup_beta(Subspace::empty(grid), *space), std::invalid_argument);
}

TEST(InfSupTest, NonincreasingInN) {
  Grid grid(0.0, 2 * kPi, 256);
  auto basis = pod(sample_sinusoids(SinusoidSpec{}, grid, 64, 10), 15);
  auto space = build_observation_space(SensorArray::equidistant(grid, 25, SensorKind::kBoxAverage), grid);
  double previous = 1.0 + 1e-10;
  for (int n = 1; n <= 15; ++n) {
    const double beta = inf_sup_beta(basis.subspace.leading(n), *space);
    EXPECT_LE(beta, previous + 1e-10);
    EXPECT_GE(beta, 0.0);
    previous = beta;
  }
}

TEST(InfSupTest, NondecreasingInNestedSensors) {
  Grid grid(0.0, 2 * kPi, 257);
  auto basis = pod(sample_sinusoids(SinusoidSpec{}, grid, 64, 11), 5);
  double previous = 0.0;
  for (int m : {8, 16, 32, 64}) {
    // Nodes 3 + k * (256 / m): each set contains the previous one.
    SensorArray sensors{{}, SensorKind::kPointwise, 0};
    const int step = 256 / m;
    for (int k = 0; k < m; ++k) sensors.centers.push_back(grid.node(3 + k * step));
    auto space = build_observation_space(sensors, grid);
    const double beta = inf_sup_beta(basis.subspace, *space);
    EXPECT_GE(beta, previous - 1e-10) << "m = " << m;
    previous = beta;
  }
}

TEST(SensorCsvTest, RoundTrip) {
  Grid grid(0.0, 1.0, 32);
  SensorArray sensors = SensorArray::equidistant(grid, 5, SensorKind::kBoxAverage, 0.5);
  std::stringstream buf;
  write_sensors_csv(buf, sensors);
  SensorArray back = read_sensors_csv(buf);
  EXPECT_EQ(back.centers, sensors.centers);
  EXPECT_EQ(back.kind, sensors.kind);
  EXPECT_EQ(back.width, sensors.width);
}

}  // namespace
}  // namespace assim
