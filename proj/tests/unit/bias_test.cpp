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

#include "assim/bias.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "assim/rng.hpp"
#include "assim/rom.hpp"
#include "assim/solver.hpp"
#include "test_util.hpp"

namespace assim {
namespace {

constexpr double kPi = std::numbers::pi;

ObservationSpacePtr boxes(const Grid& grid, int m) {
  return build_observation_space(SensorArray::equidistant(grid, m, SensorKind::kBoxAverage), grid);
}

NoiseModel linear(double alpha, double sigma) {
  NoiseModel model;
  model.alpha = alpha;
  model.sigma = sigma;
  return model;
}

TEST(NoiseTest, ZeroNoiseIsProjection) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(1);
  auto space = boxes(grid, 10);
  auto u = testing::random_function(grid, rng);
  auto d = apply_noise(u, *space, linear(0.0, 0.0), 5);
  EXPECT_LE((d.coeffs - observe(u, *space).coeffs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NoiseTest, DeterministicInSeed) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(2);
  auto space = boxes(grid, 10);
  auto u = testing::random_function(grid, rng);
  auto model = linear(0.1, 0.5);
  EXPECT_EQ(apply_noise(u, *space, model, 9).coeffs, apply_noise(u, *space, model, 9).coeffs);
  EXPECT_NE(apply_noise(u, *space, model, 9).coeffs, apply_noise(u, *space, model, 10).coeffs);
}

TEST(NoiseTest, MappedCovarianceMatchesSensorMatrix) {
  Grid grid(0.0, 2 * kPi, 128);
  auto space = boxes(grid, 8);
  const Eigen::MatrixXd a = space->sensor_matrix();
  // Sensor readings s = A c, so c = A^{-1} s has covariance sigma^2 (A^T A)^{-1}.
  const Eigen::MatrixXd oracle = 0.49 * (a.transpose() * a).inverse();
  EXPECT_LE((mapped_noise_covariance(*space, linear(0.3, 0.7)) - oracle).cwiseAbs().maxCoeff(),
            1e-10 * oracle.cwiseAbs().maxCoeff());
}

TEST(NoiseTest, MonteCarloMomentsMatchModel) {
  Grid grid(0.0, 2 * kPi, 256);
  auto space = boxes(grid, 50);
  auto u = GridFunction::from_function(grid, [](double x) { return 30.0 * std::sin(x); });
  auto model = linear(0.1, 0.5);
  const int draws = 2000;
  const Eigen::MatrixXd cov = mapped_noise_covariance(*space, model);
  const Eigen::VectorXd mean_expected = 1.1 * observe(u, *space).coeffs;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(50);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(50);
  for (int s = 0; s < draws; ++s) {
    Eigen::VectorXd c = apply_noise(u, *space, model, derive_seed(123, {std::uint64_t(s)})).coeffs;
    sum += c;
    sq += (c - mean_expected).cwiseAbs2();
  }
  const Eigen::VectorXd mean = sum / draws;
  for (int i = 0; i < 50; ++i) {
    const double sd = std::sqrt(cov(i, i));
    EXPECT_LE(std::abs(mean[i] - mean_expected[i]), 3.5 * sd / std::sqrt(draws)) << i;
  }
  // Total variance is a sum of 50 coordinates, so its relative error is small.
  EXPECT_NEAR(sq.sum() / draws, cov.trace(), 0.1 * cov.trace());
}

TEST(ExpectationTest, LinearModelIsScaledProjection) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(3);
  auto space = boxes(grid, 10);
  auto u = testing::random_function(grid, rng);
  auto e = noise_expectation(u, *space, linear(0.2, 1.0), 4);
  EXPECT_LE((e.coeffs - 1.2 * observe(u, *space).coeffs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExpectationTest, MonteCarloAgreesWithAnalytic) {
  Grid grid(0.0, 2 * kPi, 128);
  auto space = boxes(grid, 6);
  auto u = GridFunction::from_function(grid, [](double x) { return 10.0 * std::cos(x); });
  auto model = linear(0.1, 0.4);
  model.mc_samples = 10000;
  auto mc = monte_carlo_expectation(u, *space, model, 77);
  auto exact = noise_expectation(u, *space, model, 77);
  const Eigen::MatrixXd cov = mapped_noise_covariance(*space, model);
  for (int i = 0; i < 6; ++i) {
    EXPECT_LE(std::abs(mc.coeffs[i] - exact.coeffs[i]), 4.0 * std::sqrt(cov(i, i) / 1e4)) << i;
  }
}

TEST(DiscrepancyTest, LinearModelValues) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(5);
  auto space = boxes(grid, 8);
  auto u = testing::random_function(grid, rng);
  const Eigen::VectorXd pw = observe(u, *space).coeffs;
  EXPECT_LE(discrepancy_xi(u, *space, linear(0.0, 0.3), 1).coeffs.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((discrepancy_xi(u, *space, linear(0.1, 0.3), 1).coeffs + 0.1 * pw).cwiseAbs().maxCoeff(),
            1e-12);
  auto constant = GridFunction::from_function(grid, [](double) { return 1.0; });
  auto xi = discrepancy_xi(constant, *space, linear(0.1, 0.0), 1);
  // Box averages of a constant read exactly 1, so xi reads -0.1 at every sensor.
  EXPECT_LE((xi.sensor_values().array() + 0.1).abs().maxCoeff(), 1e-12);
}

TEST(EmpiricalTableTest, OffsetsAndRange) {
  EmpiricalTable table{{0.0, 0.5, 2.0}, {0.1, 0.3}};
  EXPECT_EQ(table.offset_for(0.0), 0.1);
  EXPECT_EQ(table.offset_for(0.5), 0.3);
  EXPECT_EQ(table.offset_for(2.0), 0.3);
  EXPECT_THROW(table.offset_for(2.5), std::out_of_range);
  EXPECT_THROW((EmpiricalTable{{1.0, 0.0}, {0.1}}.validate()), std::invalid_argument);

  Grid grid(0.0, 1.0, 101);
  auto space = boxes(grid, 5);
  NoiseModel model;
  model.kind = NoiseKind::kEmpiricalTable;
  model.table = table;
  auto one = GridFunction::from_function(grid, [](double) { return 1.0; });
  auto d = apply_noise(one, *space, model, 3);
  EXPECT_LE((d.sensor_values().array() - 1.3).abs().maxCoeff(), 1e-12);
  EXPECT_FALSE(model.has_analytic_expectation());
}

TEST(BpbdwTest, NoBiasEqualsPbdw) {
  Grid grid(0.0, 2 * kPi, 256);
  auto training = sample_sinusoids(SinusoidSpec{}, grid, 64, 1);
  auto space = boxes(grid, 25);
  PbdwSolver solver(pod(training, 5).subspace, space);
  auto truth = sample_sinusoids(SinusoidSpec{}, grid, 1, 2).snapshots[0];
  auto omega = observe(truth, *space);
  auto result = bpbdw_reconstruct(solver, omega, linear(0.0, 0.0), 3);
  EXPECT_LE(norm(result.corrected.state - solver.solve(omega).state), 1e-9 * norm(truth));
}

TEST(BpbdwTest, ReducesBiasedError) {
  Grid grid(0.0, 2 * kPi, 512);
  auto training = sample_sinusoids(SinusoidSpec{}, grid, 128, 11);
  auto space = boxes(grid, 25);
  PbdwSolver solver(pod(training, 5).subspace, space);
  const double amplitude = 32.0;
  auto truth = GridFunction::from_function(
      grid, [&](double x) { return sinusoid_value(amplitude, 1.5 * kPi, x); });
  auto model = linear(0.2, amplitude / 10.0);
  auto omega = apply_noise(truth, *space, model, 12);
  auto result = bpbdw_reconstruct(solver, omega, model, 13);
  EXPECT_LT(norm(result.corrected.state - truth), norm(result.initial.state - truth));
}

TEST(BpbdwTest, LinearChainErrorIsAlphaSquared) {
  Grid grid(0.0, 2 * kPi, 256);
  std::mt19937_64 rng(21);
  auto space = boxes(grid, 12);
  Subspace v = pod(sample_sinusoids(SinusoidSpec{}, grid, 64, 22), 5).subspace;
  PbdwSolver solver(v, space);
  auto truth = v.combine(testing::random_vector(rng, 5));
  for (double alpha : {0.05, 0.1, 0.2}) {
    auto model = linear(alpha, 0.0);
    auto result = bpbdw_reconstruct(solver, apply_noise(truth, *space, model, 1), model, 2);
    // u0 = (1 + a) u, eta = (1 - a)(1 + a) P_W u, so u* = (1 - a^2) u.
    EXPECT_NEAR(norm(result.initial.state - truth) / norm(truth), alpha, 1e-10);
    EXPECT_NEAR(norm(result.corrected.state - truth) / norm(truth), alpha * alpha, 1e-10);
  }
}

TEST(BpbdwTest, CorrectorDefinition) {
  Grid grid(0.0, 2 * kPi, 128);
  std::mt19937_64 rng(31);
  auto space = boxes(grid, 10);
  PbdwSolver solver(testing::random_subspace(grid, 3, rng), space);
  auto model = linear(0.15, 0.2);
  auto omega = make_measurement(*space, testing::random_vector(rng, 10));
  auto result = bpbdw_reconstruct(solver, omega, model, 4);
  const Eigen::VectorXd pw = observe(result.initial.state, *space).coeffs;
  EXPECT_LE((result.corrector.coeffs - (1.0 - 0.15) * pw).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((result.corrected.state - solver.solve(result.corrector).state).values().cwiseAbs().maxCoeff(),
            1e-12);
}

}  // namespace
}  // namespace assim
