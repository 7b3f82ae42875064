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

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "assim/error.hpp"

namespace assim {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(HeavisideTest, ClosedOnTheRight) {
  Grid grid(0.0, 1.0, 11);
  auto hs = heaviside(grid, 0.5);
  EXPECT_EQ(hs[4], 0.0);
  EXPECT_EQ(hs[5], 1.0);
  EXPECT_EQ(hs[10], 1.0);
}

TEST(SinusoidTest, DegenerateRangesGiveSine) {
  Grid grid(0.0, 2 * kPi, 128);
  SinusoidSpec spec{{1.0, 1.0}, {2 * kPi, 2 * kPi}};
  auto set = sample_sinusoids(spec, grid, 4, 11);
  ASSERT_EQ(set.size(), 4u);
  for (const auto& s : set.snapshots) {
    for (int k = 0; k < grid.num_points(); ++k) EXPECT_NEAR(s[k], std::sin(grid.node(k)), 1e-12);
  }
}

TEST(SinusoidTest, DeterministicInSeed) {
  Grid grid(0.0, 2 * kPi, 64);
  SinusoidSpec spec;
  auto a = sample_sinusoids(spec, grid, 5, 42);
  auto b = sample_sinusoids(spec, grid, 5, 42);
  auto c = sample_sinusoids(spec, grid, 5, 43);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(a.snapshots[k].values(), b.snapshots[k].values());
  EXPECT_NE(a.snapshots[0].values(), c.snapshots[0].values());
  EXPECT_EQ(a.parameters, b.parameters);
}

TEST(SinusoidTest, AmplitudeSampleMean) {
  Grid grid(0.0, 2 * kPi, 16);
  SinusoidSpec spec;
  const int count = 1000;
  auto set = sample_sinusoids(spec, grid, count, 5);
  double sum = 0.0;
  for (const auto& rec : set.parameters) {
    const double a = parameter(rec, "amplitude");
    EXPECT_GE(a, spec.amplitude.lo);
    EXPECT_LE(a, spec.amplitude.hi);
    sum += a;
  }
  const double width = spec.amplitude.hi - spec.amplitude.lo;
  const double stderr_mean = width / std::sqrt(12.0) / std::sqrt(double(count));
  EXPECT_LE(std::abs(sum / count - spec.amplitude.mid()), 3 * stderr_mean);
}

TEST(SinusoidTest, BoundedByMaxAmplitude) {
  Grid grid(0.0, 2 * kPi, 200);
  SinusoidSpec spec;
  auto set = sample_sinusoids(spec, grid, 50, 3);
  for (const auto& s : set.snapshots) EXPECT_LE(s.values().cwiseAbs().maxCoeff(), spec.amplitude.hi);
}

TEST(SinusoidTest, RejectsBadSpec) {
  Grid grid(0.0, 1.0, 8);
  SinusoidSpec spec{{2.0, 1.0}, {1.0, 2.0}};
  EXPECT_THROW(sample_sinusoids(spec, grid, 3, 1), std::invalid_argument);
  EXPECT_THROW(sample_sinusoids(SinusoidSpec{}, grid, 0, 1), std::invalid_argument);
}

TEST(MultiscaleTest, ZeroJumpHeightMeansNoSlowPart) {
  Grid grid(0.0, 2 * kPi, 128);
  MultiscaleSpec spec;
  spec.jump_height = {0.0, 0.0};
  auto set = sample_multiscale(spec, grid, 6, 9);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(set.slow.snapshots[k].values().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(set.full.snapshots[k].values(), set.fast.snapshots[k].values());
  }
}

TEST(MultiscaleTest, ClosedFormSingleFrequency) {
  Grid grid(0.0, 2 * kPi, 101);
  MultiscaleSpec spec;
  spec.num_frequencies = 1;
  spec.amplitude = {1.0, 1.0};
  spec.period = {2 * kPi, 2 * kPi};
  spec.phase = {0.0, 0.0};
  spec.jump_location = {kPi, kPi};
  spec.jump_height = {1.0, 1.0};
  auto set = sample_multiscale(spec, grid, 2, 1);
  auto hs = heaviside(grid, kPi);
  for (int k = 0; k < grid.num_points(); ++k) {
    EXPECT_NEAR(set.full.snapshots[0][k], std::sin(grid.node(k)) + hs[k], 1e-12);
  }
}

TEST(MultiscaleTest, FullIsFastPlusSlowExactly) {
  Grid grid(0.0, 2 * kPi, 256);
  auto set = sample_multiscale(MultiscaleSpec{}, grid, 20, 77);
  EXPECT_EQ(set.fast.label, SnapshotLabel::kFast);
  EXPECT_EQ(set.slow.label, SnapshotLabel::kSlow);
  for (std::size_t k = 0; k < set.full.size(); ++k) {
    const Eigen::VectorXd sum = set.fast.snapshots[k].values() + set.slow.snapshots[k].values();
    EXPECT_EQ(set.full.snapshots[k].values(), sum);
    EXPECT_EQ(set.fast.parameters[k], set.full.parameters[k]);
  }
}

TEST(MultiscaleTest, JumpRangeMustBeInterior) {
  Grid grid(0.0, 2 * kPi, 64);
  MultiscaleSpec spec;
  spec.jump_location = {0.0, kPi};
  EXPECT_THROW(sample_multiscale(spec, grid, 2, 1), std::invalid_argument);
}

TEST(PowerLawTest, ParabolicProfile) {
  Grid grid(-0.5, 0.5, 101);
  PowerLawSpec spec{{50.0, 50.0}, {1.0, 1.0}, 0.5};
  auto set = sample_powerlaw(spec, grid, 1, 1);
  const auto& u = set.snapshots[0];
  EXPECT_NEAR(u[50], 50.0, 1e-12);
  EXPECT_NEAR(u[0], 0.0, 1e-12);
  EXPECT_NEAR(u[100], 0.0, 1e-12);
  for (int k = 0; k < grid.num_points(); ++k) {
    const double r = grid.node(k);
    EXPECT_NEAR(u[k], 50.0 * (1 - (r / 0.5) * (r / 0.5)), 1e-11);
  }
}

TEST(PowerLawTest, ZeroPeakGivesZero) {
  Grid grid(-0.5, 0.5, 33);
  PowerLawSpec spec{{0.0, 0.0}, {0.8, 1.2}, 0.5};
  auto set = sample_powerlaw(spec, grid, 3, 2);
  for (const auto& s : set.snapshots) EXPECT_EQ(s.values().cwiseAbs().maxCoeff(), 0.0);
}

// The exponent 1 + 1/n tends to 1 (a cone) for large n and to infinity
// (plug flow) for small n.
TEST(PowerLawTest, FlowIndexLimits) {
  const double v0 = 50.0;
  const double r = 0.25;
  EXPECT_NEAR(powerlaw_value(v0, 100.0, 0.5, r), v0 * (1 - std::pow(0.5, 1.01)), 1e-12);
  EXPECT_GE(powerlaw_value(v0, 0.01, 0.5, r), 0.95 * v0);
}

TEST(PowerLawTest, SymmetricAndBounded) {
  Grid grid(-0.5, 0.5, 64);
  PowerLawSpec spec;
  auto set = sample_powerlaw(spec, grid, 20, 4);
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto& u = set.snapshots[k];
    const double v0 = parameter(set.parameters[k], "peak_velocity");
    for (int i = 0; i < grid.num_points(); ++i) {
      EXPECT_NEAR(u[i], u[grid.num_points() - 1 - i], 1e-12);
      EXPECT_GE(u[i], 0.0);
      EXPECT_LE(u[i], v0);
    }
  }
}

TEST(PowerLawTest, GridMustMatchRadius) {
  EXPECT_THROW(sample_powerlaw(PowerLawSpec{}, Grid(0.0, 1.0, 16), 2, 1), IncompatibleGridError);
}

TEST(SnapshotExportTest, CsvAndJson) {
  Grid grid(0.0, 1.0, 3);
  SinusoidSpec spec{{1.0, 1.0}, {1.0, 1.0}};
  auto set = sample_sinusoids(spec, grid, 2, 8);
  std::ostringstream csv;
  write_snapshots_csv(csv, set);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "x,s0,s1");
  std::ostringstream json;
  write_snapshots_json(json, set);
  EXPECT_NE(json.str().find("\"seed\""), std::string::npos);
  EXPECT_NE(json.str().find("\"amplitude\""), std::string::npos);
}

TEST(ParameterTest, MissingNameThrows) {
  ParameterRecord rec{{"a", 1.0}};
  EXPECT_EQ(parameter(rec, "a"), 1.0);
  EXPECT_THROW(parameter(rec, "b"), std::out_of_range);
}

}  // namespace
}  // namespace assim
