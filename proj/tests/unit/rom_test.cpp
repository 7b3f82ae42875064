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

#include "assim/rom.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace assim {
namespace {

constexpr double kPi = std::numbers::pi;

SnapshotSet make_set(const Grid& grid, std::vector<GridFunction> fns) {
  SnapshotSet set{grid, std::move(fns), {}, SnapshotLabel::kFull, 0};
  set.parameters.resize(set.snapshots.size());
  return set;
}

TEST(PodTest, SingleSnapshot) {
  Grid grid(0.0, 1.0, 30);
  std::mt19937_64 rng(1);
  auto u = testing::random_function(grid, rng);
  auto basis = pod(make_set(grid, {u}), 1);
  Eigen::VectorXd expected = u.values() / norm(u);
  Eigen::Index at;
  expected.cwiseAbs().maxCoeff(&at);
  if (expected[at] < 0) expected = -expected;
  EXPECT_LE((basis.subspace.basis().col(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(basis.singular_values[0], norm(u), 1e-12);
}

TEST(PodTest, OrthogonalSnapshotsGramEigenOracle) {
  Grid grid(0.0, 1.0, 40);
  std::mt19937_64 rng(2);
  Subspace q = testing::random_subspace(grid, 3, rng);
  const double scales[] = {0.5, 3.0, 1.5};
  std::vector<GridFunction> fns;
  for (int i = 0; i < 3; ++i) fns.push_back(scales[i] * q.element(i));
  auto set = make_set(grid, fns);
  auto basis = pod(set, 3);

  // Oracle: eigenpairs of the snapshot Gram matrix K_ij = <u_i, u_j>.
  Eigen::MatrixXd k(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = testing::quadrature(grid, fns[i].values(), fns[j].values());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(basis.singular_values[i], std::sqrt(eig.eigenvalues()[2 - i]), 1e-12);
  }
  EXPECT_NEAR(std::abs(inner_product(basis.subspace.element(0), q.element(1))), 1.0, 1e-12);
  for (const auto& f : fns) EXPECT_LE(norm(f - project_onto(f, basis.subspace)), 1e-12);
}

TEST(PodTest, NumericalRankReproduces) {
  Grid grid(0.0, 2 * kPi, 200);
  // a sin(x + phi) lives in span{sin, cos}: rank 2.
  std::vector<GridFunction> fns;
  for (int i = 0; i < 12; ++i) {
    fns.push_back(GridFunction::from_function(
        grid, [&](double x) { return (1.0 + i) * std::sin(x + 0.3 * i); }));
  }
  auto basis = pod(make_set(grid, fns), 2);
  for (const auto& f : fns) EXPECT_LE(norm(f - project_onto(f, basis.subspace)), 1e-10 * norm(f));
}

TEST(PodTest, EnergyIdentityAndOrdering) {
  Grid grid(0.0, 2 * kPi, 128);
  auto set = sample_sinusoids(SinusoidSpec{}, grid, 30, 3);
  auto basis = pod(set, 10);
  double energy = 0.0;
  for (const auto& s : set.snapshots) energy += inner_product(s, s);
  EXPECT_NEAR(basis.singular_values.squaredNorm(), energy, 1e-8 * energy);
  for (int i = 1; i < basis.singular_values.size(); ++i) {
    EXPECT_LE(basis.singular_values[i], basis.singular_values[i - 1]);
  }
  const Eigen::MatrixXd gram = weighted_cross(grid, basis.subspace.basis(), basis.subspace.basis());
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PodTest, SignConvention) {
  Grid grid(0.0, 2 * kPi, 128);
  auto basis = pod(sample_sinusoids(SinusoidSpec{}, grid, 20, 4), 6);
  for (int j = 0; j < 6; ++j) {
    Eigen::Index at;
    basis.subspace.basis().col(j).cwiseAbs().maxCoeff(&at);
    EXPECT_GT(basis.subspace.basis()(at, j), 0.0);
  }
}

TEST(PodTest, TooManyModesThrows) {
  Grid grid(0.0, 1.0, 10);
  std::mt19937_64 rng(5);
  auto set = make_set(grid, testing::random_functions(grid, 3, rng));
  EXPECT_THROW(pod(set, 4), std::invalid_argument);
  EXPECT_THROW(pod(set, 0), std::invalid_argument);
}

TEST(ApproximationErrorTest, ContainedSetIsZero) {
  Grid grid(0.0, 1.0, 25);
  std::mt19937_64 rng(6);
  Subspace v = testing::random_subspace(grid, 3, rng);
  std::vector<GridFunction> fns;
  for (int i = 0; i < 5; ++i) fns.push_back(v.combine(testing::random_vector(rng, 3)));
  EXPECT_LE(approximation_error(make_set(grid, fns), v), 1e-10);
}

TEST(ApproximationErrorTest, EmptyBasisGivesMaxNorm) {
  Grid grid(0.0, 1.0, 25);
  std::mt19937_64 rng(7);
  auto fns = testing::random_functions(grid, 4, rng);
  double expected = 0.0;
  for (const auto& f : fns) expected = std::max(expected, norm(f));
  EXPECT_DOUBLE_EQ(approximation_error(make_set(grid, fns), Subspace::empty(grid)), expected);
}

TEST(ApproximationErrorTest, MatchesGramProjectionOracle) {
  Grid grid(0.0, 2 * kPi, 128);
  auto training = sample_sinusoids(SinusoidSpec{}, grid, 40, 8);
  auto validation = sample_sinusoids(SinusoidSpec{}, grid, 10, 9);
  auto basis = pod(training, 2);
  // Oracle: weighted least squares against the raw basis through its Gram matrix.
  const Eigen::MatrixXd& b = basis.subspace.basis();
  const Eigen::VectorXd w = grid.weights();
  const Eigen::MatrixXd gram = b.transpose() * w.asDiagonal() * b;
  double oracle = 0.0;
  for (const auto& u : validation.snapshots) {
    const Eigen::VectorXd c = gram.ldlt().solve(b.transpose() * w.asDiagonal() * u.values());
    const Eigen::VectorXd r = u.values() - b * c;
    oracle = std::max(oracle, std::sqrt(testing::quadrature(grid, r, r)));
  }
  EXPECT_NEAR(approximation_error(validation, basis), oracle, 1e-12 * std::max(1.0, oracle));
}

TEST(ApproximationErrorTest, NonincreasingInN) {
  Grid grid(0.0, 2 * kPi, 128);
  auto training = sample_sinusoids(SinusoidSpec{}, grid, 40, 10);
  auto basis = pod(training, 15);
  double previous = approximation_error(training, Subspace::empty(grid));
  for (int n = 1; n <= 15; ++n) {
    const double e = approximation_error(training, basis.leading(n));
    EXPECT_LE(e, previous + 1e-12);
    previous = e;
  }
}

TEST(ApproximationErrorTest, EmptyValidationThrows) {
  Grid grid(0.0, 1.0, 5);
  EXPECT_THROW(approximation_error(make_set(grid, {}), Subspace::empty(grid)), std::invalid_argument);
}

TEST(ApproximationErrorTest, FullManifoldDecaysSlowerThanFast) {
  Grid grid(0.0, 2 * kPi, 256);
  auto training = sample_multiscale(MultiscaleSpec{}, grid, 100, 11);
  auto validation = sample_multiscale(MultiscaleSpec{}, grid, 20, 12);
  auto fast = pod(training.fast, 20);
  auto full = pod(training.full, 20);
  for (int n = 15; n <= 20; ++n) {
    EXPECT_GT(approximation_error(validation.full, full.leading(n)),
              approximation_error(validation.fast, fast.leading(n)));
  }
}

TEST(SpectrumCsvTest, Header) {
  Grid grid(0.0, 2 * kPi, 64);
  auto basis = pod(sample_sinusoids(SinusoidSpec{}, grid, 5, 1), 2);
  std::ostringstream out;
  write_spectrum_csv(out, basis);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "mode,singular_value,cumulative_energy");
}

}  // namespace
}  // namespace assim
