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

#ifndef ASSIM_BIAS_HPP_
#define ASSIM_BIAS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "assim/obs.hpp"
#include "assim/solver.hpp"

namespace assim {

enum class NoiseKind { kLinearBiasGaussian, kEmpiricalTable };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Piecewise-constant mean offset as a function of the clean sensor reading.
/// Bin j covers [edges[j], edges[j+1]); the last bin is closed on the right.
struct EmpiricalTable {
  std::vector<double> edges;
  std::vector<double> offsets;

  void validate() const;
  /// Throws std::out_of_range for readings outside [edges.front(), edges.back()].
  double offset_for(double reading) const;
};

/// Randomized observation operator R: V -> W_m.
///
/// linear_bias_gaussian: each sensor reads l_i((1 + alpha) u) + N(0, sigma^2).
/// empirical_table: each sensor reads l_i(u) + offset(l_i(u)) + N(0, sigma^2).
/// Noise is drawn per physical sensor and then mapped to orthonormal coordinates.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kLinearBiasGaussian;
  double alpha = 0.0;
  double sigma = 0.0;
  int mc_samples = 1000;
  EmpiricalTable table;

  void validate() const;
  bool has_analytic_expectation() const { return kind == NoiseKind::kLinearBiasGaussian; }
};

/// One draw of R(u); deterministic in `seed`.
Measurement apply_noise(const GridFunction& u, const ObservationSpace& space,
                        const NoiseModel& model, std::uint64_t seed);

/// Noisy observation when a model is given, P_W u otherwise.
Measurement observe(const GridFunction& u, const ObservationSpace& space,
                    const NoiseModel* model, std::uint64_t seed);

/// Covariance of the orthonormal coordinates induced by the sensor noise.
Eigen::MatrixXd mapped_noise_covariance(const ObservationSpace& space, const NoiseModel& model);

/// Mean of model.mc_samples independent draws, sample k seeded from (seed, k).
Measurement monte_carlo_expectation(const GridFunction& u, const ObservationSpace& space,
                                    const NoiseModel& model, std::uint64_t seed);

/// E[R(u)]: (1 + alpha) P_W u for the linear model, Monte Carlo otherwise.
Measurement noise_expectation(const GridFunction& u, const ObservationSpace& space,
                              const NoiseModel& model, std::uint64_t seed);

/// xi(u) = P_W u - E[R(u)].
Measurement discrepancy_xi(const GridFunction& u, const ObservationSpace& space,
                           const NoiseModel& model, std::uint64_t seed);

/// eta(omega*) = P_W u0 + xi(u0) for a first-pass reconstruction u0.
Measurement bias_corrector(const GridFunction& first_pass, const ObservationSpace& space,
                           const NoiseModel& model, std::uint64_t seed);

struct BiasCorrectedReconstruction {
  Reconstruction initial;   // u0*, classical PBDW on omega*
  Measurement corrector;    // eta(omega*)
  Reconstruction corrected; // PBDW on eta(omega*)
};

/// Two-step bias-corrected PBDW. When `box` is non-null both solves are boxed.
BiasCorrectedReconstruction bpbdw_reconstruct(const PbdwSolver& solver,
                                              const Measurement& omega_star,
                                              const NoiseModel& model, std::uint64_t seed,
                                              const CoefficientBox* box = nullptr);

BiasCorrectedReconstruction bpbdw_reconstruct(const Measurement& omega_star,
                                              const Subspace& background,
                                              const ObservationSpace& space,
                                              const NoiseModel& model, std::uint64_t seed,
                                              const CoefficientBox* box = nullptr);

}  // namespace assim

#endif  // ASSIM_BIAS_HPP_
