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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "assim/rng.hpp"

namespace assim {

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::kLinearBiasGaussian ? "linear_bias_gaussian" : "empirical_table";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "linear_bias_gaussian") return NoiseKind::kLinearBiasGaussian;
  if (name == "empirical_table") return NoiseKind::kEmpiricalTable;
  throw std::invalid_argument("unknown noise kind '" + name + "'");
}

void EmpiricalTable::validate() const {
  if (edges.size() < 2 || offsets.size() + 1 != edges.size()) {
    throw std::invalid_argument("EmpiricalTable: need k+1 edges for k offsets (k >= 1)");
  }
  for (std::size_t j = 1; j < edges.size(); ++j) {
    if (!(edges[j] > edges[j - 1])) {
      throw std::invalid_argument("EmpiricalTable: edges must be strictly increasing");
    }
  }
}

double EmpiricalTable::offset_for(double reading) const {
  if (!(reading >= edges.front() && reading <= edges.back())) {
    throw std::out_of_range("EmpiricalTable: reading " + std::to_string(reading) +
                            " outside the tabulated range");
  }
  const auto it = std::upper_bound(edges.begin(), edges.end(), reading);
  const auto bin = std::min<std::ptrdiff_t>(it - edges.begin() - 1,
                                            static_cast<std::ptrdiff_t>(offsets.size()) - 1);
  return offsets[bin];
}

void NoiseModel::validate() const {
  if (!(sigma >= 0)) throw std::invalid_argument("NoiseModel: sigma must be nonnegative");
  if (mc_samples < 1) throw std::invalid_argument("NoiseModel: mc_samples must be >= 1");
  if (!std::isfinite(alpha)) throw std::invalid_argument("NoiseModel: alpha must be finite");
  if (kind == NoiseKind::kEmpiricalTable) table.validate();
}

Measurement apply_noise(const GridFunction& u, const ObservationSpace& space,
                        const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  Eigen::VectorXd readings = space.sensor_values(u);
  if (model.kind == NoiseKind::kLinearBiasGaussian) {
    readings *= 1.0 + model.alpha;
  } else {
    for (Eigen::Index i = 0; i < readings.size(); ++i) {
      readings[i] += model.table.offset_for(readings[i]);
    }
  }
  if (model.sigma > 0) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, model.sigma);
    for (Eigen::Index i = 0; i < readings.size(); ++i) readings[i] += gauss(rng);
  }
  return make_measurement(space, space.coefficients_from_sensor_values(readings));
}

Measurement observe(const GridFunction& u, const ObservationSpace& space,
                    const NoiseModel* model, std::uint64_t seed) {
  return model ? apply_noise(u, space, *model, seed) : observe(u, space);
}

Eigen::MatrixXd mapped_noise_covariance(const ObservationSpace& space, const NoiseModel& model) {
  const Eigen::MatrixXd inv = space.sensor_matrix().inverse();
  return model.sigma * model.sigma * inv * inv.transpose();
}

Measurement monte_carlo_expectation(const GridFunction& u, const ObservationSpace& space,
                                    const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(space.dimension());
  for (int k = 0; k < model.mc_samples; ++k) {
    sum += apply_noise(u, space, model, derive_seed(seed, {static_cast<std::uint64_t>(k)})).coeffs;
  }
  return make_measurement(space, sum / model.mc_samples);
}

Measurement noise_expectation(const GridFunction& u, const ObservationSpace& space,
                              const NoiseModel& model, std::uint64_t seed) {
  if (model.has_analytic_expectation()) {
    model.validate();
    return make_measurement(space, (1.0 + model.alpha) * space.project_coefficients(u));
  }
  return monte_carlo_expectation(u, space, model, seed);
}

Measurement discrepancy_xi(const GridFunction& u, const ObservationSpace& space,
                           const NoiseModel& model, std::uint64_t seed) {
  const Eigen::VectorXd expected = noise_expectation(u, space, model, seed).coeffs;
  return make_measurement(space, space.project_coefficients(u) - expected);
}

Measurement bias_corrector(const GridFunction& first_pass, const ObservationSpace& space,
                           const NoiseModel& model, std::uint64_t seed) {
  const Eigen::VectorXd projected = space.project_coefficients(first_pass);
  const Eigen::VectorXd xi = discrepancy_xi(first_pass, space, model, seed).coeffs;
  return make_measurement(space, projected + xi);
}

BiasCorrectedReconstruction bpbdw_reconstruct(const PbdwSolver& solver,
                                              const Measurement& omega_star,
                                              const NoiseModel& model, std::uint64_t seed,
                                              const CoefficientBox* box) {
  auto run = [&](const Measurement& target) {
    return box ? solver.solve_boxed(target, *box) : solver.solve(target);
  };
  Reconstruction initial = run(omega_star);
  Measurement eta = bias_corrector(initial.state, solver.space(), model, seed);
  Reconstruction corrected = run(eta);
  return {std::move(initial), std::move(eta), std::move(corrected)};
}

BiasCorrectedReconstruction bpbdw_reconstruct(const Measurement& omega_star,
                                              const Subspace& background,
                                              const ObservationSpace& space,
                                              const NoiseModel& model, std::uint64_t seed,
                                              const CoefficientBox* box) {
  PbdwSolver solver(background, space.shared_from_this());
  return bpbdw_reconstruct(solver, omega_star, model, seed, box);
}

}  // namespace assim
