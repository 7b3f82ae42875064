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
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace assim {

ReducedBasis ReducedBasis::leading(int n) const {
  return ReducedBasis{subspace.leading(n), singular_values, source};
}

ReducedBasis pod(const SnapshotSet& snapshots, int n) {
  const int count = static_cast<int>(snapshots.size());
  if (n < 1 || n > count) {
    throw std::invalid_argument("pod: requested " + std::to_string(n) + " modes from " +
                                std::to_string(count) + " snapshots");
  }
  const Grid& grid = snapshots.grid;
  for (const auto& s : snapshots.snapshots) require_same_grid(grid, s.grid());
  if (n > grid.num_points()) {
    throw std::invalid_argument("pod: more modes than grid nodes");
  }

  const Eigen::VectorXd sqrt_w = grid.weights().cwiseSqrt();
  const Eigen::MatrixXd scaled = sqrt_w.asDiagonal() * snapshots.matrix();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU);
  Eigen::MatrixXd modes = sqrt_w.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(n);

  for (int j = 0; j < n; ++j) {
    Eigen::Index arg = 0;
    modes.col(j).cwiseAbs().maxCoeff(&arg);
    if (modes(arg, j) < 0) modes.col(j) *= -1.0;
  }
  return ReducedBasis{Subspace(grid, std::move(modes)), svd.singularValues(), snapshots.label};
}

ApproximationError approximation_error_detail(const SnapshotSet& validation,
                                              const Subspace& basis) {
  if (validation.empty()) throw std::invalid_argument("approximation_error: empty validation set");
  ApproximationError out;
  out.residuals.reserve(validation.size());
  for (const auto& u : validation.snapshots) {
    const double r = norm(u - project_onto(u, basis));
    out.residuals.push_back(r);
    out.max = std::max(out.max, r);
  }
  return out;
}

double approximation_error(const SnapshotSet& validation, const Subspace& basis) {
  return approximation_error_detail(validation, basis).max;
}

double approximation_error(const SnapshotSet& validation, const ReducedBasis& basis) {
  return approximation_error(validation, basis.subspace);
}

void write_spectrum_csv(std::ostream& out, const ReducedBasis& basis) {
  const Eigen::VectorXd& s = basis.singular_values;
  const double total = s.squaredNorm();
  double cumulative = 0.0;
  char buf[96];
  out << "mode,singular_value,cumulative_energy\n";
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    cumulative += s[j] * s[j];
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(j + 1), s[j],
                  total > 0 ? cumulative / total : 0.0);
    out << buf;
  }
}

}  // namespace assim
