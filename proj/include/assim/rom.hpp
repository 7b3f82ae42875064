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

#ifndef ASSIM_ROM_HPP_
#define ASSIM_ROM_HPP_

#include <iosfwd>
#include <vector>

#include "assim/manifold.hpp"
#include "assim/space.hpp"

namespace assim {

struct ReducedBasis {
  Subspace subspace;
  /// Every POD singular value of the weighted snapshot matrix, nonincreasing.
  Eigen::VectorXd singular_values;
  SnapshotLabel source = SnapshotLabel::kFull;

  int dimension() const { return subspace.dimension(); }
  /// Same spectrum, first `n` modes.
  ReducedBasis leading(int n) const;
};

/// Proper orthogonal decomposition without mean-centering.
///
/// Snapshots are scaled by sqrt(w_k) nodewise, factorized with a thin SVD and
/// unscaled again, so the returned modes are orthonormal in the trapezoid inner
/// product. Each mode is signed so its largest-magnitude entry is positive.
ReducedBasis pod(const SnapshotSet& snapshots, int n);

struct ApproximationError {
  double max = 0.0;
  std::vector<double> residuals;  // ||u - P u|| per validation snapshot
};

ApproximationError approximation_error_detail(const SnapshotSet& validation,
                                              const Subspace& basis);

/// max over the set of ||u - P_{V_n} u||.
double approximation_error(const SnapshotSet& validation, const ReducedBasis& basis);
double approximation_error(const SnapshotSet& validation, const Subspace& basis);

// Columns: mode,singular_value,cumulative_energy.
void write_spectrum_csv(std::ostream& out, const ReducedBasis& basis);

}  // namespace assim

#endif  // ASSIM_ROM_HPP_
