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

#ifndef ASSIM_SOLVER_HPP_
#define ASSIM_SOLVER_HPP_

#include <iosfwd>

#include "assim/manifold.hpp"
#include "assim/obs.hpp"
#include "assim/space.hpp"

namespace assim {

struct Reconstruction {
  GridFunction state;                 // u*
  Eigen::VectorXd rom_coeffs;         // component in V_n
  Eigen::VectorXd correction_coeffs;  // component in W_m (orthonormal coordinates)
  double beta = 0.0;
  double constraint_residual = 0.0;   // ||P_W u* - target|| in coordinates
};

/// Per-coefficient bounds lo <= c <= hi for the background coordinates.
struct CoefficientBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  void validate(int n) const;
};

struct BoundedLsqResult {
  Eigen::VectorXd x;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
};

/// min ||A x - b|| subject to lo <= x <= hi for full-column-rank A, by a
/// primal active-set iteration.
BoundedLsqResult bounded_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// Reusable PBDW operator for a fixed pair (V_n, W_m).
///
/// With d the target coordinates and G the cross-Gramian, the background
/// coordinates solve min_c ||G c - d|| and the state is V c + W (d - G c).
/// That state satisfies P_W u* = target and is the closest state to V_n
/// among all states meeting the constraint.
class PbdwSolver {
 public:
  static constexpr double kBetaThreshold = 1e-12;

  /// Throws IllPosedError when n > m or beta <= kBetaThreshold.
  PbdwSolver(Subspace background, ObservationSpacePtr space);

  const Subspace& background() const { return background_; }
  const ObservationSpace& space() const { return *space_; }
  const ObservationSpacePtr& space_ptr() const { return space_; }
  const Eigen::MatrixXd& cross_gramian() const { return gramian_; }
  /// Inf-sup constant of the pair; 1 for an empty background.
  double beta() const { return beta_; }

  Reconstruction solve(const Measurement& target) const;
  Reconstruction solve_coefficients(const Eigen::VectorXd& target) const;
  Reconstruction solve_boxed(const Measurement& target, const CoefficientBox& box) const;

 private:
  Reconstruction assemble(const Eigen::VectorXd& target, Eigen::VectorXd rom) const;
  void require_target(const Measurement& target) const;

  Subspace background_;
  ObservationSpacePtr space_;
  Eigen::MatrixXd gramian_;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
  double beta_ = 1.0;
};

Reconstruction pbdw_solve(const Measurement& target, const Subspace& background,
                          const ObservationSpace& space);
/// Target given as an element of W_m.
Reconstruction pbdw_solve(const GridFunction& target, const Subspace& background,
                          const ObservationSpace& space);
Reconstruction pbdw_solve_boxed(const Measurement& target, const Subspace& background,
                                const ObservationSpace& space, const CoefficientBox& box);

/// Range of the background coordinates <u_k, v_j> over the snapshots, widened
/// about its midpoint by `margin`.
CoefficientBox compute_box(const SnapshotSet& snapshots, const Subspace& background,
                           double margin = 1.1);

void write_reconstruction_csv(std::ostream& out, const Reconstruction& rec);
void write_reconstruction_json(std::ostream& out, const Reconstruction& rec);

}  // namespace assim

#endif  // ASSIM_SOLVER_HPP_
