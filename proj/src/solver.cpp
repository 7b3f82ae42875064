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

#include "assim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "assim/error.hpp"
#include "json.hpp"

namespace assim {

void CoefficientBox::validate(int n) const {
  if (lo.size() != n || hi.size() != n) {
    throw std::invalid_argument("CoefficientBox: expected " + std::to_string(n) + " bounds");
  }
  for (int j = 0; j < n; ++j) {
    if (!(lo[j] <= hi[j])) {
      throw IllPosedError("CoefficientBox: infeasible bounds for coefficient " +
                          std::to_string(j) + " (lo > hi)");
    }
  }
}

BoundedLsqResult bounded_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(a.cols());
  const Eigen::MatrixXd h = a.transpose() * a;
  const Eigen::VectorXd g = a.transpose() * b;
  enum class State { kFree, kLower, kUpper };

  BoundedLsqResult out;
  if (n == 0) return out;

  // Start from the clamped unconstrained minimizer.
  Eigen::VectorXd x = h.ldlt().solve(g);
  std::vector<State> state(n, State::kFree);
  for (int j = 0; j < n; ++j) {
    if (x[j] <= lo[j]) {
      x[j] = lo[j];
      state[j] = State::kLower;
    } else if (x[j] >= hi[j]) {
      x[j] = hi[j];
      state[j] = State::kUpper;
    }
  }

  const double scale = std::max(1.0, g.norm());
  const int max_iters = 50 * n + 50;
  for (int it = 0; it < max_iters; ++it) {
    out.iterations = it + 1;
    std::vector<int> free;
    for (int j = 0; j < n; ++j) {
      if (state[j] == State::kFree) free.push_back(j);
    }

    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    if (!free.empty()) {
      const int nf = static_cast<int>(free.size());
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int p = 0; p < nf; ++p) {
        rhs[p] = g[free[p]];
        for (int j = 0; j < n; ++j) {
          if (state[j] != State::kFree) rhs[p] -= h(free[p], j) * x[j];
        }
        for (int q = 0; q < nf; ++q) hff(p, q) = h(free[p], free[q]);
      }
      const Eigen::VectorXd target = hff.ldlt().solve(rhs);
      for (int p = 0; p < nf; ++p) step[free[p]] = target[p] - x[free[p]];
    }

    if (step.norm() <= 1e-15 * (1.0 + x.norm())) {
      const Eigen::VectorXd grad = h * x - g;
      int release = -1;
      double worst = 1e-12 * scale;
      for (int j = 0; j < n; ++j) {
        if (lo[j] == hi[j]) continue;
        double violation = 0.0;
        if (state[j] == State::kLower) violation = -grad[j];
        if (state[j] == State::kUpper) violation = grad[j];
        if (violation > worst) {
          worst = violation;
          release = j;
        }
      }
      if (release < 0) break;
      state[release] = State::kFree;
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int j = 0; j < n; ++j) {
      if (state[j] != State::kFree || step[j] == 0.0) continue;
      const double limit = step[j] < 0 ? (lo[j] - x[j]) / step[j] : (hi[j] - x[j]) / step[j];
      if (limit < alpha) {
        alpha = limit;
        blocking = j;
      }
    }
    x += alpha * step;
    if (blocking >= 0) {
      const bool lower = step[blocking] < 0;
      x[blocking] = lower ? lo[blocking] : hi[blocking];
      state[blocking] = lower ? State::kLower : State::kUpper;
    }
    for (int j = 0; j < n; ++j) x[j] = std::clamp(x[j], lo[j], hi[j]);
  }

  const Eigen::VectorXd grad = h * x - g;
  double pg = 0.0;
  for (int j = 0; j < n; ++j) {
    double comp = grad[j];
    if (x[j] <= lo[j]) comp = std::min(comp, 0.0);
    if (x[j] >= hi[j]) comp = std::max(comp, 0.0);
    if (lo[j] == hi[j]) comp = 0.0;
    pg += comp * comp;
  }
  out.projected_gradient_norm = std::sqrt(pg);
  out.x = std::move(x);
  return out;
}

PbdwSolver::PbdwSolver(Subspace background, ObservationSpacePtr space)
    : background_(std::move(background)), space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("PbdwSolver: null observation space");
  require_same_grid(background_.grid(), space_->grid());
  const int n = background_.dimension();
  const int m = space_->dimension();
  if (n > m) {
    throw IllPosedError("PBDW needs n <= m (n = " + std::to_string(n) + ", m = " +
                        std::to_string(m) + "); reduce the background or add sensors");
  }
  gramian_ = assim::cross_gramian(background_, *space_);
  if (n == 0) return;
  svd_.compute(gramian_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  beta_ = svd_.singularValues().minCoeff();
  if (!(beta_ > kBetaThreshold)) {
    throw IllPosedError("inf-sup constant " + std::to_string(beta_) +
                        " is below the solvability threshold; use a smaller background "
                        "space or more sensors");
  }
}

void PbdwSolver::require_target(const Measurement& target) const {
  if (target.size() != space_->dimension()) {
    throw std::invalid_argument("PBDW target has " + std::to_string(target.size()) +
                                " coordinates, observation space has " +
                                std::to_string(space_->dimension()));
  }
  if (target.space && target.space != space_ && !(target.space->grid() == space_->grid())) {
    throw IncompatibleGridError("PBDW target belongs to a different discretization");
  }
}

Reconstruction PbdwSolver::assemble(const Eigen::VectorXd& target, Eigen::VectorXd rom) const {
  Eigen::VectorXd correction =
      background_.dimension() == 0 ? target : Eigen::VectorXd(target - gramian_ * rom);
  GridFunction state = space_->lift(correction);
  if (background_.dimension() > 0) state += background_.combine(rom);
  const double residual = (space_->project_coefficients(state) - target).norm();
  return Reconstruction{std::move(state), std::move(rom), std::move(correction), beta_, residual};
}

Reconstruction PbdwSolver::solve_coefficients(const Eigen::VectorXd& target) const {
  if (target.size() != space_->dimension()) {
    throw std::invalid_argument("PBDW target dimension mismatch");
  }
  if (background_.dimension() == 0) return assemble(target, Eigen::VectorXd(0));
  return assemble(target, svd_.solve(target));
}

Reconstruction PbdwSolver::solve(const Measurement& target) const {
  require_target(target);
  return solve_coefficients(target.coeffs);
}

Reconstruction PbdwSolver::solve_boxed(const Measurement& target,
                                       const CoefficientBox& box) const {
  require_target(target);
  box.validate(background_.dimension());
  if (background_.dimension() == 0) return assemble(target.coeffs, Eigen::VectorXd(0));
  auto lsq = bounded_least_squares(gramian_, target.coeffs, box.lo, box.hi);
  return assemble(target.coeffs, std::move(lsq.x));
}

Reconstruction pbdw_solve(const Measurement& target, const Subspace& background,
                          const ObservationSpace& space) {
  return PbdwSolver(background, space.shared_from_this()).solve(target);
}

Reconstruction pbdw_solve(const GridFunction& target, const Subspace& background,
                          const ObservationSpace& space) {
  return pbdw_solve(observe(target, space), background, space);
}

Reconstruction pbdw_solve_boxed(const Measurement& target, const Subspace& background,
                                const ObservationSpace& space, const CoefficientBox& box) {
  return PbdwSolver(background, space.shared_from_this()).solve_boxed(target, box);
}

CoefficientBox compute_box(const SnapshotSet& snapshots, const Subspace& background,
                           double margin) {
  if (snapshots.empty()) throw std::invalid_argument("compute_box: empty snapshot set");
  if (!(margin >= 1.0)) throw std::invalid_argument("compute_box: margin must be >= 1");
  const int n = background.dimension();
  CoefficientBox box{Eigen::VectorXd::Constant(n, INFINITY),
                     Eigen::VectorXd::Constant(n, -INFINITY)};
  for (const auto& u : snapshots.snapshots) {
    const Eigen::VectorXd c = background.coefficients(u);
    box.lo = box.lo.cwiseMin(c);
    box.hi = box.hi.cwiseMax(c);
  }
  const Eigen::VectorXd mid = 0.5 * (box.lo + box.hi);
  const Eigen::VectorXd half = 0.5 * margin * (box.hi - box.lo);
  box.lo = mid - half;
  box.hi = mid + half;
  return box;
}

void write_reconstruction_csv(std::ostream& out, const Reconstruction& rec) {
  write_csv(out, rec.state);
}

void write_reconstruction_json(std::ostream& out, const Reconstruction& rec) {
  nlohmann::ordered_json j;
  j["beta"] = rec.beta;
  j["constraint_residual"] = rec.constraint_residual;
  j["rom_coeffs"] = std::vector<double>(rec.rom_coeffs.begin(), rec.rom_coeffs.end());
  j["correction_coeffs"] =
      std::vector<double>(rec.correction_coeffs.begin(), rec.correction_coeffs.end());
  out << j.dump(2) << '\n';
}

}  // namespace assim
