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

#ifndef ASSIM_MULTISCALE_HPP_
#define ASSIM_MULTISCALE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "assim/bias.hpp"
#include "assim/manifold.hpp"
#include "assim/obs.hpp"
#include "assim/solver.hpp"

namespace assim {

/// Sampled slow manifold prepared for the orthogonal search.
///
/// Every candidate has unit V-norm. `projected` holds the images P_W v in
/// orthonormal coordinates. `search` holds the images the search scores
/// against: equal to `projected`, or, for a deflated dictionary, their
/// component orthogonal to the observed fast space P_W V_n. Measurements are
/// mapped the same way before scoring (see search_coordinates).
class SlowDictionary {
 public:
  SlowDictionary(SnapshotSet candidates, Eigen::MatrixXd projected, Eigen::MatrixXd search,
                 Eigen::MatrixXd deflation_basis);

  int size() const { return static_cast<int>(candidates_.size()); }
  bool empty() const { return candidates_.empty(); }
  const SnapshotSet& candidates() const { return candidates_; }
  const GridFunction& candidate(int k) const { return candidates_.snapshots[k]; }
  const Eigen::MatrixXd& projected() const { return projected_; }
  const Eigen::MatrixXd& search() const { return search_; }
  bool deflated() const { return deflation_basis_.cols() > 0; }
  /// Jump location recorded for candidate k (NaN when unknown).
  double location(int k) const;

  /// Coordinates of omega in the space the search works in.
  Eigen::VectorXd search_coordinates(const Eigen::VectorXd& omega) const;

 private:
  SnapshotSet candidates_;
  Eigen::MatrixXd projected_;
  Eigen::MatrixXd search_;
  Eigen::MatrixXd deflation_basis_;
};

/// Unit-normalizes the candidates and drops (with a warning on std::clog) any
/// whose observed image has norm <= visibility_tol.
SlowDictionary build_slow_dictionary(const SnapshotSet& candidates, const ObservationSpace& space,
                                     double visibility_tol = 1e-12);

/// Restricts the search to the complement of the observed fast space, so the
/// selection and amplitude of each smoother are the joint least-squares fit
/// together with the background coordinates. Candidates invisible in that
/// complement are dropped with a warning.
SlowDictionary deflate_against(const SlowDictionary& dict, const Eigen::MatrixXd& fast_gramian,
                               double visibility_tol = 1e-12);

/// Unit steps HS(x_k) for the nodes k = 0, stride, 2 stride, ... with x_k in `jump_range`.
SnapshotSet step_candidates(const Grid& grid, const Range& jump_range, int stride = 4);

struct SearchResult {
  int index = -1;
  double amplitude = 0.0;
};

/// argmax_k <omega, s_k / ||s_k||> over the search images s_k (first index
/// wins ties), with amplitude <omega, s_k> / ||s_k||^2. `omega` must already
/// be in search coordinates.
SearchResult orthogonal_search(const Eigen::VectorXd& omega, const SlowDictionary& dict);
SearchResult orthogonal_search(const Measurement& omega, const SlowDictionary& dict);

struct Smoother {
  int index = -1;        // dictionary index
  GridFunction u_os;     // unit-norm candidate
  double amplitude = 0;  // fitted coefficient
  double location = 0;   // jump location of the candidate
};

struct SmootherExtraction {
  std::vector<Smoother> smoothers;
  GridFunction f_star;                // sum of fitted smoothers
  Measurement omega_f;                // omega - P_W f*
  std::vector<double> residual_history;
};

/// Greedy loop of orthogonal searches. A step is accepted only while it
/// lowers the residual norm by more than rel_tol times the current norm;
/// at most max_iters smoothers are recorded.
SmootherExtraction extract_smoothers(const Measurement& omega, const SlowDictionary& dict,
                                     double rel_tol, int max_iters);

struct SpbdwOptions {
  double rel_tol = 0.05;
  int max_iters = 5;
};

struct MultiscaleDecomposition {
  std::vector<Smoother> smoothers;
  GridFunction f_star;
  Measurement omega_f;
  Reconstruction u_f;             // fast reconstruction from omega_f
  std::vector<double> corrected_amplitudes;
  GridFunction f_u;               // bias-corrected smoother
  GridFunction u_star;            // u_f.state + f_u
  std::vector<double> residual_history;
};

/// Multiscale reconstruction: smoother extraction, PBDW (bias-corrected when
/// a model is supplied) on the smoothed data over V_n, refit of the recorded
/// smoothers against eta(omega), recombination.
MultiscaleDecomposition spbdw_reconstruct(const Measurement& omega_star, const PbdwSolver& fast,
                                          const SlowDictionary& dict, const NoiseModel* model,
                                          std::uint64_t seed, const SpbdwOptions& options = {});

/// Orthonormal basis of span(fns) with the V_n component removed.
Subspace orthogonal_complement_span(std::span<const GridFunction> fns, const Subspace& against);

struct MultiscaleBeta {
  double beta_combined = 0.0;
  double beta_fast = 0.0;   // +inf for an empty fast space
  double beta_slow = 0.0;   // +inf for an empty slow space
  bool bound_holds = false; // beta_combined >= min(beta_fast, beta_slow) - 1e-8
  /// Cosine of the smallest angle between P_W V^slow and P_W V_n.
  double image_coherence = 0.0;
  /// sqrt(1 - coherence) * min(beta_fast, beta_slow); always a valid lower bound.
  double coherence_lower_bound = 0.0;
};

/// Inf-sup constants of V^slow, V_n and of their orthogonal sum. Throws
/// NotOrthonormalError unless V^slow is orthogonal to V_n within 1e-8.
MultiscaleBeta multiscale_beta_bound(const Subspace& slow, const Subspace& fast,
                                     const ObservationSpace& space);

// CSV columns x,u_star,u_f,f_u; JSON with smoother locations, amplitudes, residuals.
void write_decomposition_csv(std::ostream& out, const MultiscaleDecomposition& dec);
void write_decomposition_json(std::ostream& out, const MultiscaleDecomposition& dec);

}  // namespace assim

#endif  // ASSIM_MULTISCALE_HPP_
