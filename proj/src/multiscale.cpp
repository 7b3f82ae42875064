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

#include "assim/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "assim/error.hpp"
#include "json.hpp"

namespace assim {
namespace {

// Below this fraction of the data norm a residual is treated as exhausted.
constexpr double kExhaustedResidual = 1e-14;

SnapshotSet subset(const SnapshotSet& set, const std::vector<int>& keep) {
  SnapshotSet out{set.grid, {}, {}, set.label, set.seed};
  for (int k : keep) {
    out.snapshots.push_back(set.snapshots[k]);
    if (k < static_cast<int>(set.parameters.size())) out.parameters.push_back(set.parameters[k]);
  }
  return out;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& m, const std::vector<int>& keep) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(j) = m.col(keep[j]);
  return out;
}

void warn_dropped(const SnapshotSet& set, const std::vector<int>& dropped, const char* why) {
  for (int k : dropped) {
    std::clog << "warning: dictionary candidate " << k;
    if (k < static_cast<int>(set.parameters.size())) {
      for (const auto& [name, value] : set.parameters[k]) std::clog << ' ' << name << '=' << value;
    }
    std::clog << " dropped (" << why << ")\n";
  }
}

// Orthonormal basis of the column space of m, numerical rank by relative cut.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m) {
  if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cut = 1e-12 * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > cut) ++r;
  return svd.matrixU().leftCols(r);
}

double smallest_singular_value(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return std::numeric_limits<double>::infinity();
  if (m.cols() > m.rows()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace

SlowDictionary::SlowDictionary(SnapshotSet candidates, Eigen::MatrixXd projected,
                               Eigen::MatrixXd search, Eigen::MatrixXd deflation_basis)
    : candidates_(std::move(candidates)),
      projected_(std::move(projected)),
      search_(std::move(search)),
      deflation_basis_(std::move(deflation_basis)) {
  const auto k = static_cast<Eigen::Index>(candidates_.size());
  if (projected_.cols() != k || search_.cols() != k || search_.rows() != projected_.rows()) {
    throw std::invalid_argument("SlowDictionary: image matrices do not match the candidates");
  }
  for (const auto& c : candidates_.snapshots) {
    require_same_grid(c.grid(), candidates_.grid);
    if (std::abs(norm(c) - 1.0) > 1e-10) {
      throw std::invalid_argument("SlowDictionary: candidates must have unit norm");
    }
  }
}

double SlowDictionary::location(int k) const {
  if (k < static_cast<int>(candidates_.parameters.size())) {
    for (const auto& [name, value] : candidates_.parameters[k]) {
      if (name == "jump_location") return value;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd SlowDictionary::search_coordinates(const Eigen::VectorXd& omega) const {
  if (omega.size() != search_.rows()) {
    throw std::invalid_argument("SlowDictionary: measurement size does not match W_m");
  }
  if (!deflated()) return omega;
  return omega - deflation_basis_ * (deflation_basis_.transpose() * omega);
}

SlowDictionary build_slow_dictionary(const SnapshotSet& candidates, const ObservationSpace& space,
                                     double visibility_tol) {
  require_same_grid(candidates.grid, space.grid());
  SnapshotSet normalized{candidates.grid, {}, candidates.parameters, SnapshotLabel::kSlow,
                         candidates.seed};
  std::vector<int> keep;
  std::vector<int> dropped;
  std::vector<Eigen::VectorXd> images;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const GridFunction& c = candidates.snapshots[k];
    const double nc = norm(c);
    if (nc == 0.0) {
      dropped.push_back(static_cast<int>(k));
      normalized.snapshots.push_back(c);
      images.emplace_back();
      continue;
    }
    GridFunction unit = (1.0 / nc) * c;
    Eigen::VectorXd img = space.project_coefficients(unit);
    if (img.norm() <= visibility_tol) {
      dropped.push_back(static_cast<int>(k));
    } else {
      keep.push_back(static_cast<int>(k));
    }
    normalized.snapshots.push_back(std::move(unit));
    images.push_back(std::move(img));
  }
  warn_dropped(candidates, dropped, "invisible to the sensors");

  Eigen::MatrixXd projected(space.dimension(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) projected.col(j) = images[keep[j]];
  SnapshotSet kept = subset(normalized, keep);
  return SlowDictionary(std::move(kept), projected, projected,
                        Eigen::MatrixXd(space.dimension(), 0));
}

SlowDictionary deflate_against(const SlowDictionary& dict, const Eigen::MatrixXd& fast_gramian,
                               double visibility_tol) {
  if (fast_gramian.rows() != dict.projected().rows()) {
    throw std::invalid_argument("deflate_against: cross-Gramian does not match W_m");
  }
  Eigen::MatrixXd basis = range_basis(fast_gramian);
  Eigen::MatrixXd search = dict.projected() - basis * (basis.transpose() * dict.projected());
  std::vector<int> keep;
  std::vector<int> dropped;
  for (int k = 0; k < dict.size(); ++k) {
    (search.col(k).norm() > visibility_tol ? keep : dropped).push_back(k);
  }
  warn_dropped(dict.candidates(), dropped, "indistinguishable from the fast space");
  return SlowDictionary(subset(dict.candidates(), keep), columns(dict.projected(), keep),
                        columns(search, keep), std::move(basis));
}

SnapshotSet step_candidates(const Grid& grid, const Range& jump_range, int stride) {
  if (stride < 1) throw std::invalid_argument("step_candidates: stride must be >= 1");
  if (!jump_range.well_ordered()) throw std::invalid_argument("step_candidates: empty range");
  SnapshotSet set{grid, {}, {}, SnapshotLabel::kSlow, 0};
  for (int k = 0; k < grid.num_points(); k += stride) {
    const double x = grid.node(k);
    if (x < jump_range.lo || x > jump_range.hi) continue;
    set.snapshots.push_back(heaviside(grid, x));
    set.parameters.push_back({{"jump_location", x}, {"jump_height", 1.0}});
  }
  return set;
}

SearchResult orthogonal_search(const Eigen::VectorXd& omega, const SlowDictionary& dict) {
  if (dict.empty()) throw std::invalid_argument("orthogonal_search: empty dictionary");
  const Eigen::MatrixXd& s = dict.search();
  if (omega.size() != s.rows()) {
    throw std::invalid_argument("orthogonal_search: measurement size does not match W_m");
  }
  SearchResult best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < dict.size(); ++k) {
    const double score = omega.dot(s.col(k)) / s.col(k).norm();
    if (score > best_score) {
      best_score = score;
      best.index = k;
    }
  }
  best.amplitude = omega.dot(s.col(best.index)) / s.col(best.index).squaredNorm();
  return best;
}

SearchResult orthogonal_search(const Measurement& omega, const SlowDictionary& dict) {
  return orthogonal_search(dict.search_coordinates(omega.coeffs), dict);
}

SmootherExtraction extract_smoothers(const Measurement& omega, const SlowDictionary& dict,
                                     double rel_tol, int max_iters) {
  if (!(rel_tol > 0.0 && rel_tol <= 1.0)) {
    throw std::invalid_argument("extract_smoothers: rel_tol must lie in (0, 1]");
  }
  if (max_iters < 1) throw std::invalid_argument("extract_smoothers: max_iters must be >= 1");
  if (!omega.space) throw std::invalid_argument("extract_smoothers: detached measurement");
  require_same_grid(omega.space->grid(), dict.candidates().grid);

  SmootherExtraction out{{}, GridFunction(dict.candidates().grid), omega, {}};
  Eigen::VectorXd residual = dict.search_coordinates(omega.coeffs);
  Eigen::VectorXd smoothed = omega.coeffs;
  const double floor = kExhaustedResidual * omega.coeffs.norm();
  out.residual_history.push_back(residual.norm());
  if (dict.empty()) return out;

  for (int it = 0; it < max_iters; ++it) {
    const double current = out.residual_history.back();
    if (current <= floor) break;
    const SearchResult hit = orthogonal_search(residual, dict);
    Eigen::VectorXd next = residual - hit.amplitude * dict.search().col(hit.index);
    const double next_norm = next.norm();
    if (current - next_norm <= rel_tol * current) break;
    residual = std::move(next);
    smoothed -= hit.amplitude * dict.projected().col(hit.index);
    out.f_star += hit.amplitude * dict.candidate(hit.index);
    out.smoothers.push_back(
        {hit.index, dict.candidate(hit.index), hit.amplitude, dict.location(hit.index)});
    out.residual_history.push_back(next_norm);
  }
  out.omega_f = make_measurement(*omega.space, std::move(smoothed));
  return out;
}

MultiscaleDecomposition spbdw_reconstruct(const Measurement& omega_star, const PbdwSolver& fast,
                                          const SlowDictionary& dict, const NoiseModel* model,
                                          std::uint64_t seed, const SpbdwOptions& options) {
  SmootherExtraction ext =
      extract_smoothers(omega_star, dict, options.rel_tol, options.max_iters);

  MultiscaleDecomposition dec{std::move(ext.smoothers),
                              std::move(ext.f_star),
                              std::move(ext.omega_f),
                              {GridFunction(fast.background().grid()), {}, {}, 0.0, 0.0},
                              {},
                              GridFunction(fast.background().grid()),
                              GridFunction(fast.background().grid()),
                              std::move(ext.residual_history)};

  Eigen::VectorXd eta = omega_star.coeffs;
  if (model != nullptr) {
    BiasCorrectedReconstruction b = bpbdw_reconstruct(fast, dec.omega_f, *model, seed);
    dec.u_f = std::move(b.corrected);
    // eta for the smoother refit comes from the first-pass multiscale state.
    GridFunction first_pass = b.initial.state + dec.f_star;
    eta = bias_corrector(first_pass, fast.space(), *model, seed).coeffs;
  } else {
    dec.u_f = fast.solve(dec.omega_f);
  }

  // Replay the recorded selections against eta; with eta = omega* this
  // reproduces the extraction amplitudes exactly.
  Eigen::VectorXd residual = dict.search_coordinates(eta);
  for (const Smoother& s : dec.smoothers) {
    const auto img = dict.search().col(s.index);
    const double a = residual.dot(img) / img.squaredNorm();
    residual -= a * img;
    dec.corrected_amplitudes.push_back(a);
    dec.f_u += a * s.u_os;
  }
  dec.u_star = dec.u_f.state + dec.f_u;
  return dec;
}

Subspace orthogonal_complement_span(std::span<const GridFunction> fns, const Subspace& against) {
  std::vector<GridFunction> reduced;
  reduced.reserve(fns.size());
  for (const auto& f : fns) {
    require_same_grid(f.grid(), against.grid());
    GridFunction r = f - project_onto(f, against);
    // Second pass against cancellation.
    r -= project_onto(r, against);
    reduced.push_back(std::move(r));
  }
  return orthonormalize(against.grid(), reduced, 1e-8);
}

MultiscaleBeta multiscale_beta_bound(const Subspace& slow, const Subspace& fast,
                                     const ObservationSpace& space) {
  require_same_grid(slow.grid(), fast.grid());
  require_same_grid(slow.grid(), space.grid());
  if (slow.dimension() > 0 && fast.dimension() > 0) {
    const double overlap =
        weighted_cross(slow.grid(), slow.basis(), fast.basis()).cwiseAbs().maxCoeff();
    if (overlap > 1e-8) {
      throw NotOrthonormalError(
          "multiscale_beta_bound: slow space is not orthogonal to V_n (max |<s, v>| = " +
          std::to_string(overlap) + "); orthogonalize it against V_n first");
    }
  }
  const Eigen::MatrixXd gs = cross_gramian(slow, space);
  const Eigen::MatrixXd gf = cross_gramian(fast, space);
  Eigen::MatrixXd g(space.dimension(), gs.cols() + gf.cols());
  g << gf, gs;

  MultiscaleBeta r;
  r.beta_fast = smallest_singular_value(gf);
  r.beta_slow = smallest_singular_value(gs);
  r.beta_combined = g.cols() == 0 ? 1.0 : smallest_singular_value(g);
  const double lower = std::min(r.beta_fast, r.beta_slow);
  r.bound_holds = r.beta_combined >= lower - 1e-8;

  const Eigen::MatrixXd us = range_basis(gs);
  const Eigen::MatrixXd uf = range_basis(gf);
  if (us.cols() > 0 && uf.cols() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(us.transpose() * uf);
    r.image_coherence = std::min(1.0, svd.singularValues()[0]);
  }
  r.coherence_lower_bound = std::sqrt(1.0 - r.image_coherence) * lower;
  return r;
}

void write_decomposition_csv(std::ostream& out, const MultiscaleDecomposition& dec) {
  const Grid& grid = dec.u_star.grid();
  char buf[128];
  out << "x,u_star,u_f,f_u\n";
  for (int k = 0; k < grid.num_points(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", grid.node(k), dec.u_star[k],
                  dec.u_f.state[k], dec.f_u[k]);
    out << buf;
  }
}

void write_decomposition_json(std::ostream& out, const MultiscaleDecomposition& dec) {
  nlohmann::ordered_json j;
  std::vector<double> locations;
  std::vector<double> amplitudes;
  for (const auto& s : dec.smoothers) {
    locations.push_back(s.location);
    amplitudes.push_back(s.amplitude);
  }
  j["smoother_locations"] = locations;
  j["amplitudes"] = amplitudes;
  j["corrected_amplitudes"] = dec.corrected_amplitudes;
  j["residual_history"] = dec.residual_history;
  out << j.dump(2) << '\n';
}

}  // namespace assim
