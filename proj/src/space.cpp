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

#include "assim/space.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "assim/error.hpp"

namespace assim {

Grid::Grid(double a, double b, int num_points) : a_(a), b_(b), num_points_(num_points) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(b > a)) {
    throw std::invalid_argument("Grid: need finite endpoints with b > a");
  }
  if (num_points < 2) throw std::invalid_argument("Grid: need at least two nodes");
}

double Grid::node(int k) const {
  // Last node pinned to b so the endpoint is exact.
  if (k == num_points_ - 1) return b_;
  return a_ + k * spacing();
}

double Grid::weight(int k) const {
  const double h = spacing();
  return (k == 0 || k == num_points_ - 1) ? 0.5 * h : h;
}

Eigen::VectorXd Grid::nodes() const {
  Eigen::VectorXd x(num_points_);
  for (int k = 0; k < num_points_; ++k) x[k] = node(k);
  return x;
}

Eigen::VectorXd Grid::weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(num_points_, spacing());
  w[0] *= 0.5;
  w[num_points_ - 1] *= 0.5;
  return w;
}

int Grid::nearest_node(double x) const {
  const double t = (x - a_) / spacing();
  int k = static_cast<int>(std::floor(t));
  if (k < 0) return 0;
  if (k >= num_points_ - 1) return num_points_ - 1;
  return (std::abs(x - node(k)) <= std::abs(node(k + 1) - x)) ? k : k + 1;
}

GridFunction::GridFunction(const Grid& grid)
    : grid_(grid), values_(Eigen::VectorXd::Zero(grid.num_points())) {}

GridFunction::GridFunction(const Grid& grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.num_points()) {
    throw std::invalid_argument("GridFunction: value count " + std::to_string(values_.size()) +
                                " does not match grid size " +
                                std::to_string(grid_.num_points()));
  }
  if (!values_.allFinite()) throw std::invalid_argument("GridFunction: non-finite value");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_);
  values_ += other.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_);
  values_ -= other.values_;
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  values_ *= s;
  return *this;
}

GridFunction operator+(GridFunction lhs, const GridFunction& rhs) { return lhs += rhs; }
GridFunction operator-(GridFunction lhs, const GridFunction& rhs) { return lhs -= rhs; }
GridFunction operator*(double s, GridFunction u) { return u *= s; }

void require_same_grid(const Grid& lhs, const Grid& rhs) {
  if (!(lhs == rhs)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "incompatible discretizations: [" << lhs.a() << ", " << lhs.b() << "] x "
        << lhs.num_points() << " vs [" << rhs.a() << ", " << rhs.b() << "] x " << rhs.num_points();
    throw IncompatibleGridError(msg.str());
  }
}

Eigen::MatrixXd weighted_cross(const Grid& grid, const Eigen::MatrixXd& lhs,
                               const Eigen::MatrixXd& rhs) {
  return lhs.transpose() * (grid.weights().asDiagonal() * rhs);
}

Subspace::Subspace(const Grid& grid, Eigen::MatrixXd basis)
    : grid_(grid), basis_(std::move(basis)) {
  if (basis_.rows() != grid_.num_points()) {
    throw std::invalid_argument("Subspace: basis rows do not match grid size");
  }
  if (!basis_.allFinite()) throw std::invalid_argument("Subspace: non-finite basis entry");
  if (basis_.cols() == 0) return;
  const Eigen::MatrixXd gram = weighted_cross(grid_, basis_, basis_);
  const double dev =
      (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (dev > kOrthonormalityTol) {
    throw NotOrthonormalError("Subspace: basis is not orthonormal (max Gram deviation " +
                              std::to_string(dev) + "); orthonormalize first");
  }
}

Subspace::Subspace(const Grid& grid, Eigen::MatrixXd basis, bool)
    : grid_(grid), basis_(std::move(basis)) {}

Subspace Subspace::empty(const Grid& grid) {
  return Subspace(grid, Eigen::MatrixXd(grid.num_points(), 0), true);
}

GridFunction Subspace::element(int i) const { return GridFunction(grid_, basis_.col(i)); }

Subspace Subspace::leading(int n) const {
  if (n < 0 || n > dimension()) {
    throw std::invalid_argument("Subspace::leading: requested " + std::to_string(n) +
                                " of " + std::to_string(dimension()) + " vectors");
  }
  return Subspace(grid_, basis_.leftCols(n), true);
}

Eigen::VectorXd Subspace::coefficients(const GridFunction& u) const {
  require_same_grid(grid_, u.grid());
  return basis_.transpose() * (grid_.weights().asDiagonal() * u.values());
}

GridFunction Subspace::combine(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != dimension()) {
    throw std::invalid_argument("Subspace::combine: coefficient count mismatch");
  }
  if (dimension() == 0) return GridFunction(grid_);
  return GridFunction(grid_, basis_ * coeffs);
}

double inner_product(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u.grid(), v.grid());
  const auto& x = u.values();
  const auto& y = v.values();
  const int last = u.size() - 1;
  const double interior = x.dot(y) - 0.5 * (x[0] * y[0] + x[last] * y[last]);
  return u.grid().spacing() * interior;
}

double norm(const GridFunction& u) { return std::sqrt(std::max(0.0, inner_product(u, u))); }

GridFunction project_onto(const GridFunction& u, const Subspace& subspace) {
  require_same_grid(u.grid(), subspace.grid());
  return subspace.combine(subspace.coefficients(u));
}

OrthonormalizationResult orthonormalize_tracked(const Grid& grid,
                                                std::span<const GridFunction> fns,
                                                double tol_drop) {
  if (!(tol_drop > 0)) throw std::invalid_argument("orthonormalize: tol_drop must be positive");
  const Eigen::VectorXd w = grid.weights();
  auto ip = [&w](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.cwiseProduct(w).dot(y);
  };

  std::vector<Eigen::VectorXd> kept_vectors;
  OrthonormalizationResult result{Subspace::empty(grid), {}, {}};
  for (std::size_t i = 0; i < fns.size(); ++i) {
    require_same_grid(grid, fns[i].grid());
    Eigen::VectorXd v = fns[i].values();
    const double original = std::sqrt(ip(v, v));
    if (original == 0.0) {
      result.dropped.push_back(i);
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept_vectors) v -= ip(q, v) * q;
    }
    const double residual = std::sqrt(ip(v, v));
    if (residual < tol_drop * original) {
      result.dropped.push_back(i);
      continue;
    }
    kept_vectors.push_back(v / residual);
    result.kept.push_back(i);
  }

  Eigen::MatrixXd basis(grid.num_points(), static_cast<Eigen::Index>(kept_vectors.size()));
  for (std::size_t j = 0; j < kept_vectors.size(); ++j) basis.col(j) = kept_vectors[j];
  result.subspace = Subspace(grid, std::move(basis));
  return result;
}

Subspace orthonormalize(const Grid& grid, std::span<const GridFunction> fns, double tol_drop) {
  return orthonormalize_tracked(grid, fns, tol_drop).subspace;
}

void write_csv(std::ostream& out, const GridFunction& u) {
  char buf[64];
  out << "x,value\n";
  for (int k = 0; k < u.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.grid().node(k), u[k]);
    out << buf;
  }
}

GridFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0) {
    throw std::invalid_argument("read_csv: expected header 'x,value'");
  }
  std::vector<double> xs;
  std::vector<double> vs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("read_csv: line " + std::to_string(line_no) + " lacks a comma");
    }
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("read_csv: line " + std::to_string(line_no) +
                                  " is not numeric");
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("read_csv: need at least two rows");
  Grid grid(xs.front(), xs.back(), static_cast<int>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (std::abs(xs[k] - grid.node(static_cast<int>(k))) > 1e-9 * (1.0 + grid.length())) {
      throw std::invalid_argument("read_csv: nodes are not uniformly spaced (row " +
                                  std::to_string(k + 2) + ")");
    }
  }
  return GridFunction(grid, Eigen::Map<const Eigen::VectorXd>(vs.data(), vs.size()));
}

}  // namespace assim
