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

#ifndef ASSIM_SPACE_HPP_
#define ASSIM_SPACE_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace assim {

/// Uniform grid on [a, b] carrying the trapezoid quadrature that defines the
/// discrete l2(Omega) inner product.
///
/// The grid is three numbers; copies are cheap and two grids are the same
/// discretization exactly when their endpoints and node counts agree.
class Grid {
 public:
  Grid(double a, double b, int num_points);

  double a() const { return a_; }
  double b() const { return b_; }
  int num_points() const { return num_points_; }
  double spacing() const { return (b_ - a_) / (num_points_ - 1); }
  double length() const { return b_ - a_; }

  double node(int k) const;
  double weight(int k) const;
  Eigen::VectorXd nodes() const;
  Eigen::VectorXd weights() const;

  /// Index of the node closest to x (ties resolve to the lower index).
  int nearest_node(double x) const;

  friend bool operator==(const Grid& lhs, const Grid& rhs) {
    return lhs.a_ == rhs.a_ && lhs.b_ == rhs.b_ && lhs.num_points_ == rhs.num_points_;
  }

 private:
  double a_;
  double b_;
  int num_points_;
};

/// Element of the ambient space: finite nodal values on a grid.
class GridFunction {
 public:
  explicit GridFunction(const Grid& grid);  // zero function
  GridFunction(const Grid& grid, Eigen::VectorXd values);

  template <class F>
  static GridFunction from_function(const Grid& grid, F&& f) {
    Eigen::VectorXd v(grid.num_points());
    for (int k = 0; k < grid.num_points(); ++k) v[k] = f(grid.node(k));
    return GridFunction(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](int k) const { return values_[k]; }
  int size() const { return static_cast<int>(values_.size()); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

GridFunction operator+(GridFunction lhs, const GridFunction& rhs);
GridFunction operator-(GridFunction lhs, const GridFunction& rhs);
GridFunction operator*(double s, GridFunction u);

/// Orthonormal family of grid functions (columns of `basis`).
///
/// Construction checks the weighted Gram matrix against the identity, so every
/// Subspace in circulation is orthonormal to within `kOrthonormalityTol`.
class Subspace {
 public:
  static constexpr double kOrthonormalityTol = 1e-10;

  /// Throws NotOrthonormalError when the columns are not V-orthonormal.
  Subspace(const Grid& grid, Eigen::MatrixXd basis);

  static Subspace empty(const Grid& grid);

  const Grid& grid() const { return grid_; }
  int dimension() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  GridFunction element(int i) const;

  /// First `n` basis vectors (nested POD spaces).
  Subspace leading(int n) const;

  /// <x_i, u> for every basis vector.
  Eigen::VectorXd coefficients(const GridFunction& u) const;
  /// sum_i c_i x_i.
  GridFunction combine(const Eigen::VectorXd& coeffs) const;

 private:
  Subspace(const Grid& grid, Eigen::MatrixXd basis, bool /*trusted*/);

  Grid grid_;
  Eigen::MatrixXd basis_;
};

void require_same_grid(const Grid& lhs, const Grid& rhs);

double inner_product(const GridFunction& u, const GridFunction& v);
double norm(const GridFunction& u);

/// A^T diag(w) B for nodal matrices on `grid`.
Eigen::MatrixXd weighted_cross(const Grid& grid, const Eigen::MatrixXd& lhs,
                               const Eigen::MatrixXd& rhs);

/// Orthogonal projection onto span(X).
GridFunction project_onto(const GridFunction& u, const Subspace& subspace);

struct OrthonormalizationResult {
  Subspace subspace;
  std::vector<std::size_t> kept;     // input indices that produced a basis vector
  std::vector<std::size_t> dropped;  // input indices judged dependent
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. A candidate is
/// dropped when its residual falls below tol_drop times its original norm.
OrthonormalizationResult orthonormalize_tracked(const Grid& grid,
                                                std::span<const GridFunction> fns,
                                                double tol_drop = 1e-10);

Subspace orthonormalize(const Grid& grid, std::span<const GridFunction> fns,
                        double tol_drop = 1e-10);

// CSV with header "x,value" and 17 significant digits.
void write_csv(std::ostream& out, const GridFunction& u);
GridFunction read_csv(std::istream& in);

}  // namespace assim

#endif  // ASSIM_SPACE_HPP_
