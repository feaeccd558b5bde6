// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace nlsdecay {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ComplexSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Uniform tensor grid on [-L, L]^d including the endpoints. Boundary nodes
// carry the homogeneous Dirichlet condition, so discrete operators act on the
// (N-2)^d interior nodes only ("unknowns"). Nodes are ordered with the first
// axis varying slowest.
class Grid {
 public:
  Grid(int dimension, double half_length, int points);

  int dimension() const { return dimension_; }
  double half_length() const { return half_length_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  double cell_volume() const;

  Index node_count() const;
  Index unknown_count() const;

  double coordinate(int i) const { return -half_length_ + i * spacing_; }
  std::array<int, 2> axis_indices(Index node) const;
  std::array<double, 2> position(Index node) const;
  double radius(Index node) const;
  bool is_boundary(Index node) const;

  // Position of an interior node in the unknown ordering, or -1 on the boundary.
  Index unknown_of(Index node) const;
  Index node_of(Index unknown) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dimension_;
  double half_length_;
  int points_;
  double spacing_;
};

Grid make_grid(int dimension, double half_length, int points);

class RealField {
 public:
  RealField(Grid grid, RealVector values);

  const Grid& grid() const { return grid_; }
  const RealVector& values() const { return values_; }
  double operator[](Index node) const { return values_[node]; }

  RealVector interior() const;
  static RealField from_interior(const Grid& grid, const RealVector& interior);

 private:
  Grid grid_;
  RealVector values_;
};

// Two complex components per node.
class Vec2Field {
 public:
  Vec2Field(Grid grid, ComplexVector first, ComplexVector second);

  const Grid& grid() const { return grid_; }
  const ComplexVector& first() const { return first_; }
  const ComplexVector& second() const { return second_; }

  // Stacked interior values [first; second] in unknown ordering, length 2n.
  ComplexVector unknowns() const;
  static Vec2Field from_unknowns(const Grid& grid, const ComplexVector& stacked);

  Vec2Field scaled(Complex c) const;

 private:
  Grid grid_;
  ComplexVector first_;
  ComplexVector second_;
};

// Smooth cut-off j_R(|x|) = j(|x|/R) with
//   j(t) = psi(2 - t) / (psi(2 - t) + psi(t - 1)),  psi(s) = exp(-1/s) for s > 0, else 0,
// so j is C-infinity, exactly 1 on [0, 1] and exactly 0 on [2, inf).
struct CutoffSpec {
  double inner_radius;
};

double cutoff_profile(double t);

// Dirichlet Laplacian (the operator Delta, negative semidefinite) on the
// unknowns; order 2 or 4 central differences, Kronecker sum for d = 2.
RealSparse laplacian(const Grid& grid, int order);

RealField bracket_x(const Grid& grid);
RealField cutoff_field(const Grid& grid, const CutoffSpec& cutoff);
// 1 - j_R: vanishes on the ball of radius R and equals 1 beyond 2R.
RealField exterior_cutoff_field(const Grid& grid, const CutoffSpec& cutoff);

// Central-difference partial derivative along an axis (one-sided on the
// boundary nodes).
RealField partial_derivative(const RealField& field, int axis);
RealField gradient_squared(const RealField& field);

}  // namespace nlsdecay
