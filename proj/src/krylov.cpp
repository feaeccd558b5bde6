// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "nlsdecay/errors.hpp"

namespace nlsdecay {
namespace {

ComplexVector random_unit(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexVector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = Complex(normal(rng), normal(rng));
  return v.normalized();
}

// Exchanges the adjacent eigenvalues T(j,j), T(j+1,j+1) of an upper triangular
// T by a unitary Givens rotation, updating the Schur vectors U.
void swap_adjacent(ComplexMatrix& T, ComplexMatrix& U, Index j) {
  const Complex a = T(j, j);
  const Complex c = T(j + 1, j + 1);
  const Complex x = T(j, j + 1);
  const Complex y = c - a;
  const double r = std::hypot(std::abs(x), std::abs(y));
  if (r == 0.0) return;
  const Complex cs = x / r;
  const Complex sn = y / r;
  const Index m = T.rows();
  for (Index col = 0; col < m; ++col) {
    const Complex p = T(j, col), q = T(j + 1, col);
    T(j, col) = std::conj(cs) * p + std::conj(sn) * q;
    T(j + 1, col) = -sn * p + cs * q;
  }
  auto rotate_columns = [&](ComplexMatrix& M) {
    for (Index row = 0; row < M.rows(); ++row) {
      const Complex p = M(row, j), q = M(row, j + 1);
      M(row, j) = p * cs + q * sn;
      M(row, j + 1) = -p * std::conj(sn) + q * std::conj(cs);
    }
  };
  rotate_columns(T);
  rotate_columns(U);
  T(j + 1, j) = 0.0;
}

void sort_schur_by_modulus(ComplexMatrix& T, ComplexMatrix& U) {
  const Index m = T.rows();
  for (Index i = 0; i < m; ++i) {
    for (Index j = m - 2; j >= i; --j) {
      if (std::abs(T(j + 1, j + 1)) > std::abs(T(j, j))) swap_adjacent(T, U, j);
      if (j == 0) break;
    }
  }
}

// Eigenvector of upper triangular T for the eigenvalue T(i,i), in Schur
// coordinates (entries past i are zero).
ComplexVector triangular_eigenvector(const ComplexMatrix& T, Index i) {
  const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, T.norm());
  ComplexVector y = ComplexVector::Zero(T.rows());
  y[i] = 1.0;
  for (Index j = i - 1; j >= 0; --j) {
    Complex sum = 0.0;
    for (Index l = j + 1; l <= i; ++l) sum += T(j, l) * y[l];
    Complex denom = T(j, j) - T(i, i);
    if (std::abs(denom) < floor) denom = floor;
    y[j] = -sum / denom;
  }
  return y.normalized();
}

KrylovResult dense_fallback(const LinearMap& op, Index dim, const KrylovOptions& options) {
  ComplexMatrix M(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    ComplexVector e = ComplexVector::Zero(dim);
    e[j] = 1.0;
    M.col(j) = op(e);
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(M, true);
  if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
  std::vector<Index> order(static_cast<size_t>(dim));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(solver.eigenvalues()[a]) > std::abs(solver.eigenvalues()[b]);
  });
  KrylovResult result;
  result.applications = static_cast<int>(dim);
  result.converged = true;
  const Index keep = std::min<Index>(options.wanted, dim);
  for (Index i = 0; i < keep; ++i) {
    const Index k = order[static_cast<size_t>(i)];
    const ComplexVector v = solver.eigenvectors().col(k).normalized();
    const double res = (M * v - solver.eigenvalues()[k] * v).norm();
    result.pairs.push_back({solver.eigenvalues()[k], v, res, true});
  }
  return result;
}

}  // namespace

KrylovResult krylov_schur(const LinearMap& op, Index dim, const KrylovOptions& options) {
  if (options.subspace < 3 || options.wanted < 1) {
    throw ValidationError("Krylov subspace must exceed 2 and at least one value is wanted");
  }
  if (dim <= options.subspace + 1) return dense_fallback(op, dim, options);

  const Index m = options.subspace;
  const Index wanted = std::min<Index>(options.wanted, m - 2);
  std::mt19937_64 rng(options.seed);

  ComplexMatrix V(dim, m + 1);
  ComplexMatrix Hbar = ComplexMatrix::Zero(m + 1, m);
  V.col(0) = random_unit(dim, rng);
  Index k = 0;

  KrylovResult result;
  for (;;) {
    for (Index j = k; j < m; ++j) {
      ComplexVector w = op(V.col(j));
      ++result.applications;
      auto basis = V.leftCols(j + 1);
      const double before = w.norm();
      ComplexVector h = basis.adjoint() * w;
      w -= basis * h;
      double beta = w.norm();
      // Second Gram-Schmidt pass only when cancellation was severe.
      if (beta < 0.7071 * before) {
        const ComplexVector correction = basis.adjoint() * w;
        w -= basis * correction;
        h += correction;
        beta = w.norm();
      }
      Hbar.col(j).head(j + 1) = h;
      if (beta <= 1e-14 * std::max(1.0, h.norm())) {
        // Invariant subspace: continue with a fresh orthogonal direction.
        w = random_unit(dim, rng);
        for (int pass = 0; pass < 2; ++pass) w -= basis * (basis.adjoint() * w);
        w.normalize();
        beta = 0.0;
        V.col(j + 1) = w;
      } else {
        V.col(j + 1) = w / beta;
      }
      Hbar(j + 1, j) = beta;
    }

    Eigen::ComplexSchur<ComplexMatrix> schur(Hbar.topRows(m), true);
    if (schur.info() != Eigen::Success) throw NumericError("Schur decomposition failed");
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix U = schur.matrixU();
    sort_schur_by_modulus(T, U);
    const Eigen::RowVectorXcd b = Hbar.row(m);

    std::vector<ComplexVector> coords;
    std::vector<double> residuals;
    bool done = true;
    for (Index i = 0; i < wanted; ++i) {
      coords.push_back(U * triangular_eigenvector(T, i));
      const double res = std::abs(b.dot(coords.back().conjugate()));
      residuals.push_back(res);
      const double mag = std::abs(T(i, i));
      const bool required = mag >= options.magnitude_floor && mag > 0.0;
      if (required && res > options.tolerance * mag) done = false;
    }
    done = done && result.restarts >= options.min_restarts;
    if (done || result.restarts >= options.max_restarts) {
      result.converged = done;
      for (Index i = 0; i < wanted; ++i) {
        ComplexVector x = V.leftCols(m) * coords[static_cast<size_t>(i)];
        const double mag = std::abs(T(i, i));
        const double res = residuals[static_cast<size_t>(i)];
        result.pairs.push_back({T(i, i), x.normalized(), res, res <= options.tolerance * mag});
      }
      return result;
    }

    k = std::min<Index>(wanted + (m - wanted) / 2, m - 1);
    const ComplexMatrix kept = V.leftCols(m) * U.leftCols(k);
    V.leftCols(k) = kept;
    V.col(k) = V.col(m);
    ComplexMatrix next = ComplexMatrix::Zero(m + 1, m);
    next.topLeftCorner(k, k) = T.topLeftCorner(k, k);
    next.row(k).head(k) = b * U.leftCols(k);
    Hbar = std::move(next);
    ++result.restarts;
  }
}

}  // namespace nlsdecay
