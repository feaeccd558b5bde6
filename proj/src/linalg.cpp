// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <lapacke.h>

#include "nlsdecay/errors.hpp"

namespace nlsdecay {

double smallest_symmetric_eigenvalue(const RealSparse& a) {
  const Index n = a.rows();
  if (n == 0 || a.cols() != n) throw ValidationError("symmetric eigenproblem needs a square matrix");
  Index kd = 0;
  for (Index row = 0; row < n; ++row) {
    for (RealSparse::InnerIterator it(a, row); it; ++it) kd = std::max(kd, std::abs(it.col() - row));
  }
  // Upper band storage, column major: ab(kd + i - j, j) = a(i, j) for i <= j.
  const Index ldab = kd + 1;
  std::vector<double> ab(static_cast<size_t>(ldab * n), 0.0);
  for (Index row = 0; row < n; ++row) {
    for (RealSparse::InnerIterator it(a, row); it; ++it) {
      if (it.col() >= row) ab[static_cast<size_t>(kd + row - it.col() + it.col() * ldab)] = it.value();
    }
  }
  lapack_int found = 0;
  std::vector<double> eigenvalues(static_cast<size_t>(n));
  std::vector<lapack_int> ifail(static_cast<size_t>(n));
  double q = 0.0, z = 0.0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dsbevx(
      LAPACK_COL_MAJOR, 'N', 'I', 'U', static_cast<lapack_int>(n), static_cast<lapack_int>(kd),
      ab.data(), static_cast<lapack_int>(ldab), &q, 1, 0.0, 0.0, 1, 1, abstol, &found,
      eigenvalues.data(), &z, 1, ifail.data());
  if (info != 0 || found != 1) {
    throw NumericError("band eigensolver failed (info " + std::to_string(info) + ")");
  }
  return eigenvalues[0];
}

RealSparse interleave_blocks(const RealSparse& a) {
  const Index dim = a.rows();
  if (dim % 2 != 0 || a.cols() != dim) throw ValidationError("block matrix must be 2n x 2n");
  const Index n = dim / 2;
  auto target = [n](Index k) { return k < n ? 2 * k : 2 * (k - n) + 1; };
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(a.nonZeros());
  for (Index row = 0; row < dim; ++row) {
    for (RealSparse::InnerIterator it(a, row); it; ++it) {
      entries.emplace_back(target(row), target(it.col()), it.value());
    }
  }
  RealSparse out(dim, dim);
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

double spectral_norm_bound(const ComplexSparse& a) {
  RealVector col_sums = RealVector::Zero(a.cols());
  double row_max = 0.0;
  for (Index row = 0; row < a.rows(); ++row) {
    double sum = 0.0;
    for (ComplexSparse::InnerIterator it(a, row); it; ++it) {
      sum += std::abs(it.value());
      col_sums[it.col()] += std::abs(it.value());
    }
    row_max = std::max(row_max, sum);
  }
  const double col_max = col_sums.size() ? col_sums.maxCoeff() : 0.0;
  return std::sqrt(row_max * col_max);
}

}  // namespace nlsdecay
