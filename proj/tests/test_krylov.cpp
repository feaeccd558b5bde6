// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/krylov.hpp"

using namespace nlsdecay;

namespace {

std::vector<Complex> largest(const ComplexVector& values, size_t count) {
  std::vector<Complex> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
  v.resize(count);
  return v;
}

double distance_to(const std::vector<Complex>& set, Complex z) {
  double best = 1e300;
  for (Complex s : set) best = std::min(best, std::abs(s - z));
  return best;
}

}  // namespace

TEST(KrylovSchur, DiagonalOperator) {
  const Index n = 300;
  ComplexVector diag(n);
  for (Index i = 0; i < n; ++i) diag[i] = Complex(1.0 / (1.0 + i), 0.01 * std::sin(double(i)));
  const LinearMap op = [&](const ComplexVector& x) -> ComplexVector {
    return (diag.array() * x.array()).matrix();
  };
  KrylovOptions opts;
  opts.wanted = 6;
  const KrylovResult r = krylov_schur(op, n, opts);
  ASSERT_TRUE(r.converged);
  ASSERT_EQ(r.pairs.size(), 6u);
  const auto expected = largest(diag, 6);
  for (const RitzPair& p : r.pairs) {
    EXPECT_LT(distance_to(expected, p.theta), 1e-10);
    EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
    EXPECT_LT((op(p.vector) - p.theta * p.vector).norm(), 1e-9);
  }
  for (size_t i = 1; i < r.pairs.size(); ++i) {
    EXPECT_GE(std::abs(r.pairs[i - 1].theta), std::abs(r.pairs[i].theta));
  }
}

TEST(KrylovSchur, NonNormalMatrixAgainstDenseSolver) {
  const Index n = 200;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  // Dense random coupling keeps the eigenvectors well conditioned while
  // making the matrix far from normal.
  const double scale = 0.3 / std::sqrt(double(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = scale * Complex(d(rng), d(rng));
    a(i, i) += Complex(0.5 + 2.0 * i / n, 0.3 * d(rng));
  }
  const Eigen::ComplexEigenSolver<ComplexMatrix> dense(a, false);
  const auto expected = largest(dense.eigenvalues(), 8);
  KrylovOptions opts;
  opts.wanted = 8;
  opts.seed = 3;
  const KrylovResult r = krylov_schur([&](const ComplexVector& x) -> ComplexVector { return a * x; }, n, opts);
  ASSERT_TRUE(r.converged);
  for (const RitzPair& p : r.pairs) {
    EXPECT_LT(distance_to(expected, p.theta), 1e-8);
    EXPECT_LT((a * p.vector - p.theta * p.vector).norm(), 1e-8 * std::abs(p.theta));
  }
  EXPECT_GT(r.restarts, 0);
}

TEST(KrylovSchur, SmallProblemsUseDenseFallback) {
  const Index n = 20;
  ComplexMatrix a = ComplexMatrix::Random(n, n);
  KrylovOptions opts;
  opts.wanted = 3;
  const KrylovResult r = krylov_schur([&](const ComplexVector& x) -> ComplexVector { return a * x; }, n, opts);
  EXPECT_EQ(r.applications, n);
  const Eigen::ComplexEigenSolver<ComplexMatrix> dense(a, false);
  const auto expected = largest(dense.eigenvalues(), 3);
  for (const RitzPair& p : r.pairs) EXPECT_LT(distance_to(expected, p.theta), 1e-10);
}

TEST(KrylovSchur, InvariantStartingSubspaceRecovers) {
  // Rank-two operator: the Krylov space collapses after two steps.
  const Index n = 100;
  ComplexVector u = ComplexVector::Zero(n), v = ComplexVector::Zero(n);
  u[0] = 1.0;
  v[1] = 1.0;
  const LinearMap op = [&](const ComplexVector& x) -> ComplexVector {
    return 3.0 * u * x[0] + 2.0 * v * x[1];
  };
  KrylovOptions opts;
  opts.wanted = 2;
  const KrylovResult r = krylov_schur(op, n, opts);
  ASSERT_GE(r.pairs.size(), 2u);
  EXPECT_NEAR(std::abs(r.pairs[0].theta - 3.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.pairs[1].theta - 2.0), 0.0, 1e-12);
}

TEST(KrylovSchur, RejectsDegenerateOptions) {
  KrylovOptions opts;
  opts.subspace = 2;
  EXPECT_THROW(krylov_schur([](const ComplexVector& x) -> ComplexVector { return x; }, 50, opts),
               ValidationError);
}
