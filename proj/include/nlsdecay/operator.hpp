// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include <Eigen/SparseLU>

#include "nlsdecay/grid.hpp"
#include "nlsdecay/nls.hpp"

namespace nlsdecay {

enum class OperatorKind {
  kLinearized,    // [[-Delta + mu + U, W], [-W, Delta - mu - U]]
  kFree,          // the same with U = W = 0
  kEnergy,        // [[L - E, W], [W, L + E]],  L = -Delta + mu + U
  kPerturbation,  // [[U, W], [-W, -U]]
  kConjugated,
};

struct OperatorDescriptor {
  OperatorKind kind = OperatorKind::kConjugated;
  double mu = 0.0;
  Complex energy{0.0, 0.0};
  int order = 2;
};

std::string to_string(OperatorKind kind);

// 2x2 block operator over the n interior unknowns, stored as one 2n x 2n
// complex sparse matrix whose first n rows/columns belong to component 1.
class BlockOperator {
 public:
  BlockOperator(Grid grid, ComplexSparse matrix, OperatorDescriptor descriptor);

  const Grid& grid() const { return grid_; }
  const ComplexSparse& matrix() const { return matrix_; }
  const OperatorDescriptor& descriptor() const { return descriptor_; }
  Index block_size() const { return grid_.unknown_count(); }
  Index dimension() const { return matrix_.rows(); }

  // Block tag of an entry: 0 = (1,1), 1 = (1,2), 2 = (2,1), 3 = (2,2).
  int block_of(Index row, Index col) const;
  ComplexSparse block(int block_row, int block_col) const;

  bool is_real() const;
  ComplexVector apply(const ComplexVector& v) const { return matrix_ * v; }
  Vec2Field apply(const Vec2Field& v) const;

 private:
  Grid grid_;
  ComplexSparse matrix_;
  OperatorDescriptor descriptor_;
};

// Energy operator with its exact split Re + i Im.
class EnergyOperator : public BlockOperator {
 public:
  EnergyOperator(BlockOperator full, RealSparse re_part, RealVector im_diagonal);

  // [[L - Re E, W], [W, L + Re E]], real symmetric.
  const RealSparse& re_part() const { return re_part_; }
  // Diagonal of diag(-Im E, Im E), length 2n.
  const RealVector& im_part() const { return im_diagonal_; }

 private:
  RealSparse re_part_;
  RealVector im_diagonal_;
};

BlockOperator assemble_H(const Grid& grid, double mu, const PotentialPair& pots, int order = 2);
BlockOperator assemble_H0(const Grid& grid, double mu, int order = 2);
BlockOperator assemble_V(const Grid& grid, const PotentialPair& pots);
EnergyOperator assemble_HhatE(const Grid& grid, double mu, Complex energy,
                              const PotentialPair& pots, int order = 2);
EnergyOperator assemble_HhatE0(const Grid& grid, double mu, Complex energy, int order = 2);
// [[U, W], [W, U]]
RealSparse assemble_Vhat(const Grid& grid, const PotentialPair& pots);

struct LminusOperator {
  RealSparse matrix;  // -Delta + mu + U - W
  double smallest_eigenvalue;
  bool positive;
};

LminusOperator assemble_Lminus(const Grid& grid, double mu, const PotentialPair& pots,
                               int order = 2, double positivity_tolerance = 1e-8);

enum class Conjugation { kSigma3, kSigma1 };

// Block-level sign flips (sigma3) or block swaps (sigma1); entries are moved,
// never recomputed.
BlockOperator symmetry_conjugate(const BlockOperator& op, Conjugation which);

ComplexSparse conjugate_transpose(const ComplexSparse& m);

// Sparse LU of (H - z). Construction fails with SingularShiftError when the
// shift is numerically on the spectrum.
class FactorizedResolvent {
 public:
  FactorizedResolvent(const BlockOperator& op, Complex shift, double max_condition = 1e12);

  Complex shift() const { return shift_; }
  Index fill() const { return fill_; }
  double condition_estimate() const { return condition_; }

  ComplexVector solve(const ComplexVector& rhs) const;
  ComplexVector solve_adjoint(const ComplexVector& rhs) const;

 private:
  using Solver = Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>>;

  Complex shift_;
  Eigen::SparseMatrix<Complex> shifted_;
  std::shared_ptr<Solver> lu_;
  Index fill_ = 0;
  double condition_ = 0.0;
};

// Applies (H - z)^{-1}, caching one factorization per shift.
class Resolvent {
 public:
  explicit Resolvent(const BlockOperator& op) : op_(op) {}

  const FactorizedResolvent& factorization(Complex z);
  Vec2Field apply(Complex z, const Vec2Field& rhs);
  ComplexVector apply(Complex z, const ComplexVector& rhs);

 private:
  const BlockOperator& op_;
  std::mutex mutex_;
  std::map<std::pair<double, double>, std::unique_ptr<FactorizedResolvent>> cache_;
};

// One-shot solve with the relative residual checked against 1e-10.
Vec2Field apply_resolvent(const BlockOperator& op, Complex z, const Vec2Field& rhs);

// Estimate of the spectral norm of V (H0 + i lambda)^{-1} by power iteration.
double perturbation_resolvent_norm(const BlockOperator& free_op, const BlockOperator& perturbation,
                                   double lambda, int iterations = 60);

// (H0 - z)^{-1} (1 + V (H0 - z)^{-1})^{-1} rhs with the inner inverse summed as
// a Neumann series; requires ||V (H0 - z)^{-1}|| < 1.
ComplexVector resolvent_via_free_operator(const BlockOperator& free_op,
                                          const BlockOperator& perturbation, Complex z,
                                          const ComplexVector& rhs, double tolerance = 1e-14,
                                          int max_terms = 500);

// Text export: "# rows cols nnz" header, then one "row col re im" line per
// stored entry, 0-based, rows ascending.
void write_triplets(std::ostream& out, const ComplexSparse& m);

}  // namespace nlsdecay
