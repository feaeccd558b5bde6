// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/operator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/linalg.hpp"

namespace nlsdecay {
namespace {

using Triplet = Eigen::Triplet<Complex>;

void require_same_grid(const Grid& grid, const PotentialPair& pots) {
  if (!(pots.U.grid() == grid) || !(pots.W.grid() == grid)) {
    throw ValidationError("potentials were sampled on a different grid");
  }
}

// Entries of L = -Delta + mu + U on the unknowns, one row at a time.
template <typename Emit>
void emit_schrodinger_row(const RealSparse& lap, Index row, double diagonal_shift, Emit&& emit) {
  for (RealSparse::InnerIterator it(lap, row); it; ++it) {
    const double v = it.col() == row ? -it.value() + diagonal_shift : -it.value();
    emit(it.col(), v);
  }
}

ComplexSparse from_triplets(Index dim, const std::vector<Triplet>& entries) {
  ComplexSparse m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

RealVector interior_potential(const Grid& grid, const RealField& field) {
  RealVector out(grid.unknown_count());
  for (Index u = 0; u < out.size(); ++u) out[u] = field[grid.node_of(u)];
  return out;
}

}  // namespace

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kLinearized: return "linearized";
    case OperatorKind::kFree: return "free";
    case OperatorKind::kEnergy: return "energy";
    case OperatorKind::kPerturbation: return "perturbation";
    case OperatorKind::kConjugated: return "conjugated";
  }
  return "unknown";
}

BlockOperator::BlockOperator(Grid grid, ComplexSparse matrix, OperatorDescriptor descriptor)
    : grid_(grid), matrix_(std::move(matrix)), descriptor_(descriptor) {
  const Index dim = 2 * grid_.unknown_count();
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw ValidationError("block operator dimension does not match twice the unknown count");
  }
  matrix_.makeCompressed();
}

int BlockOperator::block_of(Index row, Index col) const {
  const Index n = block_size();
  return 2 * static_cast<int>(row >= n) + static_cast<int>(col >= n);
}

ComplexSparse BlockOperator::block(int block_row, int block_col) const {
  const Index n = block_size();
  return matrix_.block(block_row * n, block_col * n, n, n);
}

bool BlockOperator::is_real() const {
  for (Index k = 0; k < matrix_.nonZeros(); ++k) {
    if (matrix_.valuePtr()[k].imag() != 0.0) return false;
  }
  return true;
}

Vec2Field BlockOperator::apply(const Vec2Field& v) const {
  if (!(v.grid() == grid_)) throw ValidationError("field lives on a different grid");
  return Vec2Field::from_unknowns(grid_, matrix_ * v.unknowns());
}

EnergyOperator::EnergyOperator(BlockOperator full, RealSparse re_part, RealVector im_diagonal)
    : BlockOperator(std::move(full)), re_part_(std::move(re_part)),
      im_diagonal_(std::move(im_diagonal)) {}

BlockOperator assemble_H(const Grid& grid, double mu, const PotentialPair& pots, int order) {
  require_same_grid(grid, pots);
  const RealSparse lap = laplacian(grid, order);
  const Index n = grid.unknown_count();
  const RealVector u = interior_potential(grid, pots.U);
  const RealVector w = interior_potential(grid, pots.W);

  std::vector<Triplet> entries;
  entries.reserve(2 * lap.nonZeros() + 2 * n);
  for (Index row = 0; row < n; ++row) {
    emit_schrodinger_row(lap, row, mu + u[row],
                         [&](Index col, double v) { entries.emplace_back(row, col, v); });
    if (w[row] != 0.0) entries.emplace_back(row, n + row, w[row]);
  }
  for (Index row = 0; row < n; ++row) {
    if (w[row] != 0.0) entries.emplace_back(n + row, row, -w[row]);
    emit_schrodinger_row(lap, row, mu + u[row],
                         [&](Index col, double v) { entries.emplace_back(n + row, n + col, -v); });
  }
  const bool free = pots.U.values().isZero(0.0) && pots.W.values().isZero(0.0);
  OperatorDescriptor desc{free ? OperatorKind::kFree : OperatorKind::kLinearized, mu, {}, order};
  return BlockOperator(grid, from_triplets(2 * n, entries), desc);
}

BlockOperator assemble_H0(const Grid& grid, double mu, int order) {
  return assemble_H(grid, mu, zero_potentials(grid), order);
}

BlockOperator assemble_V(const Grid& grid, const PotentialPair& pots) {
  require_same_grid(grid, pots);
  const Index n = grid.unknown_count();
  const RealVector u = interior_potential(grid, pots.U);
  const RealVector w = interior_potential(grid, pots.W);
  std::vector<Triplet> entries;
  for (Index row = 0; row < n; ++row) {
    entries.emplace_back(row, row, u[row]);
    entries.emplace_back(row, n + row, w[row]);
  }
  for (Index row = 0; row < n; ++row) {
    entries.emplace_back(n + row, row, -w[row]);
    entries.emplace_back(n + row, n + row, -u[row]);
  }
  return BlockOperator(grid, from_triplets(2 * n, entries),
                       OperatorDescriptor{OperatorKind::kPerturbation, 0.0, {}, 2});
}

EnergyOperator assemble_HhatE(const Grid& grid, double mu, Complex energy,
                              const PotentialPair& pots, int order) {
  require_same_grid(grid, pots);
  const RealSparse lap = laplacian(grid, order);
  const Index n = grid.unknown_count();
  const RealVector u = interior_potential(grid, pots.U);
  const RealVector w = interior_potential(grid, pots.W);
  const double re = energy.real();
  const double im = energy.imag();

  std::vector<Eigen::Triplet<double>> re_entries;
  std::vector<Triplet> entries;
  re_entries.reserve(2 * lap.nonZeros() + 2 * n);
  entries.reserve(2 * lap.nonZeros() + 2 * n);
  auto push = [&](Index row, Index col, double v, double imag) {
    re_entries.emplace_back(row, col, v);
    entries.emplace_back(row, col, Complex(v, imag));
  };
  for (int component = 0; component < 2; ++component) {
    const double sign = component == 0 ? -1.0 : 1.0;
    const Index offset = component * n;
    for (Index row = 0; row < n; ++row) {
      const Index other = component == 0 ? n + row : row;
      if (component == 1 && w[row] != 0.0) push(offset + row, other, w[row], 0.0);
      for (RealSparse::InnerIterator it(lap, row); it; ++it) {
        if (it.col() == row) {
          push(offset + row, offset + row, -it.value() + (mu + u[row]) + sign * re, sign * im);
        } else {
          push(offset + row, offset + it.col(), -it.value(), 0.0);
        }
      }
      if (component == 0 && w[row] != 0.0) push(offset + row, other, w[row], 0.0);
    }
  }
  RealSparse re_part(2 * n, 2 * n);
  re_part.setFromTriplets(re_entries.begin(), re_entries.end());
  re_part.makeCompressed();
  RealVector im_diag(2 * n);
  im_diag.head(n).setConstant(-im);
  im_diag.tail(n).setConstant(im);
  BlockOperator full(grid, from_triplets(2 * n, entries),
                     OperatorDescriptor{OperatorKind::kEnergy, mu, energy, order});
  return EnergyOperator(std::move(full), std::move(re_part), std::move(im_diag));
}

EnergyOperator assemble_HhatE0(const Grid& grid, double mu, Complex energy, int order) {
  return assemble_HhatE(grid, mu, energy, zero_potentials(grid), order);
}

RealSparse assemble_Vhat(const Grid& grid, const PotentialPair& pots) {
  require_same_grid(grid, pots);
  const Index n = grid.unknown_count();
  const RealVector u = interior_potential(grid, pots.U);
  const RealVector w = interior_potential(grid, pots.W);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index row = 0; row < n; ++row) {
    entries.emplace_back(row, row, u[row]);
    entries.emplace_back(row, n + row, w[row]);
    entries.emplace_back(n + row, row, w[row]);
    entries.emplace_back(n + row, n + row, u[row]);
  }
  RealSparse m(2 * n, 2 * n);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

LminusOperator assemble_Lminus(const Grid& grid, double mu, const PotentialPair& pots, int order,
                               double positivity_tolerance) {
  require_same_grid(grid, pots);
  const RealSparse lap = laplacian(grid, order);
  const Index n = grid.unknown_count();
  const RealVector u = interior_potential(grid, pots.U);
  const RealVector w = interior_potential(grid, pots.W);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(lap.nonZeros());
  for (Index row = 0; row < n; ++row) {
    emit_schrodinger_row(lap, row, mu + u[row] - w[row],
                         [&](Index col, double v) { entries.emplace_back(row, col, v); });
  }
  RealSparse m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  const double smallest = smallest_symmetric_eigenvalue(m);
  return LminusOperator{std::move(m), smallest, smallest >= -positivity_tolerance};
}

BlockOperator symmetry_conjugate(const BlockOperator& op, Conjugation which) {
  const Index n = op.block_size();
  const ComplexSparse& m = op.matrix();
  std::vector<Triplet> entries;
  entries.reserve(m.nonZeros());
  for (Index row = 0; row < m.rows(); ++row) {
    for (ComplexSparse::InnerIterator it(m, row); it; ++it) {
      const int tag = op.block_of(row, it.col());
      if (which == Conjugation::kSigma3) {
        const bool off_diagonal = tag == 1 || tag == 2;
        entries.emplace_back(row, it.col(), off_diagonal ? -it.value() : it.value());
      } else {
        const Index r = row < n ? row + n : row - n;
        const Index c = it.col() < n ? it.col() + n : it.col() - n;
        entries.emplace_back(r, c, it.value());
      }
    }
  }
  OperatorDescriptor desc = op.descriptor();
  desc.kind = OperatorKind::kConjugated;
  return BlockOperator(op.grid(), from_triplets(m.rows(), entries), desc);
}

ComplexSparse conjugate_transpose(const ComplexSparse& m) {
  ComplexSparse out = m.adjoint();
  out.makeCompressed();
  return out;
}

FactorizedResolvent::FactorizedResolvent(const BlockOperator& op, Complex shift,
                                         double max_condition)
    : shift_(shift), lu_(std::make_shared<Solver>()) {
  Eigen::SparseMatrix<Complex> shifted = op.matrix();
  for (Index k = 0; k < shifted.rows(); ++k) shifted.coeffRef(k, k) -= shift;
  shifted.makeCompressed();
  shifted_ = std::move(shifted);
  lu_->compute(shifted_);
  std::ostringstream where;
  where << "shift " << shift.real() << (shift.imag() < 0 ? "" : "+") << shift.imag() << "i";
  if (lu_->info() != Eigen::Success) {
    throw SingularShiftError("sparse LU failed at " + where.str() + ": " + lu_->lastErrorMessage(),
                             std::numeric_limits<double>::infinity());
  }
  fill_ = lu_->nnzL() + lu_->nnzU();

  // Hager-Higham estimate of ||(H - z)^{-1}||_1.
  const Index dim = shifted_.rows();
  ComplexVector x = ComplexVector::Constant(dim, Complex(1.0 / dim, 0.0));
  double inverse_norm = 0.0;
  Index last_index = -1;
  for (int sweep = 0; sweep < 5; ++sweep) {
    const ComplexVector y = solve(x);
    const double estimate = y.lpNorm<1>();
    if (!std::isfinite(estimate)) {
      inverse_norm = std::numeric_limits<double>::infinity();
      break;
    }
    if (sweep > 0 && estimate <= inverse_norm) break;
    inverse_norm = estimate;
    ComplexVector sign(dim);
    for (Index i = 0; i < dim; ++i) {
      const double a = std::abs(y[i]);
      sign[i] = a > 0.0 ? y[i] / a : Complex(1.0, 0.0);
    }
    const ComplexVector z = solve_adjoint(sign);
    Index index = 0;
    z.cwiseAbs().maxCoeff(&index);
    if (index == last_index) break;
    last_index = index;
    x.setZero();
    x[index] = 1.0;
  }
  double column_max = 0.0;
  RealVector col_sums = RealVector::Zero(dim);
  for (Index k = 0; k < shifted_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(shifted_, k); it; ++it) {
      col_sums[it.col()] += std::abs(it.value());
    }
  }
  column_max = col_sums.maxCoeff();
  condition_ = column_max * inverse_norm;
  if (!(condition_ <= max_condition)) {
    std::ostringstream msg;
    msg << "near-singular factorization at " << where.str() << " (condition estimate "
        << condition_ << ")";
    throw SingularShiftError(msg.str(), condition_);
  }
}

ComplexVector FactorizedResolvent::solve(const ComplexVector& rhs) const { return lu_->solve(rhs); }

ComplexVector FactorizedResolvent::solve_adjoint(const ComplexVector& rhs) const {
  return lu_->adjoint().solve(rhs);
}

const FactorizedResolvent& Resolvent::factorization(Complex z) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = std::make_pair(z.real(), z.imag());
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, std::make_unique<FactorizedResolvent>(op_, z)).first;
  }
  return *it->second;
}

ComplexVector Resolvent::apply(Complex z, const ComplexVector& rhs) {
  const FactorizedResolvent& f = factorization(z);
  ComplexVector v = f.solve(rhs);
  const ComplexVector r = op_.apply(v) - z * v - rhs;
  const double scale = rhs.norm();
  const double relative = scale > 0.0 ? r.norm() / scale : r.norm();
  if (!(relative <= 1e-10)) {
    std::ostringstream msg;
    msg << "resolvent residual " << relative << " exceeds 1e-10 (condition estimate "
        << f.condition_estimate() << ")";
    throw SingularShiftError(msg.str(), f.condition_estimate());
  }
  return v;
}

Vec2Field Resolvent::apply(Complex z, const Vec2Field& rhs) {
  if (!(rhs.grid() == op_.grid())) throw ValidationError("field lives on a different grid");
  return Vec2Field::from_unknowns(op_.grid(), apply(z, rhs.unknowns()));
}

Vec2Field apply_resolvent(const BlockOperator& op, Complex z, const Vec2Field& rhs) {
  Resolvent resolvent(op);
  return resolvent.apply(z, rhs);
}

double perturbation_resolvent_norm(const BlockOperator& free_op, const BlockOperator& perturbation,
                                   double lambda, int iterations) {
  // (H0 + i lambda)^{-1} = (H0 - z)^{-1} with z = -i lambda.
  const FactorizedResolvent r0(free_op, Complex(0.0, -lambda));
  const ComplexSparse& v = perturbation.matrix();
  const ComplexSparse v_adj = conjugate_transpose(v);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  ComplexVector x(free_op.dimension());
  for (Index i = 0; i < x.size(); ++i) x[i] = Complex(normal(rng), normal(rng));
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const ComplexVector ax = v * r0.solve(x);
    const ComplexVector ata = r0.solve_adjoint(v_adj * ax);
    const double norm = ata.norm();
    if (norm == 0.0) return 0.0;
    const double next = std::sqrt(norm);
    x = ata / norm;
    if (std::abs(next - estimate) <= 1e-10 * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

ComplexVector resolvent_via_free_operator(const BlockOperator& free_op,
                                          const BlockOperator& perturbation, Complex z,
                                          const ComplexVector& rhs, double tolerance,
                                          int max_terms) {
  const FactorizedResolvent r0(free_op, z);
  const ComplexSparse& v = perturbation.matrix();
  // y = sum_k (-V R0)^k rhs
  ComplexVector term = rhs;
  ComplexVector sum = rhs;
  const double scale = rhs.norm();
  for (int k = 1; k <= max_terms; ++k) {
    term = -(v * r0.solve(term));
    sum += term;
    if (term.norm() <= tolerance * scale) return r0.solve(sum);
  }
  throw NumericError("Neumann series for the free-operator resolvent did not converge");
}

void write_triplets(std::ostream& out, const ComplexSparse& m) {
  out << "# " << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Index row = 0; row < m.outerSize(); ++row) {
    for (ComplexSparse::InnerIterator it(m, row); it; ++it) {
      out << row << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
}

}  // namespace nlsdecay
