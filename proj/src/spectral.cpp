// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/krylov.hpp"
#include "nlsdecay/linalg.hpp"
#include "nlsdecay/log.hpp"

namespace nlsdecay {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool lexicographic_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::string format_complex(Complex z) {
  std::ostringstream out;
  out.precision(6);
  out << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return out.str();
}

int odd_cell_count(double extent, double spacing) {
  int n = std::max(1, static_cast<int>(std::ceil(extent / spacing - 1e-12)));
  return n % 2 == 0 ? n + 1 : n;
}

ComplexMatrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

struct RankDecision {
  int rank;
  double gap_ratio;
  bool determinate;
};

// Singular values (descending) below the threshold count as zero; the ratio of
// the last kept to the first dropped value must exceed `required_gap`.
RankDecision decide_rank(const RealVector& sv, double threshold, double required_gap) {
  const int total = static_cast<int>(sv.size());
  int rank = 0;
  while (rank < total && sv[rank] > threshold) ++rank;
  double gap = std::numeric_limits<double>::infinity();
  if (rank > 0 && rank < total) {
    gap = sv[rank - 1] / std::max(sv[rank], std::numeric_limits<double>::min());
  } else if (rank == total && total > 0) {
    gap = sv[total - 1] / threshold;
  }
  return {rank, gap, gap > required_gap};
}

double max_distance(std::span<const Complex> from, std::span<const Complex> to) {
  double worst = 0.0;
  for (Complex a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (Complex b : to) best = std::min(best, std::abs(a - b));
    worst = std::max(worst, best);
  }
  return worst;
}

// Orthonormal basis for the span of the columns, dropping dependent ones.
ComplexMatrix orthonormal_span(const ComplexMatrix& cols, double tolerance) {
  if (cols.cols() == 0) return ComplexMatrix(cols.rows(), 0);
  Eigen::JacobiSVD<ComplexMatrix> svd(cols, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > tolerance * std::max(1.0, sv[0])) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

bool Strip::contains(Complex z) const {
  return std::abs(z.real()) < re_bound && std::abs(z.imag()) <= im_bound;
}

std::vector<Complex> SpectralSet::values() const {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.value);
  return out;
}

int SpectralSet::total_multiplicity() const {
  int total = 0;
  for (const auto& p : points) total += p.multiplicity;
  return total;
}

std::vector<SpectralPoint> cluster_values(std::span<const Complex> values, double radius) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return lexicographic_less(values[a], values[b]); });
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      const Complex va = values[order[a]], vb = values[order[b]];
      if (vb.real() - va.real() > radius) break;
      if (std::abs(va - vb) <= radius) parent[find(b)] = find(a);
    }
  }
  std::vector<std::vector<Complex>> groups(n);
  for (size_t a = 0; a < n; ++a) groups[find(a)].push_back(values[order[a]]);
  std::vector<SpectralPoint> points;
  for (auto& g : groups) {
    if (g.empty()) continue;
    SpectralPoint p;
    Complex sum = 0.0;
    for (Complex v : g) sum += v;
    p.value = sum / static_cast<double>(g.size());
    p.members = std::move(g);
    p.multiplicity = static_cast<int>(p.members.size());
    points.push_back(std::move(p));
  }
  std::sort(points.begin(), points.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
    return lexicographic_less(a.value, b.value);
  });
  return points;
}

std::vector<Complex> dense_eigenvalues(const BlockOperator& op, Index dense_cap) {
  const Index dim = op.dimension();
  if (dim > dense_cap) {
    std::ostringstream msg;
    msg << "dense eigensolve of dimension " << dim << " exceeds the cap " << dense_cap;
    throw ValidationError(msg.str());
  }
  std::vector<Complex> out;
  out.reserve(static_cast<size_t>(dim));
  if (op.is_real()) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix().real());
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    for (Index i = 0; i < dim; ++i) out.push_back(solver.eigenvalues()[i]);
  } else {
    const ComplexMatrix dense = ComplexMatrix(op.matrix());
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(dense, false);
    if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    for (Index i = 0; i < dim; ++i) out.push_back(solver.eigenvalues()[i]);
  }
  std::sort(out.begin(), out.end(), lexicographic_less);
  return out;
}

SpectralSet dense_spectrum(const BlockOperator& op, Index dense_cap, double dedup_radius) {
  const std::vector<Complex> values = dense_eigenvalues(op, dense_cap);
  SpectralSet set;
  set.points = cluster_values(values, dedup_radius);
  set.dedup_radius = dedup_radius;
  set.cluster_radius = dedup_radius;
  return set;
}

SpectralSet restrict_to_strip(const SpectralSet& set, const Strip& strip, double cluster_radius) {
  std::vector<Complex> inside;
  for (const auto& p : set.points) {
    for (Complex v : p.members) {
      if (strip.contains(v)) inside.push_back(v);
    }
  }
  SpectralSet out;
  out.points = cluster_values(inside, cluster_radius);
  out.strip = strip;
  out.dedup_radius = set.dedup_radius;
  out.cluster_radius = cluster_radius;
  return out;
}

Strip gap_strip(double mu, const GapOptions& options) {
  if (!(options.margin > 0.0)) throw ValidationError("strip margin must be positive");
  if (!(options.imag_cap >= 0.0)) throw ValidationError("imaginary cap must be non-negative");
  if (options.margin >= mu) {
    std::ostringstream msg;
    msg << "degenerate strip: margin " << options.margin << " >= mu " << mu
        << " leaves no room for gap eigenvalues";
    throw ValidationError(msg.str());
  }
  return Strip{mu - options.margin, options.imag_cap};
}

SpectralSet gap_eigenvalues(const BlockOperator& op, const GapOptions& options) {
  const double mu = op.descriptor().mu;
  const Strip strip = gap_strip(mu, options);
  if (!(options.tolerance > 0.0)) throw ValidationError("eigen tolerance must be positive");
  if (!(options.cluster_radius >= options.dedup_radius)) {
    throw ValidationError("cluster radius must not be smaller than the dedup radius");
  }
  const double spacing = options.shift_spacing > 0.0 ? options.shift_spacing : 0.25 * mu;
  const int n_re = odd_cell_count(2.0 * strip.re_bound, spacing);
  const int n_im = strip.im_bound > 0.0 ? odd_cell_count(2.0 * strip.im_bound, spacing) : 1;
  const double w_re = 2.0 * strip.re_bound / n_re;
  const double w_im = strip.im_bound > 0.0 ? 2.0 * strip.im_bound / n_im : spacing;
  const double im_origin = strip.im_bound > 0.0 ? -strip.im_bound : -0.5 * w_im;
  const double cell_radius = 0.5 * std::hypot(w_re, w_im);

  SpectralSet set;
  set.strip = strip;
  set.dedup_radius = options.dedup_radius;
  set.cluster_radius = options.cluster_radius;

  struct Candidate {
    SpectralPoint point;
    double distance;
  };
  std::vector<Candidate> candidates;

  auto note = [&](const std::string& message) {
    set.diagnostics.push_back(message);
    log_message(LogLevel::kWarning, message);
  };

  for (int a = 0; a < n_re; ++a) {
    for (int b = 0; b < n_im; ++b) {
      const Complex center(-strip.re_bound + (a + 0.5) * w_re, im_origin + (b + 0.5) * w_im);
      const Complex offset(0.0137 * w_re, 0.0093 * w_im);
      std::unique_ptr<FactorizedResolvent> resolvent;
      Complex shift;
      for (int attempt = 0; attempt < 4 && !resolvent; ++attempt) {
        shift = center + offset + static_cast<double>(attempt) * Complex(0.031 * w_re, 0.027 * w_im);
        try {
          resolvent = std::make_unique<FactorizedResolvent>(op, shift);
        } catch (const SingularShiftError& e) {
          note("factorization failed at shift " + format_complex(shift) + ", perturbing: " +
               e.what());
        }
      }
      if (!resolvent) {
        set.partial = true;
        note("cell centred at " + format_complex(center) + " skipped after repeated failures");
        continue;
      }

      KrylovOptions kopts;
      kopts.subspace = options.subspace;
      kopts.wanted = options.wanted;
      kopts.magnitude_floor = 1.0 / (1.3 * cell_radius);
      kopts.seed = options.seed + static_cast<std::uint64_t>(a * n_im + b);
      const LinearMap map = [&](const ComplexVector& v) { return resolvent->solve(v); };
      KrylovResult result;
      for (int growth = 0; growth < 3; ++growth) {
        result = krylov_schur(map, op.dimension(), kopts);
        int inside = 0;
        for (const auto& p : result.pairs) inside += std::abs(p.theta) >= kopts.magnitude_floor;
        if (inside < static_cast<int>(result.pairs.size())) break;
        kopts.wanted *= 2;
        kopts.subspace *= 2;
      }
      if (!result.converged) {
        set.partial = true;
        note("Krylov-Schur did not converge at shift " + format_complex(shift));
      }

      std::vector<Complex> accepted;
      std::vector<double> residuals;
      std::vector<ComplexVector> vectors;
      for (const auto& pair : result.pairs) {
        if (!pair.converged || std::abs(pair.theta) < kopts.magnitude_floor) continue;
        const Complex lambda = shift + 1.0 / pair.theta;
        const double residual = (op.apply(pair.vector) - lambda * pair.vector).norm();
        if (residual > options.tolerance) {
          set.partial = true;
          std::ostringstream msg;
          msg << "eigenpair near " << format_complex(lambda) << " has residual " << residual;
          note(msg.str());
          continue;
        }
        accepted.push_back(lambda);
        residuals.push_back(residual);
        vectors.push_back(pair.vector);
      }

      for (SpectralPoint& p : cluster_values(accepted, options.cluster_radius)) {
        const bool in_cell = std::abs(p.value.real() - center.real()) <= 0.6 * w_re &&
                             std::abs(p.value.imag() - center.imag()) <= 0.6 * w_im;
        if (!in_cell || !strip.contains(p.value)) continue;
        for (size_t i = 0; i < accepted.size(); ++i) {
          if (std::find(p.members.begin(), p.members.end(), accepted[i]) == p.members.end()) continue;
          p.residual = std::max(p.residual, residuals[i]);
          p.vectors.push_back(vectors[i]);
        }
        p.shift = shift;
        p.iterations = result.applications;
        candidates.push_back({std::move(p), 0.0});
        candidates.back().distance = std::abs(candidates.back().point.value - shift);
      }
    }
  }

  // Neighbouring cells see the same eigenvalues; keep the copy from the
  // nearest shift.
  std::vector<Complex> means;
  for (const auto& c : candidates) means.push_back(c.point.value);
  for (const SpectralPoint& group : cluster_values(means, options.cluster_radius)) {
    const Candidate* best = nullptr;
    int multiplicity = -1;
    bool disagree = false;
    for (const auto& c : candidates) {
      if (std::find(group.members.begin(), group.members.end(), c.point.value) == group.members.end()) {
        continue;
      }
      if (multiplicity >= 0 && multiplicity != c.point.multiplicity) disagree = true;
      multiplicity = c.point.multiplicity;
      if (!best || c.distance < best->distance) best = &c;
    }
    if (disagree) {
      note("shifts disagree on the multiplicity near " + format_complex(group.value));
    }
    set.points.push_back(best->point);
  }
  std::sort(set.points.begin(), set.points.end(), [](const SpectralPoint& x, const SpectralPoint& y) {
    return lexicographic_less(x.value, y.value);
  });
  return set;
}

RieszProjectionReport riesz_projection(const BlockOperator& op, Complex center, double radius,
                                       const RieszOptions& options) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("contour radius must be positive");
  if (options.nodes < 4 || options.probes < 1) throw ValidationError("too few quadrature nodes or probes");
  const Index dim = op.dimension();
  int probes = static_cast<int>(std::min<Index>(options.probes, dim));

  std::vector<std::unique_ptr<FactorizedResolvent>> factors;
  std::vector<Complex> nodes;
  auto build = [&](int m) {
    factors.clear();
    nodes.clear();
    for (int j = 0; j < m; ++j) {
      const double angle = 2.0 * std::numbers::pi * (j + 0.5) / m;
      const Complex z = center + radius * Complex(std::cos(angle), std::sin(angle));
      try {
        factors.push_back(std::make_unique<FactorizedResolvent>(op, z));
      } catch (const SingularShiftError& e) {
        throw NumericError(std::string("contour too close to spectrum: ") + e.what());
      }
      nodes.push_back(z);
    }
  };
  auto project = [&](const ComplexMatrix& y) {
    ComplexMatrix acc = ComplexMatrix::Zero(y.rows(), y.cols());
    const double m = static_cast<double>(nodes.size());
    for (size_t j = 0; j < nodes.size(); ++j) {
      for (Index c = 0; c < y.cols(); ++c) {
        acc.col(c) -= (nodes[j] - center) * factors[j]->solve(y.col(c));
      }
    }
    return ComplexMatrix(acc / m);
  };

  RieszProjectionReport report{};
  report.center = center;
  report.radius = radius;
  report.previous_rank = -1;
  int m = options.nodes;
  build(m);
  for (;;) {
    const ComplexMatrix x = random_orthonormal(dim, probes, options.seed + probes);
    const ComplexMatrix px = project(x);
    Eigen::JacobiSVD<ComplexMatrix> svd(px, Eigen::ComputeThinU);
    const RealVector& sv = svd.singularValues();
    const double threshold = std::max(1e-8, 1e3 * kEps * (sv.size() ? sv[0] : 0.0));
    const RankDecision rank = decide_rank(sv, threshold, 10.0);
    if (rank.rank == probes && probes < dim) {
      probes = static_cast<int>(std::min<Index>(2 * probes, dim));
      continue;
    }
    const ComplexMatrix q = svd.matrixU().leftCols(rank.rank);
    double defect = 0.0;
    if (rank.rank > 0) {
      const ComplexMatrix diff = project(q) - q;
      defect = Eigen::JacobiSVD<ComplexMatrix>(diff).singularValues()[0];
    }
    report.previous_rank = report.nodes > 0 ? report.rank : -1;
    report.nodes = m;
    report.rank = rank.rank;
    report.gap_ratio = rank.gap_ratio;
    report.rank_determinate = rank.determinate;
    report.idempotency_defect = defect;
    report.norm_estimate = sv.size() ? sv[0] : 0.0;
    report.singular_values.assign(sv.data(), sv.data() + sv.size());
    report.basis = q;
    const bool stable = report.previous_rank == report.rank && defect <= 1e-6;
    if (stable || 2 * m > options.max_nodes) break;
    m *= 2;
    build(m);
  }
  return report;
}

double default_riesz_radius(double mu, Complex value, std::span<const Complex> others,
                            double spread) {
  double r = std::min(0.3 * mu, 0.5 * (mu - std::abs(value.real())));
  for (Complex o : others) {
    const double d = std::abs(o - value);
    if (d > spread) r = std::min(r, 0.5 * d);
  }
  return r;
}

JordanStructure jordan_structure(const BlockOperator& op, Complex value, double radius,
                                 const JordanOptions& options) {
  JordanStructure out;
  out.value = value;
  out.riesz = riesz_projection(op, value, radius, options.riesz);
  const int r = out.riesz.rank;
  out.algebraic = r;
  if (r == 0) throw NumericError("no eigenvalue inside the contour around " + format_complex(value));

  const ComplexMatrix& q = out.riesz.basis;
  const ComplexMatrix hq = op.matrix() * q;
  const ComplexMatrix t = q.adjoint() * hq;
  // The contour center is only an estimate; the mean eigenvalue of the
  // compressed operator is the eigenvalue itself when one value is enclosed.
  value = t.trace() / static_cast<double>(r);
  out.value = value;
  const ComplexMatrix nil = t - value * ComplexMatrix::Identity(r, r);
  out.threshold = std::max(options.rank_floor, 1e3 * kEps * spectral_norm_bound(op.matrix()));
  out.gap_ratio = std::numeric_limits<double>::infinity();

  std::vector<ComplexMatrix> kernels{ComplexMatrix(r, 0)};
  std::vector<int> dims{0};
  ComplexMatrix power = ComplexMatrix::Identity(r, r);
  for (int m = 1; m <= r + 1; ++m) {
    power = nil * power;
    Eigen::JacobiSVD<ComplexMatrix> svd(power, Eigen::ComputeFullV);
    const RealVector sv = svd.singularValues();
    const RankDecision rank = decide_rank(sv, out.threshold, options.gap_ratio);
    out.gap_ratio = std::min(out.gap_ratio, rank.gap_ratio);
    out.determinate = out.determinate && rank.determinate;
    const int nullity = r - rank.rank;
    if (nullity == dims.back() && m > 1) break;
    dims.push_back(nullity);
    kernels.push_back(svd.matrixV().rightCols(nullity));
    if (nullity == r) break;
  }
  out.kernel_dimensions.assign(dims.begin() + 1, dims.end());
  const int k = static_cast<int>(dims.size()) - 1;
  out.index = k;
  out.geometric = dims.size() > 1 ? dims[1] : 0;
  out.consistent = dims.back() == r;
  if (k == 0) {
    out.determinate = false;
    return out;
  }

  // Top-down chain extraction: new chain tops at each level complement the
  // lower kernel and the images of longer chains.
  struct Top {
    int level;
    ComplexVector coords;
  };
  std::vector<Top> tops;
  for (int level = k; level >= 1; --level) {
    std::vector<ComplexVector> existing;
    for (const Top& top : tops) {
      ComplexVector v = top.coords;
      for (int s = 0; s < top.level - level; ++s) v = nil * v;
      existing.push_back(v);
    }
    ComplexMatrix span_cols(r, kernels[level - 1].cols() + static_cast<Index>(existing.size()));
    span_cols.leftCols(kernels[level - 1].cols()) = kernels[level - 1];
    for (size_t i = 0; i < existing.size(); ++i) {
      span_cols.col(kernels[level - 1].cols() + static_cast<Index>(i)) = existing[i];
    }
    const ComplexMatrix s = orthonormal_span(span_cols, 1e-8);
    const int need = dims[level] - dims[level - 1] - static_cast<int>(existing.size());
    if (need <= 0) continue;
    const ComplexMatrix& kl = kernels[level];
    const ComplexMatrix complement = kl - s * (s.adjoint() * kl);
    Eigen::JacobiSVD<ComplexMatrix> svd(complement, Eigen::ComputeThinU);
    for (int i = 0; i < need && i < svd.matrixU().cols(); ++i) {
      tops.push_back({level, svd.matrixU().col(i)});
    }
  }

  std::vector<ComplexVector> stacked;
  double worst_relation = 0.0;
  for (const Top& top : tops) {
    JordanChain chain;
    chain.value = value;
    std::vector<ComplexVector> full;
    ComplexVector c = top.coords;
    for (int l = 0; l < top.level; ++l) {
      full.push_back(q * c);
      c = nil * c;
    }
    for (size_t l = 0; l < full.size(); ++l) {
      ComplexVector image = op.apply(full[l]) - value * full[l];
      if (l + 1 < full.size()) image -= full[l + 1];
      const double rel = image.norm() / full[l].norm();
      chain.relation_residuals.push_back(rel);
      worst_relation = std::max(worst_relation, rel);
      chain.vectors.push_back(Vec2Field::from_unknowns(op.grid(), full[l]));
      stacked.push_back(full[l].normalized());
    }
    out.chains.push_back(std::move(chain));
  }
  ComplexMatrix stack(op.dimension(), static_cast<Index>(stacked.size()));
  for (size_t i = 0; i < stacked.size(); ++i) stack.col(static_cast<Index>(i)) = stacked[i];
  out.smallest_singular_value =
      stacked.empty() ? 0.0 : Eigen::JacobiSVD<ComplexMatrix>(stack).singularValues().minCoeff();
  if (worst_relation > options.chain_tolerance ||
      out.smallest_singular_value < options.independence_floor) {
    out.determinate = false;
  }
  return out;
}

JordanChain jordan_chain(const BlockOperator& op, Complex value, double radius,
                         const JordanOptions& options) {
  JordanStructure s = jordan_structure(op, value, radius, options);
  if (s.chains.empty()) throw NumericError("no Jordan chain at " + format_complex(value));
  return std::move(s.chains.front());
}

double hausdorff_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(max_distance(a, b), max_distance(b, a));
}

SymmetryReport symmetry_check(std::span<const Complex> values, double tolerance) {
  std::vector<Complex> negated, conjugated;
  for (Complex v : values) {
    negated.push_back(-v);
    conjugated.push_back(std::conj(v));
  }
  SymmetryReport report{hausdorff_distance(values, negated),
                        hausdorff_distance(values, conjugated), tolerance, false};
  report.passed = report.negation_distance <= tolerance && report.conjugation_distance <= tolerance;
  return report;
}

SymmetryReport symmetry_check(const SpectralSet& set, double tolerance) {
  const std::vector<Complex> values = set.values();
  return symmetry_check(values, tolerance);
}

bool axis_confined(const SpectralSet& set, double tolerance) {
  for (const auto& p : set.points) {
    if (std::abs(p.value.real()) > tolerance && std::abs(p.value.imag()) > tolerance) return false;
  }
  return true;
}

}  // namespace nlsdecay
