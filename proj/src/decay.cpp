// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/decay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/QR>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/linalg.hpp"

namespace nlsdecay {
namespace {

double mu_of(const EnergyOperator& hhat) { return hhat.descriptor().mu; }

double effective_gap(const EnergyOperator& hhat) {
  return mu_of(hhat) - std::abs(hhat.descriptor().energy.real());
}

// Positive interior coordinates in increasing order.
std::vector<double> positive_coordinates(const Grid& grid) {
  std::vector<double> out;
  for (int i = 1; i < grid.points() - 1; ++i) {
    const double x = grid.coordinate(i);
    if (x > 0.0) out.push_back(x);
  }
  return out;
}

int exterior_nodes_per_side(const Grid& grid, double radius) {
  int count = 0;
  for (double x : positive_coordinates(grid)) count += x >= radius;
  return count;
}

Vec2Field apply_scalar_blockwise(const Grid& grid, const RealSparse& c, const Vec2Field& v) {
  const ComplexVector u = v.unknowns();
  const Index n = grid.unknown_count();
  ComplexVector out(2 * n);
  out.head(n) = c.cast<Complex>() * u.head(n);
  out.tail(n) = c.cast<Complex>() * u.tail(n);
  return Vec2Field::from_unknowns(grid, out);
}

struct LineFit {
  double slope;
  double power;
  double r_squared;
};

// y = c + slope * r (+ power * log r), least squares.
LineFit fit_tail(const std::vector<double>& r, const std::vector<double>& y, bool with_power) {
  const Index n = static_cast<Index>(r.size());
  const Index k = with_power ? 3 : 2;
  Eigen::MatrixXd a(n, k);
  RealVector b(n);
  for (Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = r[static_cast<size_t>(i)];
    if (with_power) a(i, 2) = std::log(r[static_cast<size_t>(i)]);
    b[i] = y[static_cast<size_t>(i)];
  }
  const RealVector coef = a.colPivHouseholderQr().solve(b);
  const RealVector resid = a * coef - b;
  const double mean = b.mean();
  const double total = (b.array() - mean).square().sum();
  const double r2 = total > 0.0 ? 1.0 - resid.squaredNorm() / total : 1.0;
  return {coef[1], with_power ? coef[2] : 0.0, r2};
}

}  // namespace

DecayParameters DecayParameters::make(double mu, Complex energy, double delta, double epsilon) {
  const double mu_e = mu - std::abs(energy.real());
  if (!(mu_e > 0.0)) throw ValidationError("energy lies outside the gap: mu - |Re E| <= 0");
  if (!(delta > 0.0) || !(delta < 0.5 * mu_e)) {
    std::ostringstream msg;
    msg << "delta " << delta << " outside (0, " << 0.5 * mu_e << ")";
    throw ValidationError(msg.str());
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be >= 0");
  return DecayParameters{mu, energy.real(), mu_e, delta, std::sqrt(mu_e - 2.0 * delta), epsilon};
}

WeightField weight_field(const Grid& grid, const DecayParameters& params) {
  const RealVector bracket = bracket_x(grid).values();
  RealVector f = params.beta * bracket.array() / (1.0 + params.epsilon * bracket.array());
  return WeightField{RealField(grid, std::move(f)), params};
}

double discrete_l2(const Vec2Field& phi) {
  return std::sqrt(phi.grid().cell_volume() *
                   (phi.first().squaredNorm() + phi.second().squaredNorm()));
}

double weighted_l2(const Vec2Field& phi, const RealField& exponent, const RealField* cutoff) {
  if (!(exponent.grid() == phi.grid()) || (cutoff && !(cutoff->grid() == phi.grid()))) {
    throw ValidationError("weight and field live on different grids");
  }
  double sum = 0.0;
  for (Index node = 0; node < phi.grid().node_count(); ++node) {
    const double mass = std::norm(phi.first()[node]) + std::norm(phi.second()[node]);
    if (mass == 0.0) continue;
    double scale = std::exp(2.0 * exponent[node]);
    if (cutoff) scale *= (*cutoff)[node] * (*cutoff)[node];
    sum += scale * mass;
  }
  return std::sqrt(phi.grid().cell_volume() * sum);
}

double exterior_quotient(const EnergyOperator& hhat, double radius) {
  const Grid& grid = hhat.grid();
  if (!(radius < 0.9 * grid.half_length())) {
    throw ValidationError("exterior radius must be below 0.9 L");
  }
  if (exterior_nodes_per_side(grid, radius) < 8) {
    throw ValidationError("exterior region too thin: fewer than 8 nodes per side");
  }
  const Index n = grid.unknown_count();
  std::vector<Index> local(static_cast<size_t>(n), -1);
  Index count = 0;
  for (Index u = 0; u < n; ++u) {
    if (grid.radius(grid.node_of(u)) >= radius) local[static_cast<size_t>(u)] = count++;
  }
  // Node-major interleaving keeps the restricted matrix banded.
  auto target = [&](Index k) -> Index {
    const Index u = k < n ? k : k - n;
    const Index l = local[static_cast<size_t>(u)];
    if (l < 0) return -1;
    return 2 * l + (k < n ? 0 : 1);
  };
  std::vector<Eigen::Triplet<double>> entries;
  const RealSparse& re = hhat.re_part();
  for (Index row = 0; row < re.rows(); ++row) {
    const Index r = target(row);
    if (r < 0) continue;
    for (RealSparse::InnerIterator it(re, row); it; ++it) {
      const Index c = target(it.col());
      if (c >= 0) entries.emplace_back(r, c, it.value());
    }
  }
  RealSparse restricted(2 * count, 2 * count);
  restricted.setFromTriplets(entries.begin(), entries.end());
  restricted.makeCompressed();
  return smallest_symmetric_eigenvalue(restricted);
}

std::optional<double> select_cutoff_radius(const EnergyOperator& hhat, double mu_e, double delta) {
  const Grid& grid = hhat.grid();
  std::vector<double> candidates;
  for (double x : positive_coordinates(grid)) {
    if (x < 0.9 * grid.half_length() && exterior_nodes_per_side(grid, x) >= 8) {
      candidates.push_back(x);
    }
  }
  if (candidates.empty()) return std::nullopt;
  const double target = mu_e - delta;
  auto ok = [&](size_t i) { return exterior_quotient(hhat, candidates[i]) >= target; };
  if (!ok(candidates.size() - 1)) return std::nullopt;
  size_t lo = 0, hi = candidates.size() - 1;
  if (ok(lo)) return candidates[lo];
  while (hi - lo > 1) {
    const size_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return candidates[hi];
}

double conjugation_identity_residual(const EnergyOperator& hhat, const RealField& g,
                                     const Vec2Field& psi) {
  const Grid& grid = hhat.grid();
  if (!(g.grid() == grid) || !(psi.grid() == grid)) {
    throw ValidationError("weight, field and operator live on different grids");
  }
  const Index n = grid.unknown_count();
  const RealVector gi = g.interior();
  const RealVector grad2 = gradient_squared(g).interior();
  const ComplexVector a = psi.unknowns();
  const double mass = a.squaredNorm();
  if (mass == 0.0) return 0.0;

  ComplexVector b(2 * n);
  for (Index u = 0; u < n; ++u) {
    const double down = std::exp(-gi[u]);
    b[u] = down * a[u];
    b[n + u] = down * a[n + u];
  }
  ComplexVector c = hhat.apply(b);
  for (Index u = 0; u < n; ++u) {
    const double up = std::exp(gi[u]);
    c[u] *= up;
    c[n + u] *= up;
  }
  const double lhs = a.dot(c).real();

  const ComplexVector re_a = hhat.re_part().cast<Complex>() * a;
  double rhs = a.dot(re_a).real();
  for (Index u = 0; u < n; ++u) rhs -= grad2[u] * (std::norm(a[u]) + std::norm(a[n + u]));
  return std::abs(lhs - rhs) / mass;
}

RealSparse cutoff_commutator(const Grid& grid, const RealField& chi, int order) {
  if (!(chi.grid() == grid)) throw ValidationError("cut-off lives on a different grid");
  const RealSparse minus_lap = -laplacian(grid, order);
  const RealVector values = chi.interior();
  Eigen::SparseMatrix<double, Eigen::RowMajor> diag(values.size(), values.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (Index i = 0; i < values.size(); ++i) entries.emplace_back(i, i, values[i]);
  diag.setFromTriplets(entries.begin(), entries.end());
  RealSparse c = minus_lap * diag - diag * minus_lap;
  c.prune(0.0);
  c.makeCompressed();
  return c;
}

ComplexVector commutator_first_order(const Grid& grid, const RealField& chi,
                                     const ComplexVector& psi) {
  const Index n = grid.unknown_count();
  if (psi.size() != n) throw ValidationError("scalar field length does not match the unknowns");
  const double h = grid.spacing();
  ComplexVector node_psi = ComplexVector::Zero(grid.node_count());
  for (Index u = 0; u < n; ++u) node_psi[grid.node_of(u)] = psi[u];
  const int np = grid.points();
  ComplexVector out(n);
  for (Index u = 0; u < n; ++u) {
    const Index node = grid.node_of(u);
    double lap_chi = 0.0;
    Complex cross = 0.0;
    for (int axis = 0; axis < grid.dimension(); ++axis) {
      const Index stride = (grid.dimension() == 2 && axis == 0) ? np : 1;
      lap_chi += (chi[node + stride] - 2.0 * chi[node] + chi[node - stride]) / (h * h);
      const double dchi = (chi[node + stride] - chi[node - stride]) / (2.0 * h);
      const Complex dpsi = (node_psi[node + stride] - node_psi[node - stride]) / (2.0 * h);
      cross += dchi * dpsi;
    }
    out[u] = -lap_chi * psi[u] - 2.0 * cross;
  }
  return out;
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::kApplied: return "applied";
    case CheckStatus::kInapplicable: return "inapplicable";
    case CheckStatus::kRadiusTooSmall: return "radius_too_small";
  }
  return "unknown";
}

LemmaReport chain_decay_check(const EnergyOperator& hhat, const JordanChain& chain, double delta,
                              std::span<const double> epsilons, double radius,
                              double chain_tolerance) {
  LemmaReport report;
  report.energy = hhat.descriptor().energy;
  report.chain_length = chain.index();
  report.radius = radius;
  if (chain.vectors.empty()) {
    report.status = CheckStatus::kInapplicable;
    report.reason = "empty chain";
    report.all_hold = false;
    return report;
  }
  const Grid& grid = hhat.grid();
  const double mu = mu_of(hhat);
  const double mu_e = effective_gap(hhat);

  // Chain relations in the energy form: H_E psi_{l-1} equals psi_l with the
  // second component flipped, and H_E psi_{k-1} = 0.
  for (size_t l = 0; l < chain.vectors.size(); ++l) {
    const Vec2Field image = hhat.apply(chain.vectors[l]);
    ComplexVector diff = image.unknowns();
    if (l + 1 < chain.vectors.size()) {
      ComplexVector next = chain.vectors[l + 1].unknowns();
      next.tail(grid.unknown_count()) *= -1.0;
      diff -= next;
    }
    const double rel = diff.norm() / chain.vectors[l].unknowns().norm();
    if (!(rel <= chain_tolerance)) {
      std::ostringstream msg;
      msg << "chain relation residual " << rel << " at level " << l << " exceeds "
          << chain_tolerance;
      report.status = CheckStatus::kInapplicable;
      report.reason = msg.str();
      report.all_hold = false;
      return report;
    }
  }

  DecayParameters::make(mu, report.energy, delta, 0.0);
  report.exterior_quotient = exterior_quotient(hhat, radius);
  if (report.exterior_quotient < mu_e - delta) {
    std::ostringstream msg;
    msg << "exterior quotient " << report.exterior_quotient << " below mu_E - delta = "
        << mu_e - delta;
    report.status = CheckStatus::kRadiusTooSmall;
    report.reason = msg.str();
    return report;
  }

  const RealField chi = exterior_cutoff_field(grid, CutoffSpec{radius});
  const RealSparse comm = cutoff_commutator(grid, chi, hhat.descriptor().order);
  std::vector<Vec2Field> images;
  for (const auto& v : chain.vectors) images.push_back(apply_scalar_blockwise(grid, comm, v));

  std::vector<double> eps(epsilons.begin(), epsilons.end());
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  for (double e : eps) {
    const DecayParameters p = DecayParameters::make(mu, report.energy, delta, e);
    const WeightField w = weight_field(grid, p);
    InequalitySample s{delta, e, weighted_l2(chain.vectors.front(), w.f, &chi), 0.0, 0.0, false};
    double factor = 1.0;
    for (const auto& image : images) {
      factor /= delta;
      s.rhs += factor * weighted_l2(image, w.f);
    }
    s.ratio = s.rhs > 0.0 ? s.lhs / s.rhs : (s.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    s.holds = s.lhs <= s.rhs;
    if (!report.samples.empty() && s.lhs < report.samples.back().lhs * (1.0 - 1e-12)) {
      report.monotone_lhs = false;
    }
    report.all_hold = report.all_hold && s.holds;
    report.samples.push_back(s);
  }
  return report;
}

LemmaReport lemma3_check(const EnergyOperator& hhat, const Vec2Field& phi, double delta,
                         std::span<const double> epsilons, double radius,
                         double zero_mode_tolerance) {
  JordanChain single;
  single.value = hhat.descriptor().energy;
  single.vectors.push_back(phi);
  return chain_decay_check(hhat, single, delta, epsilons, radius, zero_mode_tolerance);
}

LemmaReport chain_decay_sweep(const EnergyOperator& hhat, const JordanChain& chain, double delta,
                              std::span<const double> epsilons, double chain_tolerance) {
  const double mu_e = effective_gap(hhat);
  const std::optional<double> radius = select_cutoff_radius(hhat, mu_e, delta);
  if (!radius) {
    LemmaReport report;
    report.energy = hhat.descriptor().energy;
    report.chain_length = chain.index();
    report.status = CheckStatus::kRadiusTooSmall;
    report.reason = "no grid radius satisfies the exterior premise";
    return report;
  }
  return chain_decay_check(hhat, chain, delta, epsilons, *radius, chain_tolerance);
}

DecayFit fit_decay_rate(const Vec2Field& phi, double window_lo, double window_hi) {
  const Grid& grid = phi.grid();
  const double limit = 0.9 * grid.half_length();
  if (!(window_hi <= limit * (1.0 + 1e-12))) {
    throw ValidationError("fit window reaches past 0.9 L into the boundary layer");
  }
  if (!(window_lo > 0.0) || !(window_lo < window_hi)) {
    throw ValidationError("fit window must satisfy 0 < r1 < r2");
  }
  RealVector amplitude(grid.node_count());
  for (Index node = 0; node < grid.node_count(); ++node) {
    amplitude[node] = std::abs(phi.first()[node]) + std::abs(phi.second()[node]);
  }
  const double peak = amplitude.maxCoeff();
  if (!(peak > 0.0)) throw NumericError("underflow in window: field vanishes");
  const double floor = 1e-13 * peak;

  // d = 1 fits each tail separately; d = 2 fits all window nodes radially.
  std::vector<std::vector<Index>> sides(grid.dimension() == 1 ? 2 : 1);
  for (Index node = 0; node < grid.node_count(); ++node) {
    const double r = grid.radius(node);
    if (r < window_lo || r > window_hi) continue;
    const size_t side = grid.dimension() == 1 && grid.position(node)[0] < 0.0 ? 1 : 0;
    sides[side].push_back(node);
  }
  DecayFit fit{};
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  double plain = 0.0, corrected = 0.0, power = 0.0, r2 = 1.0;
  for (const auto& nodes : sides) {
    if (nodes.size() < 16) throw ValidationError("fit window holds fewer than 16 nodes");
    std::vector<double> r, y;
    for (Index node : nodes) {
      if (!(amplitude[node] > floor)) throw NumericError("underflow in window");
      r.push_back(grid.radius(node));
      y.push_back(std::log(amplitude[node]));
    }
    const LineFit a = fit_tail(r, y, false);
    const LineFit b = fit_tail(r, y, true);
    plain += -a.slope;
    corrected += -b.slope;
    power += b.power;
    r2 = std::min(r2, a.r_squared);
    fit.side_rates.push_back(-a.slope);
  }
  const double count = static_cast<double>(sides.size());
  fit.plain_rate = plain / count;
  fit.corrected_rate = corrected / count;
  fit.prefactor_power = power / count;
  fit.power_corrected = std::abs(fit.prefactor_power) >= 0.25;
  fit.rate = fit.power_corrected ? fit.corrected_rate : fit.plain_rate;
  fit.r_squared = r2;
  fit.samples = 0;
  for (const auto& nodes : sides) fit.samples += static_cast<int>(nodes.size());
  return fit;
}

DecayReport decay_report(const Vec2Field& phi, double mu, Complex energy,
                         std::span<const double> deltas, double window_lo, double window_hi,
                         double rate_tolerance) {
  if (!(rate_tolerance >= 0.0)) throw ValidationError("rate tolerance must be non-negative");
  DecayReport report{energy, fit_decay_rate(phi, window_lo, window_hi), rate_tolerance, {}, true};
  for (double delta : deltas) {
    const DecayParameters p = DecayParameters::make(mu, energy, delta, 0.0);
    const bool passed = report.fit.rate >= p.beta - rate_tolerance;
    report.bounds.push_back({delta, p.beta, passed});
    report.passed = report.passed && passed;
  }
  return report;
}

}  // namespace nlsdecay
