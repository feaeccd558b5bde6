// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/nls.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/SparseLU>

#include "nlsdecay/errors.hpp"

namespace nlsdecay {
namespace {

void require_line(const Grid& grid, const char* who) {
  if (grid.dimension() != 1) throw ValidationError(std::string(who) + " requires a 1D grid");
}

RealVector residual_map(const RealSparse& lap, double mu, const NonlinearitySpec& nl,
                        const RealVector& u) {
  RealVector r = -(lap * u) + mu * u;
  for (Index i = 0; i < u.size(); ++i) r[i] -= nl.value(u[i] * u[i]) * u[i];
  return r;
}

// Jacobian -Delta + mu - (F(u^2) + 2 u^2 F'(u^2)), bordered by the normalized
// discrete derivative of u when that is nonzero.
Eigen::SparseMatrix<double> newton_matrix(const RealSparse& lap, double mu,
                                          const NonlinearitySpec& nl, const RealVector& u,
                                          const RealVector* border) {
  const Index n = u.size();
  const Index dim = border ? n + 1 : n;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(lap.nonZeros() + n + (border ? 2 * n : 0));
  for (Index row = 0; row < n; ++row) {
    for (RealSparse::InnerIterator it(lap, row); it; ++it) {
      entries.emplace_back(row, it.col(), -it.value());
    }
    const double s = u[row] * u[row];
    entries.emplace_back(row, row, mu - nl.value(s) - 2.0 * nl.derivative_times_argument(s));
  }
  if (border) {
    for (Index i = 0; i < n; ++i) {
      entries.emplace_back(i, n, (*border)[i]);
      entries.emplace_back(n, i, (*border)[i]);
    }
  }
  Eigen::SparseMatrix<double> jac(dim, dim);
  jac.setFromTriplets(entries.begin(), entries.end());
  jac.makeCompressed();
  return jac;
}

RealVector centered_derivative(const RealVector& u, double h) {
  const Index n = u.size();
  RealVector d(n);
  for (Index i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    d[i] = (right - left) / (2.0 * h);
  }
  return d;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

NonlinearitySpec::NonlinearitySpec(double exponent) : exponent_(exponent) {
  if (!std::isfinite(exponent) || exponent <= 0.0) {
    throw ValidationError("nonlinearity exponent sigma must be finite and positive");
  }
}

double NonlinearitySpec::value(double s) const { return s > 0.0 ? std::pow(s, exponent_) : 0.0; }

double NonlinearitySpec::derivative(double s) const {
  if (s > 0.0) return exponent_ * std::pow(s, exponent_ - 1.0);
  if (exponent_ > 1.0) return 0.0;
  if (exponent_ == 1.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

double NonlinearitySpec::derivative_times_argument(double s) const {
  return s > 0.0 ? exponent_ * std::pow(s, exponent_) : 0.0;
}

double nls_residual(const StationaryProfile& profile, const NonlinearitySpec& nl) {
  const Grid& grid = profile.phi.grid();
  const RealSparse lap = laplacian(grid, profile.order);
  const RealVector r = residual_map(lap, profile.mu, nl, profile.phi.interior());
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

StationaryProfile closed_form_soliton(const Grid& grid, double mu, const NonlinearitySpec& nl,
                                      int order) {
  require_line(grid, "closed_form_soliton");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive");
  const double sigma = nl.exponent();
  const double amplitude = std::pow((sigma + 1.0) * mu, 1.0 / (2.0 * sigma));
  const double k = sigma * std::sqrt(mu);
  RealVector values = RealVector::Zero(grid.node_count());
  for (Index node = 0; node < values.size(); ++node) {
    if (grid.is_boundary(node)) continue;
    const double x = grid.position(node)[0];
    values[node] = amplitude * std::pow(1.0 / std::cosh(k * x), 1.0 / sigma);
  }
  StationaryProfile profile{RealField(grid, std::move(values)), mu, order, 0.0};
  profile.residual = nls_residual(profile, nl);
  return profile;
}

StationaryProfile solve_ground_state(const Grid& grid, double mu, const NonlinearitySpec& nl,
                                     const RealField& init, const NewtonOptions& options,
                                     int order) {
  require_line(grid, "solve_ground_state");
  if (!(init.grid() == grid)) throw ValidationError("initial profile lives on a different grid");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive");
  if (!(options.tolerance > 0.0)) throw ValidationError("Newton tolerance must be positive");

  const RealSparse lap = laplacian(grid, order);
  RealVector u = init.interior();
  RealVector r = residual_map(lap, mu, nl, u);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int iteration = 0;

  while (rnorm >= options.tolerance) {
    if (iteration == options.max_iterations) {
      std::ostringstream msg;
      msg << "Newton iteration did not converge in " << iteration
          << " steps (last residual " << rnorm << ")";
      throw ConvergenceError(msg.str(), rnorm, iteration);
    }
    RealVector border = centered_derivative(u, grid.spacing());
    const double bnorm = border.norm();
    const bool bordered = bnorm > options.zero_threshold;
    if (bordered) border /= bnorm;

    Eigen::SparseMatrix<double> jac = newton_matrix(lap, mu, nl, u, bordered ? &border : nullptr);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      throw ConvergenceError("Newton Jacobian factorization failed: " + lu.lastErrorMessage(),
                             rnorm, iteration);
    }
    RealVector rhs = RealVector::Zero(jac.rows());
    rhs.head(u.size()) = r;
    const RealVector step = lu.solve(rhs).head(u.size());

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, t *= 0.5) {
      RealVector trial = u - t * step;
      RealVector trial_r = residual_map(lap, mu, nl, trial);
      const double trial_norm = trial_r.lpNorm<Eigen::Infinity>();
      if (std::isfinite(trial_norm) && trial_norm < rnorm) {
        u = std::move(trial);
        r = std::move(trial_r);
        rnorm = trial_norm;
        accepted = true;
        break;
      }
    }
    ++iteration;
    if (!accepted) {
      std::ostringstream msg;
      msg << "Newton line search stalled at residual " << rnorm;
      throw ConvergenceError(msg.str(), rnorm, iteration);
    }
  }

  const double sup = u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0;
  if (sup < options.zero_threshold) {
    throw NumericError("Newton iteration converged to zero solution");
  }
  StationaryProfile profile{RealField::from_interior(grid, u), mu, order, rnorm, iteration};
  profile.sign_changing =
      u.minCoeff() < -options.zero_threshold && u.maxCoeff() > options.zero_threshold;
  return profile;
}

PotentialPair make_potential_pair(RealField U, RealField W) {
  if (!(U.grid() == W.grid())) throw ValidationError("potentials live on different grids");
  const Grid& grid = U.grid();
  double tail = 0.0;
  for (Index node = 0; node < grid.node_count(); ++node) {
    if (grid.radius(node) >= 0.9 * grid.half_length()) {
      tail = std::max(tail, std::abs(U[node]) + std::abs(W[node]));
    }
  }
  return PotentialPair{std::move(U), std::move(W), tail};
}

PotentialPair linearization_potentials(const StationaryProfile& profile,
                                       const NonlinearitySpec& nl, double residual_limit) {
  if (!(profile.residual <= residual_limit)) {
    std::ostringstream msg;
    msg << "stationary residual " << profile.residual << " exceeds " << residual_limit;
    throw ValidationError(msg.str());
  }
  const RealVector& phi = profile.phi.values();
  RealVector u(phi.size()), w(phi.size());
  for (Index i = 0; i < phi.size(); ++i) {
    const double s = phi[i] * phi[i];
    const double sfs = nl.derivative_times_argument(s);
    u[i] = -nl.value(s) - sfs;
    w[i] = -sfs;
  }
  const Grid& grid = profile.phi.grid();
  return make_potential_pair(RealField(grid, std::move(u)), RealField(grid, std::move(w)));
}

PotentialPair zero_potentials(const Grid& grid) {
  return make_potential_pair(RealField(grid, RealVector::Zero(grid.node_count())),
                             RealField(grid, RealVector::Zero(grid.node_count())));
}

void write_profile_csv(std::ostream& out, const RealField& field) {
  require_line(field.grid(), "profile CSV");
  out << "x,value\n" << std::setprecision(17);
  for (Index node = 0; node < field.grid().node_count(); ++node) {
    out << field.grid().position(node)[0] << ',' << field[node] << '\n';
  }
}

void write_potentials_csv(std::ostream& out, const PotentialPair& pots) {
  require_line(pots.U.grid(), "potentials CSV");
  out << "x,U,W\n" << std::setprecision(17);
  for (Index node = 0; node < pots.U.grid().node_count(); ++node) {
    out << pots.U.grid().position(node)[0] << ',' << pots.U[node] << ',' << pots.W[node] << '\n';
  }
}

PotentialPair read_potentials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,U,W") {
    throw ValidationError("potentials file must start with the header x,U,W");
  }
  std::vector<double> xs, us, ws;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double parsed[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(row, cell, ',')) {
        throw ValidationError("potentials file line " + std::to_string(line_no) +
                              " has fewer than 3 columns");
      }
      try {
        size_t used = 0;
        parsed[c] = std::stod(trim(cell), &used);
        if (used != trim(cell).size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError("potentials file line " + std::to_string(line_no) +
                              " has a malformed number");
      }
    }
    xs.push_back(parsed[0]);
    us.push_back(parsed[1]);
    ws.push_back(parsed[2]);
  }
  if (xs.size() < 8) throw ValidationError("potentials file needs at least 8 rows");
  const double half_length = xs.back();
  if (!(half_length > 0.0)) throw ValidationError("potentials grid must end at a positive x");
  Grid grid(1, half_length, static_cast<int>(xs.size()));
  const double tol = 1e-8 * grid.spacing();
  for (size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - grid.coordinate(static_cast<int>(i))) > tol) {
      throw ValidationError("potentials grid is not uniform and symmetric about 0 (row " +
                            std::to_string(i + 2) + ")");
    }
  }
  RealVector u = Eigen::Map<RealVector>(us.data(), us.size());
  RealVector w = Eigen::Map<RealVector>(ws.data(), ws.size());
  return make_potential_pair(RealField(grid, std::move(u)), RealField(grid, std::move(w)));
}

PotentialPair read_potentials_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open potentials file " + path);
  return read_potentials_csv(in);
}

}  // namespace nlsdecay
