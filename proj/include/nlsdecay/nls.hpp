// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <limits>
#include <string>

#include "nlsdecay/grid.hpp"

namespace nlsdecay {

// Power nonlinearity F(s) = s^sigma.
class NonlinearitySpec {
 public:
  explicit NonlinearitySpec(double exponent);

  double exponent() const { return exponent_; }
  double value(double s) const;
  double derivative(double s) const;
  // s * F'(s), evaluated without forming F'(0) for sigma < 1.
  double derivative_times_argument(double s) const;

 private:
  double exponent_;
};

struct StationaryProfile {
  RealField phi;
  double mu;
  int order;
  double residual;
  int iterations = 0;
  bool sign_changing = false;
};

struct PotentialPair {
  RealField U;
  RealField W;
  // max of |U| + |W| over |x| >= 0.9 L.
  double tail_magnitude;
};

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  int max_halvings = 30;
  // Profiles with sup-norm below this count as the trivial solution.
  double zero_threshold = 1e-8;
};

// phi(x) = ((sigma + 1) mu)^(1/(2 sigma)) sech^(1/sigma)(sigma sqrt(mu) x).
StationaryProfile closed_form_soliton(const Grid& grid, double mu, const NonlinearitySpec& nl,
                                      int order = 2);

// Newton iteration on phi -> (-Delta + mu) phi - F(phi^2) phi with a halving
// line search. The translation direction, which makes the Jacobian singular
// at a localized solution, is deflated from each step.
StationaryProfile solve_ground_state(const Grid& grid, double mu, const NonlinearitySpec& nl,
                                     const RealField& init, const NewtonOptions& options = {},
                                     int order = 2);

double nls_residual(const StationaryProfile& profile, const NonlinearitySpec& nl);

PotentialPair make_potential_pair(RealField U, RealField W);

// U = -F(phi^2) - F'(phi^2) phi^2,  W = -F'(phi^2) phi^2.
PotentialPair linearization_potentials(
    const StationaryProfile& profile, const NonlinearitySpec& nl,
    double residual_limit = std::numeric_limits<double>::infinity());

PotentialPair zero_potentials(const Grid& grid);

// CSV with header "x,value" (d = 1).
void write_profile_csv(std::ostream& out, const RealField& field);
// CSV with header "x,U,W" (d = 1).
void write_potentials_csv(std::ostream& out, const PotentialPair& pots);
// Reads "x,U,W"; the grid is inferred from the rows and must be uniform,
// symmetric about the origin, and include both endpoints.
PotentialPair read_potentials_csv(std::istream& in);
PotentialPair read_potentials_file(const std::string& path);

}  // namespace nlsdecay
