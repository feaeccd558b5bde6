// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlsdecay/operator.hpp"
#include "nlsdecay/spectral.hpp"

namespace nlsdecay {

struct DecayParameters {
  double mu;
  double re_energy;
  double mu_e;   // mu - |Re E|
  double delta;  // in (0, mu_e / 2)
  double beta;   // sqrt(mu_e - 2 delta)
  double epsilon;

  static DecayParameters make(double mu, Complex energy, double delta, double epsilon);
};

// f_eps(x) = beta <x> / (1 + eps <x>).
struct WeightField {
  RealField f;
  DecayParameters params;
};

WeightField weight_field(const Grid& grid, const DecayParameters& params);

double discrete_l2(const Vec2Field& phi);
// || j e^w phi || in the h^d-weighted discrete L2 norm over both components.
double weighted_l2(const Vec2Field& phi, const RealField& exponent,
                   const RealField* cutoff = nullptr);

// Minimum of the Rayleigh quotient of Re H_E over fields vanishing on
// |x| < radius.
double exterior_quotient(const EnergyOperator& hhat, double radius);

// Smallest grid-aligned radius with exterior_quotient >= mu_E - delta, or
// nullopt when no admissible radius leaves the exterior thick enough.
std::optional<double> select_cutoff_radius(const EnergyOperator& hhat, double mu_e, double delta);

double conjugation_identity_residual(const EnergyOperator& hhat, const RealField& g,
                                     const Vec2Field& psi);

// [-Delta, chi] = (-Delta) chi - chi (-Delta) on the unknowns, formed from
// the sparse stencil; the block commutator with H_0 is diag(C, C).
RealSparse cutoff_commutator(const Grid& grid, const RealField& chi, int order);

// -(Delta chi) psi - 2 grad chi . grad psi, evaluated with centered
// differences; agrees with the stencil commutator to O(h^2).
ComplexVector commutator_first_order(const Grid& grid, const RealField& chi,
                                     const ComplexVector& psi);

enum class CheckStatus { kApplied, kInapplicable, kRadiusTooSmall };
std::string to_string(CheckStatus status);

struct InequalitySample {
  double delta;
  double epsilon;
  double lhs;
  double rhs;
  double ratio;
  bool holds;
};

struct LemmaReport {
  CheckStatus status = CheckStatus::kApplied;
  std::string reason;
  Complex energy;
  int chain_length = 1;
  double radius = 0.0;
  double exterior_quotient = 0.0;
  std::vector<InequalitySample> samples;  // epsilons in decreasing order
  bool monotone_lhs = true;
  bool all_hold = true;
};

// Both sides of ||chi e^f phi|| <= delta^{-1} ||e^f [H_0, chi] phi|| for a zero
// mode phi of H_E, with chi = 1 - j_R vanishing on the ball of radius R.
LemmaReport lemma3_check(const EnergyOperator& hhat, const Vec2Field& phi, double delta,
                         std::span<const double> epsilons, double radius,
                         double zero_mode_tolerance = 1e-6);

// Chain version: ||chi e^f psi_0|| <= sum_l delta^{-(l+1)} ||e^f [H_0, chi] psi_l||.
LemmaReport chain_decay_check(const EnergyOperator& hhat, const JordanChain& chain, double delta,
                              std::span<const double> epsilons, double radius,
                              double chain_tolerance = 1e-6);

// Selects R for (delta) and then runs the chain check; a radius failing the
// exterior premise is reported, not asserted.
LemmaReport chain_decay_sweep(const EnergyOperator& hhat, const JordanChain& chain, double delta,
                              std::span<const double> epsilons, double chain_tolerance = 1e-6);

struct DecayFit {
  double rate;
  double plain_rate;
  double corrected_rate;
  double prefactor_power;
  bool power_corrected;
  double r_squared;
  double window_lo;
  double window_hi;
  std::vector<double> side_rates;
  int samples;
};

struct DecayBound {
  double delta;
  double bound;
  bool passed;
};

struct DecayReport {
  Complex energy;
  DecayFit fit;
  double rate_tolerance;
  std::vector<DecayBound> bounds;
  bool passed;
};

// Least-squares tail rate of log(|phi_1| + |phi_2|) on window_lo <= |x| <=
// window_hi. Both the pure exponential model and a model with a power-law
// prefactor |x|^p are fitted; the latter is used when |p| >= 0.25.
DecayFit fit_decay_rate(const Vec2Field& phi, double window_lo, double window_hi);

DecayReport decay_report(const Vec2Field& phi, double mu, Complex energy,
                         std::span<const double> deltas, double window_lo, double window_hi,
                         double rate_tolerance = 0.02);

}  // namespace nlsdecay
