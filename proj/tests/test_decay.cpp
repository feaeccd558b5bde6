// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nlsdecay/decay.hpp"
#include "nlsdecay/errors.hpp"
#include "nlsdecay/nls.hpp"

using namespace nlsdecay;

namespace {

PotentialPair soliton_potentials(const Grid& g, double sigma) {
  const NonlinearitySpec nl(sigma);
  const StationaryProfile p = solve_ground_state(g, 1.0, nl, closed_form_soliton(g, 1.0, nl).phi);
  return linearization_potentials(p, nl);
}

template <typename F>
Vec2Field sample(const Grid& g, F first, double second_scale = 0.0) {
  ComplexVector a(g.node_count()), b(g.node_count());
  for (Index i = 0; i < g.node_count(); ++i) {
    const double x = g.coordinate(static_cast<int>(i));
    const bool edge = g.is_boundary(i);
    a[i] = edge ? 0.0 : first(x);
    b[i] = edge ? 0.0 : second_scale * first(x);
  }
  return Vec2Field(g, a, b);
}

double identity_residual(int points) {
  const Grid g(1, 20.0, points);
  const EnergyOperator hhat = assemble_HhatE(g, 1.0, Complex(0.2, 0.4), soliton_potentials(g, 1.0));
  const WeightField w = weight_field(g, DecayParameters::make(1.0, Complex(0.2, 0.4), 0.08, 1.0));
  const Vec2Field psi = sample(g, [](double x) { return std::exp(-0.3 * x * x) * Complex(1.0, 0.5); }, 0.7);
  return conjugation_identity_residual(hhat, w.f, psi);
}

double commutator_error(int points) {
  const Grid g(1, 20.0, points);
  const RealField chi = exterior_cutoff_field(g, CutoffSpec{4.0});
  const RealSparse c = cutoff_commutator(g, chi, 2);
  ComplexVector psi(g.unknown_count());
  for (Index u = 0; u < psi.size(); ++u) {
    const double x = g.coordinate(static_cast<int>(g.node_of(u)));
    psi[u] = std::exp(-(x - 6.0) * (x - 6.0));
  }
  return (c.cast<Complex>() * psi - commutator_first_order(g, chi, psi)).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST(Parameters, DerivedQuantities) {
  const DecayParameters p = DecayParameters::make(1.0, Complex(-0.3, 2.0), 0.1, 0.5);
  EXPECT_DOUBLE_EQ(p.mu_e, 0.7);
  EXPECT_DOUBLE_EQ(p.beta, std::sqrt(0.5));
  EXPECT_THROW(DecayParameters::make(1.0, 0.0, 0.5, 0.0), ValidationError);
  EXPECT_THROW(DecayParameters::make(1.0, 0.0, 0.0, 0.0), ValidationError);
  EXPECT_THROW(DecayParameters::make(1.0, 1.2, 0.1, 0.0), ValidationError);
  EXPECT_THROW(DecayParameters::make(1.0, 0.0, 0.1, -1.0), ValidationError);
}

TEST(Parameters, WeightValues) {
  const Grid g(1, 10.0, 201);
  const DecayParameters p = DecayParameters::make(1.0, 0.0, 0.1, 0.5);
  const WeightField w = weight_field(g, p);
  EXPECT_DOUBLE_EQ(w.f[100], p.beta / 1.5);
  const double b = std::sqrt(101.0);
  EXPECT_NEAR(w.f[0], p.beta * b / (1.0 + 0.5 * b), 1e-13);
  // eps = 0 is the unregularised weight beta <x>.
  const WeightField w0 = weight_field(g, DecayParameters::make(1.0, 0.0, 0.1, 0.0));
  EXPECT_NEAR(w0.f[0], p.beta * b, 1e-13);
}

// References from scipy eigvalsh on the restricted block matrix.
TEST(ExteriorQuotient, MatchesReference) {
  const Grid g(1, 20.0, 256);
  const PotentialPair pots = soliton_potentials(g, 1.0);
  const EnergyOperator h0 = assemble_HhatE(g, 1.0, 0.0, pots);
  EXPECT_NEAR(exterior_quotient(h0, 5.0), 1.04351730393257, 1e-9);
  EXPECT_NEAR(exterior_quotient(h0, 8.0), 1.06764230119634, 1e-9);
  EXPECT_NEAR(exterior_quotient(h0, 12.0), 1.14829323327594, 1e-9);
  const EnergyOperator h3 = assemble_HhatE(g, 1.0, Complex(0.3, 1.0), pots);
  EXPECT_NEAR(exterior_quotient(h3, 5.0), 0.743517869060882, 1e-9);
  EXPECT_THROW(exterior_quotient(h0, 18.0), ValidationError);
}

TEST(ExteriorQuotient, SelectedRadiusSatisfiesPremise) {
  const Grid g(1, 20.0, 512);
  const EnergyOperator h = assemble_HhatE(g, 1.0, 0.0, soliton_potentials(g, 1.0));
  const auto r = select_cutoff_radius(h, 1.0, 0.05);
  ASSERT_TRUE(r.has_value());
  EXPECT_GE(exterior_quotient(h, *r), 0.95);
  EXPECT_LT(exterior_quotient(h, 0.0 + g.spacing()), 0.95);
}

TEST(ConjugationIdentity, TrivialWeightIsExact) {
  const Grid g(1, 20.0, 256);
  const EnergyOperator hhat = assemble_HhatE(g, 1.0, Complex(0.2, 0.4), soliton_potentials(g, 1.0));
  const Vec2Field psi = sample(g, [](double x) { return std::exp(-0.3 * x * x); }, -0.4);
  EXPECT_LE(conjugation_identity_residual(hhat, RealField(g, RealVector::Zero(256)), psi), 1e-12);
}

TEST(ConjugationIdentity, ResidualShrinksUnderRefinement) {
  const double r1 = identity_residual(256), r2 = identity_residual(512), r3 = identity_residual(1024);
  EXPECT_LT(r1, 1e-3);
  EXPECT_LT(r2, r1 / 3.0);
  EXPECT_LT(r3, r2 / 3.0);
}

TEST(Commutator, StencilAgreesWithFirstOrderFormula) {
  const double e1 = commutator_error(401), e2 = commutator_error(801);
  EXPECT_LT(e1, 1e-2);
  EXPECT_NEAR(e1 / e2, 4.0, 0.6);
}

TEST(Commutator, VanishesAwayFromTheTransition) {
  const Grid g(1, 20.0, 401);
  const RealSparse c = cutoff_commutator(g, exterior_cutoff_field(g, CutoffSpec{4.0}), 4);
  for (Index row = 0; row < c.rows(); ++row) {
    const double r = g.radius(g.node_of(row));
    if (r < 3.5 || r > 8.5) {
      EXPECT_EQ(c.row(row).norm(), 0.0);
    }
  }
}

TEST(DecayFit, RecoversRateWithSmoothPrefactor) {
  const Grid g(1, 20.0, 1024);
  for (double a : {0.3, 0.7, 1.0, 2.0}) {
    const Vec2Field phi = sample(
        g, [a](double x) { return std::exp(-a * std::abs(x)) * (1.0 + 0.5 / (1.0 + x * x)); }, 0.3);
    // Keep the far end of the window above the amplitude floor.
    const DecayFit fit = fit_decay_rate(phi, 6.0, std::min(17.0, 26.0 / a));
    EXPECT_NEAR(fit.rate, a, 0.01 * a);
    EXPECT_EQ(fit.side_rates.size(), 2u);
  }
}

TEST(DecayFit, PowerPrefactorIsCorrected) {
  const Grid g(1, 20.0, 1024);
  const Vec2Field phi = sample(g, [](double x) { return x * x * std::exp(-std::abs(x)); });
  const DecayFit fit = fit_decay_rate(phi, 8.0, 17.0);
  EXPECT_TRUE(fit.power_corrected);
  EXPECT_NEAR(fit.prefactor_power, 2.0, 0.05);
  EXPECT_NEAR(fit.rate, 1.0, 0.01);
  EXPECT_LT(fit.plain_rate, 0.9);
}

TEST(DecayFit, RejectsBadWindows) {
  const Grid g(1, 20.0, 256);
  const Vec2Field phi = sample(g, [](double x) { return std::exp(-std::abs(x)); });
  EXPECT_THROW(fit_decay_rate(phi, 8.0, 19.0), ValidationError);
  EXPECT_THROW(fit_decay_rate(phi, 9.0, 8.0), ValidationError);
  EXPECT_THROW(fit_decay_rate(phi, 8.0, 9.0), ValidationError);
  const Vec2Field zero = sample(g, [](double) { return 0.0; });
  EXPECT_THROW(fit_decay_rate(zero, 8.0, 17.0), NumericError);
  const double deltas[] = {0.1};
  EXPECT_THROW(decay_report(phi, 1.0, 0.0, deltas, 8.0, 17.0, -0.1), ValidationError);
}

TEST(DecayReport, BoundsUseBeta) {
  const Grid g(1, 20.0, 1024);
  const Vec2Field phi = sample(g, [](double x) { return std::exp(-std::abs(x)); });
  const double deltas[] = {0.05, 0.1, 0.2};
  const DecayReport r = decay_report(phi, 1.0, 0.0, deltas, 8.0, 17.0);
  ASSERT_EQ(r.bounds.size(), 3u);
  EXPECT_DOUBLE_EQ(r.bounds[0].bound, std::sqrt(0.9));
  EXPECT_TRUE(r.bounds[0].passed);
  EXPECT_TRUE(r.passed);
  const DecayReport slow = decay_report(sample(g, [](double x) { return std::exp(-0.5 * std::abs(x)); }),
                                        1.0, 0.0, deltas, 8.0, 17.0);
  EXPECT_FALSE(slow.passed);
}

// The growing-mode eigenvector of the supercritical linearisation satisfies
// the weighted exterior bound, with the left side growing as eps decreases.
TEST(ExteriorBound, HoldsForSupercriticalEigenvector) {
  const Grid g(1, 20.0, 512);
  const PotentialPair pots = soliton_potentials(g, 3.0);
  const BlockOperator h = assemble_H(g, 1.0, pots);
  const JordanChain chain = jordan_chain(h, Complex(0.0, 3.0866), 0.3);
  ASSERT_EQ(chain.index(), 1);
  const EnergyOperator hhat = assemble_HhatE(g, 1.0, chain.value, pots);
  const double eps[] = {1.0, 0.3, 0.1, 0.0};
  for (double delta : {0.05, 0.1, 0.2}) {
    const LemmaReport r = chain_decay_sweep(hhat, chain, delta, eps);
    ASSERT_EQ(r.status, CheckStatus::kApplied) << r.reason;
    EXPECT_TRUE(r.all_hold);
    EXPECT_TRUE(r.monotone_lhs);
    ASSERT_EQ(r.samples.size(), 4u);
    EXPECT_EQ(r.samples.back().epsilon, 0.0);
    EXPECT_GE(r.exterior_quotient, 1.0 - delta);
  }
}

TEST(ExteriorBound, CubicJordanChain) {
  const Grid g(1, 20.0, 512);
  const PotentialPair pots = soliton_potentials(g, 1.0);
  const JordanStructure js = jordan_structure(assemble_H(g, 1.0, pots), 0.0, 0.3);
  const EnergyOperator hhat = assemble_HhatE(g, 1.0, 0.0, pots);
  const double eps[] = {1.0, 0.1, 0.0};
  for (const JordanChain& c : js.chains) {
    const LemmaReport r = chain_decay_sweep(hhat, c, 0.1, eps);
    ASSERT_EQ(r.status, CheckStatus::kApplied) << r.reason;
    EXPECT_EQ(r.chain_length, 2);
    EXPECT_TRUE(r.all_hold);
  }
}

TEST(ExteriorBound, NonEigenvectorIsInapplicable) {
  const Grid g(1, 20.0, 256);
  const EnergyOperator hhat = assemble_HhatE(g, 1.0, 0.0, soliton_potentials(g, 1.0));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d;
  ComplexVector v(2 * g.unknown_count());
  for (Index i = 0; i < v.size(); ++i) v[i] = d(rng);
  const double eps[] = {1.0, 0.0};
  const LemmaReport r = lemma3_check(hhat, Vec2Field::from_unknowns(g, v), 0.1, eps, 5.0);
  EXPECT_EQ(r.status, CheckStatus::kInapplicable);
  EXPECT_FALSE(r.all_hold);
  EXPECT_EQ(to_string(r.status), "inapplicable");
}
