// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/nls.hpp"

using namespace nlsdecay;

namespace {

double peak(const RealField& f) { return f.values().maxCoeff(); }

double discrete_norm(const RealField& f) {
  return std::sqrt(f.values().squaredNorm() * f.grid().cell_volume());
}

StationaryProfile newton_profile(int points, double sigma) {
  const Grid g(1, 20.0, points);
  const NonlinearitySpec nl(sigma);
  return solve_ground_state(g, 1.0, nl, closed_form_soliton(g, 1.0, nl).phi);
}

}  // namespace

TEST(Nonlinearity, PowerLaw) {
  const NonlinearitySpec nl(1.5);
  EXPECT_DOUBLE_EQ(nl.value(4.0), 8.0);
  EXPECT_DOUBLE_EQ(nl.derivative(4.0), 1.5 * 2.0);
  EXPECT_DOUBLE_EQ(nl.derivative_times_argument(4.0), 12.0);
  EXPECT_EQ(NonlinearitySpec(0.5).derivative_times_argument(0.0), 0.0);
  EXPECT_THROW(NonlinearitySpec(0.0), ValidationError);
  EXPECT_THROW(NonlinearitySpec(-1.0), ValidationError);
}

TEST(Soliton, ClosedFormPeak) {
  const Grid g(1, 20.0, 1025);  // odd: x = 0 is a node
  EXPECT_NEAR(peak(closed_form_soliton(g, 1.0, NonlinearitySpec(1.0)).phi), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(peak(closed_form_soliton(g, 2.0, NonlinearitySpec(3.0)).phi), std::pow(8.0, 1.0 / 6.0),
              1e-14);
}

TEST(Soliton, ClosedFormResidualIsSecondOrder) {
  const NonlinearitySpec nl(1.0);
  const double r1 = closed_form_soliton(Grid(1, 20.0, 513), 1.0, nl).residual;
  const double r2 = closed_form_soliton(Grid(1, 20.0, 1025), 1.0, nl).residual;
  EXPECT_NEAR(r1 / r2, 4.0, 0.2);
}

// Reference profiles from an independent scipy root solve of the same
// discrete equation (tools/derive_oracles.py).
TEST(Newton, MatchesReferenceCubic) {
  const StationaryProfile p = newton_profile(256, 1.0);
  EXPECT_LT(p.residual, 1e-10);
  EXPECT_NEAR(peak(p.phi), 1.41128632529213, 1e-10);
  EXPECT_NEAR(discrete_norm(p.phi), 1.99758664338295, 1e-10);
  EXPECT_FALSE(p.sign_changing);
}

TEST(Newton, MatchesReferenceSupercritical) {
  const StationaryProfile p = newton_profile(256, 3.0);
  EXPECT_LT(p.residual, 1e-10);
  EXPECT_NEAR(peak(p.phi), 1.2517095716589, 1e-10);
  EXPECT_NEAR(discrete_norm(p.phi), 1.48468774030287, 1e-10);
}

TEST(Newton, DefaultResolutionResidual) {
  const StationaryProfile p = newton_profile(1024, 1.0);
  EXPECT_LT(p.residual, 1e-8);
  EXPECT_LT(p.iterations, 10);
}

TEST(Newton, PerturbedSeedConvergesToSameProfile) {
  const Grid g(1, 20.0, 1024);
  const NonlinearitySpec nl(1.0);
  const StationaryProfile base = solve_ground_state(g, 1.0, nl, closed_form_soliton(g, 1.0, nl).phi);
  const RealField scaled(g, 1.1 * closed_form_soliton(g, 1.0, nl).phi.values());
  const StationaryProfile p = solve_ground_state(g, 1.0, nl, scaled);
  EXPECT_LT((p.phi.values() - base.phi.values()).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Newton, ZeroSeedIsReported) {
  const Grid g(1, 20.0, 128);
  try {
    solve_ground_state(g, 1.0, NonlinearitySpec(1.0), RealField(g, RealVector::Zero(128)));
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("zero solution"), std::string::npos);
  }
}

TEST(Newton, RejectsBadInputs) {
  const Grid g(1, 20.0, 128);
  const NonlinearitySpec nl(1.0);
  const RealField seed = closed_form_soliton(g, 1.0, nl).phi;
  EXPECT_THROW(solve_ground_state(g, -1.0, nl, seed), ValidationError);
  EXPECT_THROW(solve_ground_state(Grid(1, 20.0, 130), 1.0, nl, seed), ValidationError);
  EXPECT_THROW(closed_form_soliton(Grid(2, 5.0, 16), 1.0, nl), ValidationError);
}

TEST(Potentials, CubicLinearization) {
  const StationaryProfile p = newton_profile(256, 1.0);
  const PotentialPair pots = linearization_potentials(p, NonlinearitySpec(1.0));
  for (Index i = 0; i < 256; ++i) {
    const double s = p.phi[i] * p.phi[i];
    EXPECT_DOUBLE_EQ(pots.U[i], -2.0 * s);
    EXPECT_DOUBLE_EQ(pots.W[i], -s);
  }
  EXPECT_LT(pots.tail_magnitude, 1e-14);
  EXPECT_THROW(linearization_potentials(p, NonlinearitySpec(1.0), 1e-20), ValidationError);
}

TEST(Potentials, CsvRoundTrip) {
  const StationaryProfile p = newton_profile(64, 1.0);
  const PotentialPair pots = linearization_potentials(p, NonlinearitySpec(1.0));
  std::stringstream buffer;
  write_potentials_csv(buffer, pots);
  const PotentialPair back = read_potentials_csv(buffer);
  EXPECT_EQ(back.U.grid().points(), 64);
  EXPECT_NEAR(back.U.grid().half_length(), 20.0, 1e-12);
  EXPECT_LT((back.U.values() - pots.U.values()).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LT((back.W.values() - pots.W.values()).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Potentials, CsvValidation) {
  std::stringstream bad_header("x,U\n0,0\n");
  EXPECT_THROW(read_potentials_csv(bad_header), ValidationError);

  std::stringstream uneven;
  uneven << "x,U,W\n";
  for (double x : {-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.5, 3.0, 4.0}) uneven << x << ",0,0\n";
  EXPECT_THROW(read_potentials_csv(uneven), ValidationError);

  std::stringstream garbage("x,U,W\n-1,0,zero\n");
  EXPECT_THROW(read_potentials_csv(garbage), ValidationError);
  EXPECT_THROW(read_potentials_file("/nonexistent/potentials.csv"), ValidationError);
}

TEST(Profile, CsvHeader) {
  const StationaryProfile p = newton_profile(32, 1.0);
  std::stringstream out;
  write_profile_csv(out, p.phi);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "x,value");
  int rows = 0;
  while (std::getline(out, line)) ++rows;
  EXPECT_EQ(rows, 32);
}
