// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/nls.hpp"
#include "nlsdecay/spectral.hpp"

using namespace nlsdecay;

namespace {

BlockOperator soliton_operator(int points, double sigma) {
  const Grid g(1, 20.0, points);
  const NonlinearitySpec nl(sigma);
  const StationaryProfile p = solve_ground_state(g, 1.0, nl, closed_form_soliton(g, 1.0, nl).phi);
  return assemble_H(g, 1.0, linearization_potentials(p, nl));
}

std::vector<Complex> by_imaginary_part(const SpectralSet& set) {
  std::vector<Complex> v = set.values();
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
  return v;
}

}  // namespace

TEST(Clustering, SingleLinkage) {
  const std::vector<Complex> values{{0.0, 0.0}, {0.004, 0.0}, {0.008, 0.0}, {1.0, 0.0}, {1.0, 0.5}};
  const auto points = cluster_values(values, 0.005);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[0].multiplicity, 3);
  EXPECT_NEAR(points[0].value.real(), 0.004, 1e-15);
  EXPECT_EQ(points[1].value, Complex(1.0, 0.0));
  EXPECT_EQ(points[2].value, Complex(1.0, 0.5));
}

TEST(Symmetry, HausdorffDistance) {
  const std::vector<Complex> a{{0, 1}, {0, -1}}, b{{0, 1}, {0, -1.5}};
  EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), 0.5);
  EXPECT_EQ(hausdorff_distance(std::vector<Complex>{}, std::vector<Complex>{}), 0.0);
  EXPECT_TRUE(std::isinf(hausdorff_distance(a, std::vector<Complex>{})));
}

TEST(Symmetry, ImaginaryPairPassesAndLoneValueFails) {
  const double gamma = 2.9;
  const std::vector<Complex> pair{{0, gamma}, {0, -gamma}};
  EXPECT_TRUE(symmetry_check(pair).passed);
  const std::vector<Complex> lone{{0, gamma}};
  const SymmetryReport r = symmetry_check(lone);
  EXPECT_FALSE(r.passed);
  EXPECT_DOUBLE_EQ(r.negation_distance, 2 * gamma);
  EXPECT_DOUBLE_EQ(r.conjugation_distance, 2 * gamma);
}

TEST(Strip, DegenerateMarginIsRejected) {
  GapOptions o;
  o.margin = 1.0;
  try {
    gap_strip(1.0, o);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate strip"), std::string::npos);
  }
  o.margin = 0.05;
  const Strip s = gap_strip(1.0, o);
  EXPECT_TRUE(s.contains({0.9, 4.0}));
  EXPECT_FALSE(s.contains({0.95, 0.0}));
  EXPECT_FALSE(s.contains({0.0, 4.01}));
}

TEST(GapEigenvalues, FreeOperatorHasNone) {
  const BlockOperator h0 = assemble_H0(Grid(1, 20.0, 256), 1.0);
  const SpectralSet set = gap_eigenvalues(h0, GapOptions{});
  EXPECT_TRUE(set.points.empty());
  EXPECT_FALSE(set.partial);
  EXPECT_TRUE(symmetry_check(set).passed);
}

// Reference eigenvalues from scipy.linalg.eigvals on an independently
// assembled matrix (tools/derive_oracles.py), sigma = 3, N = 256.
TEST(GapEigenvalues, SupercriticalMatchesReference) {
  const SpectralSet set = gap_eigenvalues(soliton_operator(256, 3.0), GapOptions{});
  EXPECT_FALSE(set.partial);
  const auto v = by_imaginary_part(set);
  ASSERT_EQ(v.size(), 5u);
  const double expected[] = {-3.08665077757313, -0.0323201705930571, 0.0, 0.0323201705930571,
                             3.08665077757313};
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(v[i].imag(), expected[i], 1e-7);
    EXPECT_LT(std::abs(v[i].real()), 1e-7);
  }
  EXPECT_EQ(set.total_multiplicity(), 6);
  EXPECT_TRUE(symmetry_check(set).passed);
  EXPECT_TRUE(axis_confined(set));
  for (const auto& p : set.points) EXPECT_LE(p.residual, 1e-8);
}

TEST(GapEigenvalues, AgreesWithDenseOracle) {
  const BlockOperator h = soliton_operator(128, 1.0);
  const SpectralSet gap = gap_eigenvalues(h, GapOptions{});
  const SpectralSet dense = restrict_to_strip(dense_spectrum(h), gap.strip, gap.cluster_radius);
  ASSERT_EQ(gap.points.size(), dense.points.size());
  for (size_t i = 0; i < gap.points.size(); ++i) {
    EXPECT_LT(std::abs(gap.points[i].value - dense.points[i].value), 1e-7);
    EXPECT_EQ(gap.points[i].multiplicity, dense.points[i].multiplicity);
  }
}

// Kernel dimensions of H^m at the origin from scipy SVD ranks: [2, 4].
TEST(Jordan, CubicZeroBlock) {
  const BlockOperator h = soliton_operator(256, 1.0);
  const JordanStructure js = jordan_structure(h, Complex(0.0, 0.0), 0.3);
  EXPECT_EQ(js.algebraic, 4);
  EXPECT_EQ(js.geometric, 2);
  EXPECT_EQ(js.index, 2);
  ASSERT_GE(js.kernel_dimensions.size(), 2u);
  EXPECT_EQ(js.kernel_dimensions[0], 2);
  EXPECT_EQ(js.kernel_dimensions[1], 4);
  EXPECT_TRUE(js.determinate);
  EXPECT_TRUE(js.consistent);
  EXPECT_EQ(js.riesz.rank, js.riesz.previous_rank);
  EXPECT_LT(js.riesz.idempotency_defect, 1e-6);
  ASSERT_EQ(js.chains.size(), 2u);
  for (const JordanChain& c : js.chains) {
    EXPECT_EQ(c.index(), 2);
    for (double r : c.relation_residuals) EXPECT_LT(r, 1e-6);
    // (H - E) psi_0 = psi_1 on the unknowns.
    const ComplexVector lhs = h.apply(c.vectors[0].unknowns()) - c.value * c.vectors[0].unknowns();
    EXPECT_LT((lhs - c.vectors[1].unknowns()).norm(), 1e-6 * c.vectors[1].unknowns().norm());
  }
  EXPECT_GT(js.smallest_singular_value, 1e-6);
}

TEST(Jordan, SimpleImaginaryEigenvalue) {
  const BlockOperator h = soliton_operator(256, 3.0);
  const JordanStructure js = jordan_structure(h, Complex(0.0, 3.08665077757313), 0.3);
  EXPECT_EQ(js.algebraic, 1);
  EXPECT_EQ(js.geometric, 1);
  EXPECT_EQ(js.index, 1);
  EXPECT_LE(js.riesz.idempotency_defect, 1e-8);
  const JordanChain c = jordan_chain(h, Complex(0.0, 3.08665077757313), 0.3);
  EXPECT_EQ(c.index(), 1);
}

TEST(Jordan, EmptyContourIsReported) {
  const BlockOperator h = soliton_operator(128, 1.0);
  const RieszProjectionReport r = riesz_projection(h, Complex(0.5, 0.0), 0.1);
  EXPECT_EQ(r.rank, 0);
  EXPECT_THROW(jordan_structure(h, Complex(0.5, 0.0), 0.1), NumericError);
}

TEST(Riesz, RankStableUnderNodeDoubling) {
  const BlockOperator h = soliton_operator(256, 1.0);
  RieszOptions coarse;
  RieszOptions fine;
  fine.nodes = 128;
  EXPECT_EQ(riesz_projection(h, 0.0, 0.3, coarse).rank, 4);
  EXPECT_EQ(riesz_projection(h, 0.0, 0.3, fine).rank, 4);
}

TEST(Riesz, DefaultRadiusAvoidsNeighbours) {
  const std::vector<Complex> others{{0.0, 0.0}, {0.0, 0.1}};
  EXPECT_DOUBLE_EQ(default_riesz_radius(1.0, {0.0, 0.0}, others, 1e-6), 0.05);
  EXPECT_DOUBLE_EQ(default_riesz_radius(1.0, {0.8, 0.0}, std::vector<Complex>{}, 0.0), 0.1);
  EXPECT_DOUBLE_EQ(default_riesz_radius(1.0, {0.0, 2.0}, std::vector<Complex>{}, 0.0), 0.3);
}
