// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/grid.hpp"

using namespace nlsdecay;

namespace {

// Applies -Delta to f sampled on the nodes and returns the maximal error
// against g over |x| <= 5.
template <typename F, typename G>
double laplacian_error(int points, int order, F f, G minus_second_derivative) {
  const Grid grid(1, 10.0, points);
  const Index n = grid.unknown_count();
  RealVector u(n);
  for (Index k = 0; k < n; ++k) u[k] = f(grid.coordinate(static_cast<int>(grid.node_of(k))));
  const RealVector lu = -(laplacian(grid, order) * u);
  double err = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double x = grid.coordinate(static_cast<int>(grid.node_of(k)));
    if (std::abs(x) <= 5.0) err = std::max(err, std::abs(lu[k] - minus_second_derivative(x)));
  }
  return err;
}

}  // namespace

TEST(Grid, SpacingAndCounts) {
  const Grid g1(1, 20.0, 1024);
  EXPECT_DOUBLE_EQ(g1.spacing(), 40.0 / 1023.0);
  EXPECT_EQ(g1.node_count(), 1024);
  EXPECT_EQ(g1.unknown_count(), 1022);
  EXPECT_DOUBLE_EQ(g1.coordinate(0), -20.0);
  EXPECT_NEAR(g1.coordinate(1023), 20.0, 1e-12);

  const Grid g2(2, 5.0, 12);
  EXPECT_EQ(g2.node_count(), 144);
  EXPECT_EQ(g2.unknown_count(), 100);
  EXPECT_DOUBLE_EQ(g2.cell_volume(), g2.spacing() * g2.spacing());
}

TEST(Grid, RejectsBadParameters) {
  EXPECT_THROW(Grid(3, 1.0, 16), ValidationError);
  EXPECT_THROW(Grid(1, 0.0, 16), ValidationError);
  EXPECT_THROW(Grid(1, 1.0, 7), ValidationError);
  EXPECT_THROW(laplacian(Grid(1, 1.0, 16), 3), ValidationError);
}

TEST(Grid, UnknownNumberingRoundTrips) {
  for (const Grid& g : {Grid(1, 3.0, 9), Grid(2, 3.0, 9)}) {
    Index interior = 0;
    for (Index node = 0; node < g.node_count(); ++node) {
      if (g.is_boundary(node)) continue;
      EXPECT_EQ(g.node_of(g.unknown_of(node)), node);
      ++interior;
    }
    EXPECT_EQ(interior, g.unknown_count());
  }
}

TEST(Grid, FieldsValidateSamples) {
  const Grid g(1, 1.0, 10);
  EXPECT_THROW(RealField(g, RealVector::Zero(9)), ValidationError);
  RealVector bad = RealVector::Zero(10);
  bad[3] = std::nan("");
  EXPECT_THROW(RealField(g, bad), ValidationError);
  EXPECT_THROW(Vec2Field(g, ComplexVector::Zero(10), ComplexVector::Zero(11)), ValidationError);
}

TEST(Grid, StackedUnknownsRoundTrip) {
  const Grid g(1, 2.0, 12);
  ComplexVector stacked(2 * g.unknown_count());
  for (Index k = 0; k < stacked.size(); ++k) stacked[k] = Complex(k, -k);
  const Vec2Field f = Vec2Field::from_unknowns(g, stacked);
  EXPECT_EQ(f.first()[0], Complex(0.0));
  EXPECT_EQ(f.second()[11], Complex(0.0));
  EXPECT_EQ(f.unknowns(), stacked);
}

// The sine modes are exact eigenvectors of the second-order Dirichlet
// stencil with eigenvalue (4 / h^2) sin^2(k pi h / (4 L)).
TEST(Laplacian, SineModesAreEigenvectors) {
  const double L = 20.0;
  const Grid g(1, L, 64);
  const double h = g.spacing();
  const RealSparse lap = laplacian(g, 2);
  for (int k : {1, 2, 7}) {
    RealVector v(g.unknown_count());
    for (Index u = 0; u < v.size(); ++u) {
      const double x = g.coordinate(static_cast<int>(g.node_of(u)));
      v[u] = std::sin(k * std::numbers::pi * (x + L) / (2.0 * L));
    }
    const double lambda = 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / (4.0 * L)), 2);
    EXPECT_LT((-(lap * v) - lambda * v).norm(), 1e-12 * v.norm());
  }
}

TEST(Laplacian, IsSymmetricAndNegative) {
  for (const Grid& g : {Grid(1, 3.0, 20), Grid(2, 3.0, 10)}) {
    for (int order : {2, 4}) {
      const RealSparse lap = laplacian(g, order);
      EXPECT_EQ((RealSparse(lap.transpose()) - lap).norm(), 0.0);
      const RealVector v = RealVector::Random(g.unknown_count());
      EXPECT_LT(v.dot(lap * v), 0.0);
    }
  }
}

TEST(Laplacian, ConvergenceOrders) {
  auto f = [](double x) { return std::exp(-x * x); };
  auto mf2 = [](double x) { return -(4.0 * x * x - 2.0) * std::exp(-x * x); };
  const double e2a = laplacian_error(201, 2, f, mf2), e2b = laplacian_error(401, 2, f, mf2);
  const double e4a = laplacian_error(201, 4, f, mf2), e4b = laplacian_error(401, 4, f, mf2);
  EXPECT_NEAR(e2a / e2b, 4.0, 0.3);
  EXPECT_NEAR(e4a / e4b, 16.0, 1.5);
}

TEST(Laplacian, TwoDimensionalProductModes) {
  const double L = 3.0;
  const Grid g(2, L, 14);
  const double h = g.spacing();
  RealVector v(g.unknown_count());
  for (Index u = 0; u < v.size(); ++u) {
    const auto p = g.position(g.node_of(u));
    v[u] = std::sin(std::numbers::pi * (p[0] + L) / (2 * L)) *
           std::sin(2 * std::numbers::pi * (p[1] + L) / (2 * L));
  }
  auto mode = [&](int k) {
    return 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / (4.0 * L)), 2);
  };
  EXPECT_LT((-(laplacian(g, 2) * v) - (mode(1) + mode(2)) * v).norm(), 1e-11 * v.norm());
}

TEST(Cutoff, ProfileShape) {
  EXPECT_EQ(cutoff_profile(0.0), 1.0);
  EXPECT_EQ(cutoff_profile(1.0), 1.0);
  EXPECT_EQ(cutoff_profile(2.0), 0.0);
  EXPECT_EQ(cutoff_profile(7.0), 0.0);
  EXPECT_DOUBLE_EQ(cutoff_profile(1.5), 0.5);
  double previous = 1.0;
  for (double t = 1.0; t <= 2.0; t += 0.01) {
    const double v = cutoff_profile(t);
    EXPECT_LE(v, previous);
    previous = v;
  }
}

TEST(Cutoff, ExteriorFieldVanishesInside) {
  const Grid g(1, 20.0, 401);
  const RealField chi = exterior_cutoff_field(g, CutoffSpec{4.0});
  const RealField j = cutoff_field(g, CutoffSpec{4.0});
  for (Index i = 0; i < g.node_count(); ++i) {
    const double r = g.radius(i);
    if (r <= 4.0) {
      EXPECT_EQ(chi[i], 0.0);
    }
    if (r >= 8.0) {
      EXPECT_EQ(chi[i], 1.0);
    }
    EXPECT_DOUBLE_EQ(chi[i] + j[i], 1.0);
  }
}

TEST(Fields, BracketAndGradient) {
  const Grid g(1, 5.0, 501);
  const RealField b = bracket_x(g);
  EXPECT_DOUBLE_EQ(b[250], 1.0);
  EXPECT_NEAR(b[0], std::sqrt(26.0), 1e-12);
  RealVector quad(g.node_count());
  for (Index i = 0; i < g.node_count(); ++i) quad[i] = 0.5 * std::pow(g.coordinate(static_cast<int>(i)), 2);
  const RealField d = partial_derivative(RealField(g, quad), 0);
  const RealField d2 = gradient_squared(RealField(g, quad));
  for (Index i = 1; i + 1 < g.node_count(); ++i) {
    const double x = g.coordinate(static_cast<int>(i));
    EXPECT_NEAR(d[i], x, 1e-12);
    EXPECT_NEAR(d2[i], x * x, 1e-10);
  }
}
