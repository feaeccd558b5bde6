// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/grid.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/log.hpp"

namespace nlsdecay {
namespace {

double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// Off-diagonal weights of the 1D second-difference stencil, times h^2.
std::vector<double> stencil_weights(int order) {
  if (order == 2) return {-2.0, 1.0};
  if (order == 4) return {-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
  std::ostringstream msg;
  msg << "laplacian order must be 2 or 4, got " << order;
  throw ValidationError(msg.str());
}

void check_finite(const Eigen::Ref<const Eigen::ArrayXd>& values, const char* what) {
  if (!values.allFinite()) throw ValidationError(std::string(what) + " has non-finite samples");
}

}  // namespace

Grid::Grid(int dimension, double half_length, int points)
    : dimension_(dimension), half_length_(half_length), points_(points) {
  if (dimension != 1 && dimension != 2) {
    throw ValidationError("grid dimension must be 1 or 2");
  }
  if (!std::isfinite(half_length) || half_length <= 0.0) {
    throw ValidationError("grid half-length must be finite and positive");
  }
  if (points < 8) throw ValidationError("grid needs at least 8 points per axis");
  spacing_ = 2.0 * half_length / (points - 1);
}

Grid make_grid(int dimension, double half_length, int points) {
  return Grid(dimension, half_length, points);
}

double Grid::cell_volume() const { return dimension_ == 1 ? spacing_ : spacing_ * spacing_; }

Index Grid::node_count() const {
  Index n = points_;
  return dimension_ == 1 ? n : n * n;
}

Index Grid::unknown_count() const {
  Index m = points_ - 2;
  return dimension_ == 1 ? m : m * m;
}

std::array<int, 2> Grid::axis_indices(Index node) const {
  if (dimension_ == 1) return {static_cast<int>(node), 0};
  return {static_cast<int>(node / points_), static_cast<int>(node % points_)};
}

std::array<double, 2> Grid::position(Index node) const {
  auto [i, j] = axis_indices(node);
  if (dimension_ == 1) return {coordinate(i), 0.0};
  return {coordinate(i), coordinate(j)};
}

double Grid::radius(Index node) const {
  auto p = position(node);
  return std::hypot(p[0], p[1]);
}

bool Grid::is_boundary(Index node) const {
  auto [i, j] = axis_indices(node);
  const int last = points_ - 1;
  if (i == 0 || i == last) return true;
  return dimension_ == 2 && (j == 0 || j == last);
}

Index Grid::unknown_of(Index node) const {
  if (is_boundary(node)) return -1;
  auto [i, j] = axis_indices(node);
  if (dimension_ == 1) return i - 1;
  return static_cast<Index>(i - 1) * (points_ - 2) + (j - 1);
}

Index Grid::node_of(Index unknown) const {
  if (dimension_ == 1) return unknown + 1;
  const Index m = points_ - 2;
  return (unknown / m + 1) * points_ + (unknown % m + 1);
}

RealField::RealField(Grid grid, RealVector values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) {
    throw ValidationError("field sample count does not match the grid node count");
  }
  check_finite(values_.array(), "real field");
}

RealVector RealField::interior() const {
  RealVector out(grid_.unknown_count());
  for (Index u = 0; u < out.size(); ++u) out[u] = values_[grid_.node_of(u)];
  return out;
}

RealField RealField::from_interior(const Grid& grid, const RealVector& interior) {
  if (interior.size() != grid.unknown_count()) {
    throw ValidationError("interior vector length does not match the grid");
  }
  RealVector values = RealVector::Zero(grid.node_count());
  for (Index u = 0; u < interior.size(); ++u) values[grid.node_of(u)] = interior[u];
  return RealField(grid, std::move(values));
}

Vec2Field::Vec2Field(Grid grid, ComplexVector first, ComplexVector second)
    : grid_(grid), first_(std::move(first)), second_(std::move(second)) {
  if (first_.size() != grid_.node_count() || second_.size() != grid_.node_count()) {
    throw ValidationError("field sample count does not match the grid node count");
  }
  if (!first_.allFinite() || !second_.allFinite()) {
    throw ValidationError("vector field has non-finite samples");
  }
}

ComplexVector Vec2Field::unknowns() const {
  const Index n = grid_.unknown_count();
  ComplexVector out(2 * n);
  for (Index u = 0; u < n; ++u) {
    const Index node = grid_.node_of(u);
    out[u] = first_[node];
    out[n + u] = second_[node];
  }
  return out;
}

Vec2Field Vec2Field::from_unknowns(const Grid& grid, const ComplexVector& stacked) {
  const Index n = grid.unknown_count();
  if (stacked.size() != 2 * n) {
    throw ValidationError("stacked vector length does not match the grid");
  }
  ComplexVector a = ComplexVector::Zero(grid.node_count());
  ComplexVector b = ComplexVector::Zero(grid.node_count());
  for (Index u = 0; u < n; ++u) {
    const Index node = grid.node_of(u);
    a[node] = stacked[u];
    b[node] = stacked[n + u];
  }
  return Vec2Field(grid, std::move(a), std::move(b));
}

Vec2Field Vec2Field::scaled(Complex c) const { return Vec2Field(grid_, c * first_, c * second_); }

double cutoff_profile(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double inner = bump(2.0 - t);
  return inner / (inner + bump(t - 1.0));
}

RealSparse laplacian(const Grid& grid, int order) {
  const std::vector<double> w = stencil_weights(order);
  const int m = grid.points() - 2;
  const double scale = 1.0 / (grid.spacing() * grid.spacing());
  const int reach = static_cast<int>(w.size()) - 1;

  std::vector<Eigen::Triplet<double>> entries;
  auto axis_row = [&](int i, auto&& emit) {
    for (int k = -reach; k <= reach; ++k) {
      const int col = i + k;
      if (col < 0 || col >= m) continue;
      emit(col, w[std::abs(k)] * scale);
    }
  };

  if (grid.dimension() == 1) {
    entries.reserve(static_cast<size_t>(m) * (2 * reach + 1));
    for (int i = 0; i < m; ++i) {
      axis_row(i, [&](int col, double v) { entries.emplace_back(i, col, v); });
    }
  } else {
    entries.reserve(static_cast<size_t>(m) * m * (4 * reach + 2));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const Index row = static_cast<Index>(i) * m + j;
        axis_row(i, [&](int col, double v) {
          entries.emplace_back(row, static_cast<Index>(col) * m + j, v);
        });
        axis_row(j, [&](int col, double v) {
          entries.emplace_back(row, static_cast<Index>(i) * m + col, v);
        });
      }
    }
  }
  RealSparse lap(grid.unknown_count(), grid.unknown_count());
  lap.setFromTriplets(entries.begin(), entries.end());
  lap.makeCompressed();
  return lap;
}

RealField bracket_x(const Grid& grid) {
  RealVector values(grid.node_count());
  for (Index node = 0; node < values.size(); ++node) {
    const double r = grid.radius(node);
    values[node] = std::sqrt(1.0 + r * r);
  }
  return RealField(grid, std::move(values));
}

RealField cutoff_field(const Grid& grid, const CutoffSpec& cutoff) {
  const double r = cutoff.inner_radius;
  if (!std::isfinite(r) || r <= 0.0) throw ValidationError("cut-off radius must be positive");
  if (2.0 * r > grid.half_length()) {
    std::ostringstream msg;
    msg << "cut-off support 2R = " << 2.0 * r << " exceeds the half-length "
        << grid.half_length() << "; the profile is clipped";
    log_message(LogLevel::kWarning, msg.str());
  }
  RealVector values(grid.node_count());
  for (Index node = 0; node < values.size(); ++node) {
    values[node] = cutoff_profile(grid.radius(node) / r);
  }
  return RealField(grid, std::move(values));
}

RealField exterior_cutoff_field(const Grid& grid, const CutoffSpec& cutoff) {
  RealField inner = cutoff_field(grid, cutoff);
  return RealField(grid, (1.0 - inner.values().array()).matrix());
}

RealField partial_derivative(const RealField& field, int axis) {
  const Grid& grid = field.grid();
  if (axis < 0 || axis >= grid.dimension()) throw ValidationError("axis out of range");
  const int n = grid.points();
  const double h = grid.spacing();
  const Index stride = (grid.dimension() == 2 && axis == 0) ? n : 1;
  const RealVector& v = field.values();
  RealVector out(v.size());
  for (Index node = 0; node < v.size(); ++node) {
    const int i = grid.axis_indices(node)[axis];
    if (i == 0) {
      out[node] = (v[node + stride] - v[node]) / h;
    } else if (i == n - 1) {
      out[node] = (v[node] - v[node - stride]) / h;
    } else {
      out[node] = (v[node + stride] - v[node - stride]) / (2.0 * h);
    }
  }
  return RealField(grid, std::move(out));
}

RealField gradient_squared(const RealField& field) {
  RealVector sum = RealVector::Zero(field.values().size());
  for (int axis = 0; axis < field.grid().dimension(); ++axis) {
    sum += partial_derivative(field, axis).values().cwiseAbs2();
  }
  return RealField(field.grid(), std::move(sum));
}

}  // namespace nlsdecay
