// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlsdecay/operator.hpp"

namespace nlsdecay {

// Query region |Re E| < re_bound, |Im E| <= im_bound.
struct Strip {
  double re_bound = std::numeric_limits<double>::infinity();
  double im_bound = std::numeric_limits<double>::infinity();
  bool contains(Complex z) const;
};

struct SpectralPoint {
  // Mean of the member eigenvalues; members closer than the cluster radius
  // are reported as one point.
  Complex value;
  std::vector<Complex> members;
  double residual = 0.0;  // worst member ||(H - E)v|| / ||v||; 0 when vectors were not formed
  int multiplicity = 1;   // member count
  std::optional<int> geometric;
  std::optional<int> algebraic;
  std::optional<int> jordan_index;
  Complex shift{0.0, 0.0};
  int iterations = 0;
  std::vector<ComplexVector> vectors;
};

struct SpectralSet {
  std::vector<SpectralPoint> points;  // sorted by (Re, Im)
  Strip strip;
  double dedup_radius = 1e-6;
  double cluster_radius = 1e-6;
  bool partial = false;
  std::vector<std::string> diagnostics;

  std::vector<Complex> values() const;
  int total_multiplicity() const;
};

// Groups values whose single-linkage distance is below `radius`; the output is
// sorted by (Re, Im) of the cluster means.
std::vector<SpectralPoint> cluster_values(std::span<const Complex> values, double radius);

std::vector<Complex> dense_eigenvalues(const BlockOperator& op, Index dense_cap = 4096);

// Brute-force spectrum: every eigenvalue, grouped at the dedup radius.
SpectralSet dense_spectrum(const BlockOperator& op, Index dense_cap = 4096,
                           double dedup_radius = 1e-6);

// Regroups the points of `set` lying in `strip` at the cluster radius.
SpectralSet restrict_to_strip(const SpectralSet& set, const Strip& strip, double cluster_radius);

struct GapOptions {
  double margin = 0.05;
  double imag_cap = 4.0;
  double tolerance = 1e-8;  // eigenvector residual
  double dedup_radius = 1e-6;
  double cluster_radius = 1e-2;
  double shift_spacing = 0.0;  // 0: mu / 4
  int subspace = 40;
  int wanted = 12;
  std::uint64_t seed = 12345;
};

Strip gap_strip(double mu, const GapOptions& options);

// Shift-invert Krylov-Schur over a lattice of shifts covering the strip. Each
// shift owns the eigenvalues in its lattice cell; results are merged in a
// fixed order.
SpectralSet gap_eigenvalues(const BlockOperator& op, const GapOptions& options);

struct RieszOptions {
  int nodes = 32;
  int max_nodes = 256;
  int probes = 16;
  std::uint64_t seed = 99;
};

struct RieszProjectionReport {
  Complex center;
  double radius;
  int nodes;
  int rank;
  int previous_rank;  // rank with half the nodes
  double idempotency_defect;
  double norm_estimate;
  double gap_ratio;
  bool rank_determinate;
  std::vector<double> singular_values;
  ComplexMatrix basis;  // orthonormal basis of the range, 2n x rank
};

// Trapezoidal quadrature of (2 pi i)^{-1} \oint (z - H)^{-1} dz on a circle,
// applied to a random orthonormal probe block. Nodes double until the rank
// repeats and the idempotency defect is below 1e-6.
RieszProjectionReport riesz_projection(const BlockOperator& op, Complex center, double radius,
                                       const RieszOptions& options = {});

struct JordanOptions {
  double rank_floor = 1e-8;
  double gap_ratio = 10.0;
  double chain_tolerance = 1e-6;
  double independence_floor = 1e-6;
  RieszOptions riesz;
};

struct JordanChain {
  Complex value;
  // vectors[0] is the top generalized vector, vectors[k-1] an eigenvector;
  // (H - E) vectors[l-1] = vectors[l].
  std::vector<Vec2Field> vectors;
  std::vector<double> relation_residuals;
  int index() const { return static_cast<int>(vectors.size()); }
};

struct JordanStructure {
  Complex value;
  std::vector<int> kernel_dimensions;  // dim ker (H - E)^m, m = 1..k+1
  int geometric = 0;
  int algebraic = 0;  // Riesz rank
  int index = 0;
  bool determinate = true;
  bool consistent = true;  // dim ker (H - E)^k equals the Riesz rank
  double gap_ratio = 0.0;
  double threshold = 0.0;
  double smallest_singular_value = 0.0;  // of the stacked chain vectors
  std::vector<JordanChain> chains;       // longest first
  RieszProjectionReport riesz;
};

double default_riesz_radius(double mu, Complex value, std::span<const Complex> others,
                            double spread);

JordanStructure jordan_structure(const BlockOperator& op, Complex value, double radius,
                                 const JordanOptions& options = {});
JordanChain jordan_chain(const BlockOperator& op, Complex value, double radius,
                         const JordanOptions& options = {});

double hausdorff_distance(std::span<const Complex> a, std::span<const Complex> b);

struct SymmetryReport {
  double negation_distance;
  double conjugation_distance;
  double tolerance;
  bool passed;
};

SymmetryReport symmetry_check(const SpectralSet& set, double tolerance = 1e-8);
SymmetryReport symmetry_check(std::span<const Complex> values, double tolerance = 1e-8);

// Every value lies on the real or the imaginary axis within `tolerance`.
bool axis_confined(const SpectralSet& set, double tolerance = 1e-6);

}  // namespace nlsdecay
