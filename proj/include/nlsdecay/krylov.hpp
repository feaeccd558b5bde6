// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nlsdecay/grid.hpp"

namespace nlsdecay {

struct KrylovOptions {
  int subspace = 40;
  int wanted = 12;
  // Ritz pair accepted when |b^T s| <= tolerance * |theta|.
  double tolerance = 1e-12;
  // Only Ritz values with |theta| >= magnitude_floor must converge; the others
  // among the wanted set are returned flagged as unconverged.
  double magnitude_floor = 0.0;
  int min_restarts = 1;
  int max_restarts = 300;
  std::uint64_t seed = 1;
};

struct RitzPair {
  Complex theta;
  ComplexVector vector;  // unit norm
  double residual_estimate;
  bool converged;
};

struct KrylovResult {
  std::vector<RitzPair> pairs;  // sorted by decreasing |theta|
  int restarts = 0;
  int applications = 0;
  bool converged = false;
};

using LinearMap = std::function<ComplexVector(const ComplexVector&)>;

// Krylov-Schur iteration for the eigenvalues of largest modulus of a linear
// map on C^dim. Restarts keep an ordered complex Schur form of the projected
// matrix; reordering uses adjacent Givens swaps.
KrylovResult krylov_schur(const LinearMap& op, Index dim, const KrylovOptions& options);

}  // namespace nlsdecay
