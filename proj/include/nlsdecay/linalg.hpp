// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nlsdecay/grid.hpp"

namespace nlsdecay {

// Smallest eigenvalue of a real symmetric sparse matrix, via LAPACK's
// symmetric band solver on the matrix in its given ordering.
double smallest_symmetric_eigenvalue(const RealSparse& a);

// Symmetric permutation taking the block ordering [x1; x2] to the node-major
// ordering (x1_0, x2_0, x1_1, x2_1, ...), which keeps 2x2 block operators banded.
RealSparse interleave_blocks(const RealSparse& a);

// Bound on the spectral norm: sqrt(||A||_1 ||A||_inf).
double spectral_norm_bound(const ComplexSparse& a);

}  // namespace nlsdecay
