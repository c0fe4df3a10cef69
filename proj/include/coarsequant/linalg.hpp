#pragma once
//
// Dense linear-algebra helpers shared across modules. All operator matrices
// in this project live in the orthonormalized basis of the weighted L^2 grid
// (basis vectors delta_i / sqrt(w_i)), so the matrix 2-norm IS the operator
// norm and plain SVD gives the singular values of the operator.
//

#include "coarsequant/common.hpp"

namespace cq {

// Singular values in decreasing order.
Vec singular_values(const CMat& a);

// Operator norm = largest singular value (full SVD; exact up to LAPACK).
double op_norm(const CMat& a);

// Fast operator-norm estimate by power iteration on A^H A. Always approaches
// the true norm from below; use for moduli and screening, not for the
// acceptance inequalities.
double op_norm_estimate(const CMat& a, int iters = 120);

// Distance to the best rank-r approximation: s_{r+1}(a) (0-indexed r).
// This is the project-wide "norm modulo compacts" proxy.
double rank_truncated_norm(const CMat& a, int rank);

// Default compact-proxy rank budget: ceil(N / 8).
int truncation_rank(int n);

// max ||a - a^H||_inf as a cheap hermiticity defect.
double hermiticity_defect(const CMat& a);

// Frobenius norm of a matrix difference (used where elementwise bounds are
// asserted the spec-level tolerances are per entry).
double max_abs(const CMat& a);

// Unitary DFT matrix for an n-point periodic grid: rows indexed by integer
// frequencies k in [-n/2, n/2), F(k, j) = exp(-i k theta_j) / sqrt(n) with
// theta_j = 2 pi j / n. Row index r corresponds to frequency r - n/2.
const CMat& dft_matrix(int n);

// Integer frequency for DFT row r of an n-point grid.
inline int dft_frequency(int r, int n) { return r - n / 2; }

// Fourier multiplier operator F^H diag(m) F for multiplier samples m indexed
// like dft rows.
CMat fourier_multiplier(const CVec& m);

// Projection onto frequencies k >= 0 (Hardy projection on the circle grid).
CMat hardy_projection(int n);

}  // namespace cq
