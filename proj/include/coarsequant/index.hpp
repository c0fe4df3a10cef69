#pragma once
//
// Numerical Fredholm-index engine: h-ellipticity checks, the bounded
// transform D (D^2+1)^{-1/2} with its resolvent-integral cross-check, the
// Calderon trace formula evaluated over a frequency window (square
// truncations make the naive trace difference vanish identically; windowed
// traces of the smoothing remainders converge to the index under
// refinement), the winding-number oracle, and a homotopy-stability probe.
//

#include "coarsequant/common.hpp"
#include "coarsequant/geometry.hpp"
#include "coarsequant/symbol.hpp"

namespace cq::idx {

struct HEllipticityReport {
  bool pass = false;
  sym::OrderClass defect_class = sym::OrderClass::Order0;
  double outer_shell_defect = 0.0;  // sup |sigma^2 - 1| on the outer shell
};

// Requires sigma = sigma* pointwise (throws NotSelfAdjoint); passes iff
// sigma^2 - 1 classifies as negative order.
HEllipticityReport h_elliptic_check(const sym::Symbol& s,
                                    const geo::ManifoldGrid& grid);

// Spectral calculus D -> D (D^2 + 1)^{-1/2}. Throws NotSymmetric.
CMat bounded_transform(const CMat& d, double tol = 1e-10);

// |2/pi int_0^inf D (D^2 + lambda^2 + 1)^{-1} dlambda  -  bounded_transform|
// by adaptive Gauss-Legendre quadrature. Throws QuadratureFail.
double resolvent_integral_check(const CMat& d, double quad_tol = 1e-11,
                                int max_panels = 64);

struct IndexReport {
  double analytic_index = 0.0;
  int rounded = 0;
  double residual = 0.0;
  int topological_index = 0;          // filled by the caller when known
  std::vector<std::pair<int, double>> ladder;  // (window, windowed trace)
  double gate_tail_r = 0.0, gate_tail_s = 0.0;
};

struct CalderonOptions {
  int window = -1;               // Fourier half-width; default n/4
  double gate_threshold = 0.05;  // tail_ratio(N/8) gate on the remainders
};

// analytic index = tr_win(1 - PA) - tr_win(1 - AP), traces over the Fourier
// modes |k| <= window. Throws NotAlmostInvertible when the remainders fail
// the rapid-decay gate.
IndexReport fredholm_index_calderon(const CMat& a, const CMat& p,
                                    const CalderonOptions& opts = {});

// (1/2 pi) total argument increment of theta -> sigma(theta, xi_ref) over
// the circle, rounded. Throws SymbolVanishes.
int winding_number(const sym::Symbol& s, int samples, double xi_ref,
                   double* residual = nullptr);

struct ProbeReport {
  std::vector<double> t;
  std::vector<int> rounded;
  int base = 0;
  bool constant = false;
};

// Index verdict along A + t K for a random finite-rank K (rank <= N/16,
// supported in the trace window). Throws PathLeavesFredholm if the decay
// gate fails along the path.
ProbeReport homotopy_invariance_probe(const CMat& a, const CMat& p,
                                      CounterRng& rng,
                                      const CalderonOptions& opts = {},
                                      int steps = 5);

// Hardy-compressed multiplier T_f (+ identity on the negative modes) for
// f(theta) = e^{i w theta} (1 + 0.1 sin theta), and its parametrix from the
// pointwise inverse symbol.
CMat toeplitz_winding_operator(int n, int w);
CMat toeplitz_winding_parametrix(int n, int w);

// Hardy compression of an arbitrary multiplication operator.
CMat hardy_compress(const CVec& f_values);

}  // namespace cq::idx
