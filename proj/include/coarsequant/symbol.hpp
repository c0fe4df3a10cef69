#pragma once
//
// Symbols and cosymbols: the built-in catalog, sampled Hormander (1,0)
// estimates, order classification, Fourier passage symbol -> fiber kernel,
// and zoom-homogeneity reports for graded fibers.
//

#include "coarsequant/common.hpp"
#include "coarsequant/geometry.hpp"
#include "coarsequant/liegroup.hpp"

#include <optional>
#include <string>

namespace cq::sym {

enum class OrderClass { Order0, Negative, StronglyNegative };

std::string to_string(OrderClass c);

// Matrix-valued symbol sigma(x, xi) given by a pure evaluator.
struct Symbol {
  std::function<CMat(const Vec& x, const Vec& xi)> eval;
  int fiber_dim = 1;
  int x_dim = 1;
  int xi_dim = 1;
  OrderClass claimed = OrderClass::Order0;
  // Radius of the compact xi-set outside which the derivative estimate is
  // claimed to hold.
  double compact_xi_radius = 0.0;
  std::string name;
};

// Built-in catalog: "constant", "dirac1d", "winding_w" (with the winding
// parameter), "heis_homog".
Symbol make_symbol(const std::string& name, int winding = 1);

// Scalar symbol from the expression sublanguage; identifiers x, y, xi, eta.
Symbol symbol_from_expression(const std::string& text, int x_dim, int xi_dim);

// The graded 2x2 self-adjoint extension [[0, u*], [u, 0]] of a scalar u.
Symbol graded_from_block(const Symbol& u);

// Dyadic-shell covector samples: radii 1, 2, 4, ..., <= max_radius, a fixed
// set of directions per shell (2 in 1D, 8 in 2D, 14 in 3D).
std::vector<Vec> dyadic_samples(int xi_dim, double max_radius);

struct HormanderReport {
  double c = 0.0;             // smallest admissible constant observed
  Vec worst_x, worst_xi;
  bool pass = false;
  std::vector<double> shell_constants;
  double x_modulus = 0.0;     // sampled continuity-in-x modulus
};

// Samples ||d_xi sigma|| (1 + ||xi||) over dyadic shells with a
// finite-difference step scaled to the shell; pass means the constant does
// not grow across shells. Report only, never throws.
HormanderReport check_hormander(const Symbol& s, const geo::ManifoldGrid& grid,
                                const std::vector<Vec>& xi_samples);

// Classifies decay of ||sigma|| on growing shells. Throws Inconclusive when
// the decay is nonmonotone near the sampling horizon.
OrderClass classify_order(const Symbol& s, const geo::ManifoldGrid& grid,
                          double tol = 0.05);

// Uniform fiber lattice (-half_points .. half_points)^dim * spacing.
struct FiberLattice {
  int dim = 1;
  double spacing = 0.0;
  int half_points = 0;

  int points_per_axis() const { return 2 * half_points + 1; }
  int size() const;
  Vec point(int flat_index) const;
  int index_of(const std::vector<int>& coords) const;
  double cell_volume() const;
};

// One cosymbol fiber: kernel samples on the lattice, cut to a compact
// window. Off-lattice evaluation is multilinear interpolation (flagged).
struct CosymbolFiber {
  FiberLattice lat;
  std::vector<CMat> samples;
  int m = 1;
  double window = 0.0;
  bool interpolated = false;  // provenance: off-lattice use happened

  CMat eval(const Vec& u) const;
  double l2_norm() const;  // sqrt( sum |k|_F^2 * cell )
};

// A cosymbol: x-dependent family of fibers plus bookkeeping.
struct Cosymbol {
  std::function<CosymbolFiber(const Vec& x)> fiber;
  int m = 1;
  std::string provenance;
};

struct FourierOptions {
  double alias_tol = 0.25;   // relative variation allowed beyond Nyquist
  bool throw_on_alias = true;
};

// Inverse DFT of xi |-> sigma(x, xi) over the ambient frequency lattice
// (integers in [-ambient_n/2, ambient_n/2) per axis, period ambient_n *
// lat.spacing), then cut to the window. Throws AliasWarning when the symbol
// still varies materially beyond the Nyquist frequency.
struct AliasWarning : Error {
  explicit AliasWarning(const std::string& w) : Error("AliasWarning: " + w) {}
};

CosymbolFiber fourier_cosymbol(const Symbol& s, const Vec& x,
                               const FiberLattice& lat, int ambient_n,
                               double window,
                               const FourierOptions& opts = {},
                               double* alias_metric_out = nullptr);

struct ZoomInvarianceReport {
  std::vector<double> lambdas;
  std::vector<double> relative_defects;
};

// For each lambda, the relative distance between lambda^Q k(delta_lambda u)
// and k(u), sampled on lattice points with core_radius <= |u|_hom and
// delta_lambda(u) inside the window.
ZoomInvarianceReport check_zoom_invariance(const CosymbolFiber& fiber,
                                           const lie::GradedAlgebra& alg,
                                           const std::vector<double>& lambdas,
                                           double core_radius);

}  // namespace cq::sym
