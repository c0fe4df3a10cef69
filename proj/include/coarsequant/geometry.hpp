#pragma once
//
// Model Riemannian manifolds on periodic grids, metric-compatible
// connections (optionally with torsion), the Jacobi-field solver driven by
// the Volterra series, exponential/logarithm maps and the transplant density
// factor.
//
// Conventions:
//  * Points and tangent vectors are chart coordinates (radians on the
//    circle, box coordinates on the torus and R^3).
//  * Tangent maps are expressed in orthonormal frame coordinates at the base
//    point (frame E(x) = g(x)^{-1/2}); in these coordinates the map is close
//    to an isometry and equals the identity on flat models.
//

#include "coarsequant/common.hpp"

#include <memory>
#include <optional>
#include <string>

namespace cq::geo {

enum class Model { Circle, CircleConformal, Torus, TorusConformal, Heis3 };

struct ManifoldSpec {
  Model model = Model::Circle;
  int n = 64;                  // grid points per axis
  double conformal_amplitude = 0.0;
  double torsion_tau = 0.0;    // constant-torsion A-term on the torus
  double extent = 2.0;         // half-width of the R^3 box (Heis3 only)
};

// Sampled Riemannian manifold: points, quadrature weights (midpoint rule,
// sqrt(det g) folded in), metric field and curvature/torsion bounds.
class ManifoldGrid {
 public:
  explicit ManifoldGrid(const ManifoldSpec& spec);

  const ManifoldSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec>& points() const { return points_; }
  const Vec& weights() const { return weights_; }
  double period(int axis) const { return periods_[axis]; }

  Mat metric(const Vec& x) const;
  double sqrt_det_metric(const Vec& x) const;
  // Orthonormal frame matrix E(x) = g(x)^{-1/2}; columns are an orthonormal
  // basis of the tangent space in chart coordinates.
  Mat frame(const Vec& x) const;

  double curvature_bound() const { return c_curv_; }
  double torsion_bound() const { return c_tors_; }
  // Effective constant c = max(1, c_R, c_T).
  double effective_bound() const;
  // Global chart-ball radius with c * r <= 1/2.
  double ball_radius() const { return 0.5 / effective_bound(); }

  bool is_flat() const;
  // Gauss curvature (2D models; 0 elsewhere).
  double gauss_curvature(const Vec& x) const;

  // Shortest chart displacement y - x with periodic wrap, per axis.
  Vec wrap_displacement(const Vec& x, const Vec& y) const;
  double chart_distance(const Vec& x, const Vec& y) const;
  Vec wrap_point(Vec x) const;

  // Riemannian norm of a chart tangent vector at x.
  double metric_norm(const Vec& x, const Vec& v) const;

 private:
  ManifoldSpec spec_;
  int dim_;
  std::vector<Vec> points_;
  Vec weights_;
  std::vector<double> periods_;
  double c_curv_ = 0.0, c_tors_ = 0.0;

  double phi(const Vec& x) const;       // conformal exponent
  Vec grad_phi(const Vec& x) const;
  void validate() const;
};

ManifoldGrid manifold_from_json(const std::string& json_text);

// Geodesic data for one Jacobi solve. `direction` and `variation` are frame
// coordinates at the base point.
struct GeodesicProblem {
  Vec base;
  Vec direction;   // p
  Vec variation;   // q
  int steps = 256;
  double tolerance = 1e-12;
  int max_terms = 60;
};

// Coefficients of W'' + A(t) W' + B(t) W = 0 along the geodesic, in a
// parallel orthonormal frame, together with the bound constant c.
struct JacobiCoefficients {
  std::function<Mat(double)> A;  // from torsion
  std::function<Mat(double)> B;  // from curvature
  double c = 1.0;                // max(1, c_R, c_T)
};

struct JacobiSolution {
  Vec w1;                         // W(1) = (exp_x)_* q in frame coordinates
  std::vector<double> term_norms; // sup-norm of each retained Volterra term
  int terms = 0;
};

// Volterra-series solve of the first-order system C' = D C with
// C(0) = (0, q/|p|). Throws HypothesisViolated if c|p| > 1 (or if the
// sampled coefficients break their bounds), NonConvergence if the majorant
// does not reach the tolerance within max_terms.
JacobiSolution solve_jacobi(const GeodesicProblem& problem,
                            const JacobiCoefficients& coeffs);

// The model's Jacobi coefficients along the geodesic from x with initial
// frame velocity p.
JacobiCoefficients jacobi_coefficients(const ManifoldGrid& grid, const Vec& x,
                                       const Vec& p);

// Geodesic endpoint exp_x(v); v in frame coordinates, |v| <= ball radius.
Vec exp_map(const ManifoldGrid& grid, const Vec& x, const Vec& v);

// Inverse of exp_map (Newton shooting on non-flat models).
Vec log_map(const ManifoldGrid& grid, const Vec& x, const Vec& y);

// q |-> W(1), assembled column-by-column from solve_jacobi. Frame
// coordinates; identity on flat models.
Mat tangent_map(const ManifoldGrid& grid, const Vec& x, const Vec& p);

// Chart Jacobian of u |-> exp_x(u) by central differences (independent of
// the Jacobi solver; used by transition maps and as a cross-check).
Mat exp_jacobian_fd(const ManifoldGrid& grid, const Vec& x, const Vec& u,
                    double step = 1e-5);

// Transition (exp_y)_*^{-1} (exp_x)_* evaluated at the chart midpoint of x
// and y. Throws DisjointNeighborhoods when the chart balls do not meet.
Mat transition_map(const ManifoldGrid& grid, const Vec& x, const Vec& y);

// chi(u) = |det d(exp_x)(u)|^{-1/2} = |det g^V(u)|^{-1/4} in frame-normalized
// normal coordinates; chi(0) = 1.
double density_factor(const ManifoldGrid& grid, const Vec& x, const Vec& u);

// The raw formula |det g|^{-1/4} for a metric tensor given directly.
double density_factor_from_tensor(const Mat& g);

}  // namespace cq::geo
