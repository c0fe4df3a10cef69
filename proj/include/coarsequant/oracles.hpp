#pragma once
//
// Independent reference implementations used only by tests and the
// acceptance suite. Nothing in the library proper calls into this header;
// the point is that these follow different numerical routes than the
// implementations they check.
//

#include "coarsequant/common.hpp"
#include "coarsequant/geometry.hpp"

namespace cq::oracle {

// Dense RK4 integration of W'' + A(t) W' + B(t) W = 0, W(0) = 0, W'(0) = q.
Vec jacobi_rk4(const std::function<Mat(double)>& A,
               const std::function<Mat(double)>& B, const Vec& q,
               int steps = 20000);

// Conformal-circle exponential map through the closed-form arc length
// s(theta) = theta - a cos(theta) (metric (1 + a sin)^2), inverted by
// Newton. u is the frame (arc-length) coordinate.
double circle_conformal_exp(double amplitude, double theta0, double u);

// 4th-order geodesic shooting on the model manifolds, independent of the
// integrator inside exp_map (finer stepping, velocity-Verlet-free plain RK4
// on the chart ODE).
Vec geodesic_shoot_rk4(const geo::ManifoldGrid& grid, const Vec& x,
                       const Vec& v_chart, int steps = 4096);

}  // namespace cq::oracle
