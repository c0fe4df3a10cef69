#include "coarsequant/oracles.hpp"

#include <cmath>

namespace cq::oracle {

Vec jacobi_rk4(const std::function<Mat(double)>& A,
               const std::function<Mat(double)>& B, const Vec& q, int steps) {
  const int n = static_cast<int>(q.size());
  Vec w = Vec::Zero(n), wp = q;
  const double h = 1.0 / steps;
  auto accel = [&](double t, const Vec& wv, const Vec& wpv) -> Vec {
    Vec a = Vec::Zero(n);
    if (A) a -= A(t) * wpv;
    if (B) a -= B(t) * wv;
    return a;
  };
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    Vec k1w = wp, k1p = accel(t, w, wp);
    Vec k2w = wp + 0.5 * h * k1p, k2p = accel(t + 0.5 * h, w + 0.5 * h * k1w,
                                              wp + 0.5 * h * k1p);
    Vec k3w = wp + 0.5 * h * k2p, k3p = accel(t + 0.5 * h, w + 0.5 * h * k2w,
                                              wp + 0.5 * h * k2p);
    Vec k4w = wp + h * k3p, k4p = accel(t + h, w + h * k3w, wp + h * k3p);
    w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    wp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }
  return w;
}

double circle_conformal_exp(double amplitude, double theta0, double u) {
  const double a = amplitude;
  auto arc = [a](double th) { return th - a * std::cos(th); };
  const double target = arc(theta0) + u;
  double th = theta0 + u;  // good starting guess, metric is near 1
  for (int it = 0; it < 100; ++it) {
    const double r = arc(th) - target;
    const double dr = 1.0 + a * std::sin(th);
    const double step = r / dr;
    th -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return th;
}

Vec geodesic_shoot_rk4(const geo::ManifoldGrid& grid, const Vec& x,
                       const Vec& v_chart, int steps) {
  const int n = grid.dim();
  const double fd = 1e-6;

  // Christoffel symbols from the metric field by central differences;
  // independent of the analytic accelerations used inside the library.
  auto accel = [&](const Vec& pos, const Vec& vel) -> Vec {
    Mat g = grid.metric(pos);
    std::vector<Mat> dg(n);
    for (int i = 0; i < n; ++i) {
      Vec pp = pos, pm = pos;
      pp[i] += fd;
      pm[i] -= fd;
      dg[i] = (grid.metric(pp) - grid.metric(pm)) / (2.0 * fd);
    }
    Mat ginv = g.inverse();
    Vec acc = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double gamma = 0.0;
          for (int l = 0; l < n; ++l)
            gamma += ginv(k, l) *
                     (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          acc[k] -= 0.5 * gamma * vel[i] * vel[j];
        }
    }
    return acc;
  };

  Vec p = x, v = v_chart;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    Vec k1p = v, k1v = accel(p, v);
    Vec k2p = v + 0.5 * h * k1v, k2v = accel(p + 0.5 * h * k1p,
                                             v + 0.5 * h * k1v);
    Vec k3p = v + 0.5 * h * k2v, k3v = accel(p + 0.5 * h * k2p,
                                             v + 0.5 * h * k2v);
    Vec k4p = v + h * k3v, k4v = accel(p + h * k3p, v + h * k3v);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return grid.wrap_point(p);
}

}  // namespace cq::oracle
