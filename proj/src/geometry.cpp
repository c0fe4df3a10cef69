#include "coarsequant/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "json.hpp"

namespace cq::geo {

namespace {

double mat_norm2(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

ManifoldGrid::ManifoldGrid(const ManifoldSpec& spec) : spec_(spec) {
  switch (spec_.model) {
    case Model::Circle:
    case Model::CircleConformal:
      dim_ = 1;
      periods_ = {2.0 * kPi};
      break;
    case Model::Torus:
    case Model::TorusConformal:
      dim_ = 2;
      periods_ = {2.0 * kPi, 2.0 * kPi};
      break;
    case Model::Heis3:
      dim_ = 3;
      periods_ = {0.0, 0.0, 0.0};  // non-periodic box
      break;
  }
  if (spec_.n < 2) throw ConfigInvalid("grid size must be at least 2");

  const int n = spec_.n;
  if (dim_ == 1) {
    const double h = 2.0 * kPi / n;
    points_.reserve(n);
    weights_.resize(n);
    for (int i = 0; i < n; ++i) {
      Vec x(1);
      x[0] = i * h;
      points_.push_back(x);
      weights_[i] = h * sqrt_det_metric(x);
    }
  } else if (dim_ == 2) {
    const double h = 2.0 * kPi / n;
    points_.reserve(static_cast<std::size_t>(n) * n);
    weights_.resize(static_cast<Eigen::Index>(n) * n);
    int idx = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i, ++idx) {
        Vec x(2);
        x << i * h, j * h;
        points_.push_back(x);
        weights_[idx] = h * h * sqrt_det_metric(x);
      }
  } else {
    const double h = 2.0 * spec_.extent / n;
    points_.reserve(static_cast<std::size_t>(n) * n * n);
    weights_.resize(static_cast<Eigen::Index>(n) * n * n);
    int idx = 0;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i, ++idx) {
          Vec x(3);
          x << -spec_.extent + (i + 0.5) * h, -spec_.extent + (j + 0.5) * h,
              -spec_.extent + (k + 0.5) * h;
          points_.push_back(x);
          weights_[idx] = h * h * h;
        }
  }

  // curvature / torsion bounds
  switch (spec_.model) {
    case Model::CircleConformal:
    case Model::Circle:
    case Model::Heis3:
      c_curv_ = 0.0;
      c_tors_ = 0.0;
      break;
    case Model::Torus:
      c_curv_ = 0.0;
      c_tors_ = spec_.torsion_tau;
      break;
    case Model::TorusConformal: {
      const double a = spec_.conformal_amplitude;
      c_curv_ = 2.0 * a * std::exp(2.0 * a);  // sup |K| for phi = a sin sin
      c_tors_ = spec_.torsion_tau;
      break;
    }
  }
  validate();
}

double ManifoldGrid::phi(const Vec& x) const {
  if (spec_.model == Model::TorusConformal)
    return spec_.conformal_amplitude * std::sin(x[0]) * std::sin(x[1]);
  return 0.0;
}

Vec ManifoldGrid::grad_phi(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  if (spec_.model == Model::TorusConformal) {
    const double a = spec_.conformal_amplitude;
    g[0] = a * std::cos(x[0]) * std::sin(x[1]);
    g[1] = a * std::sin(x[0]) * std::cos(x[1]);
  }
  return g;
}

Mat ManifoldGrid::metric(const Vec& x) const {
  Mat g = Mat::Identity(dim_, dim_);
  switch (spec_.model) {
    case Model::CircleConformal: {
      const double f = 1.0 + spec_.conformal_amplitude * std::sin(x[0]);
      g(0, 0) = f * f;
      break;
    }
    case Model::TorusConformal:
      g *= std::exp(2.0 * phi(x));
      break;
    default:
      break;
  }
  return g;
}

double ManifoldGrid::sqrt_det_metric(const Vec& x) const {
  return std::sqrt(metric(x).determinant());
}

Mat ManifoldGrid::frame(const Vec& x) const {
  // metric is diagonal-conformal in every model, so g^{-1/2} is direct
  Mat g = metric(x);
  Mat e = Mat::Identity(dim_, dim_);
  for (int i = 0; i < dim_; ++i) e(i, i) = 1.0 / std::sqrt(g(i, i));
  return e;
}

double ManifoldGrid::effective_bound() const {
  return std::max({1.0, c_curv_, c_tors_});
}

bool ManifoldGrid::is_flat() const {
  return spec_.model == Model::Circle || spec_.model == Model::Torus ||
         spec_.model == Model::Heis3;
}

double ManifoldGrid::gauss_curvature(const Vec& x) const {
  if (spec_.model != Model::TorusConformal) return 0.0;
  // K = -e^{-2 phi} (Laplacian phi); Laplacian of a sin(x)sin(y) is -2 phi
  const double p = phi(x);
  return 2.0 * p * std::exp(-2.0 * p);
}

Vec ManifoldGrid::wrap_displacement(const Vec& x, const Vec& y) const {
  Vec d = y - x;
  for (int i = 0; i < dim_; ++i) {
    const double P = periods_[i];
    if (P > 0.0) {
      d[i] = std::remainder(d[i], P);
    }
  }
  return d;
}

double ManifoldGrid::chart_distance(const Vec& x, const Vec& y) const {
  return wrap_displacement(x, y).norm();
}

Vec ManifoldGrid::wrap_point(Vec x) const {
  for (int i = 0; i < dim_; ++i) {
    const double P = periods_[i];
    if (P > 0.0) {
      x[i] = std::fmod(x[i], P);
      if (x[i] < 0.0) x[i] += P;
    }
  }
  return x;
}

double ManifoldGrid::metric_norm(const Vec& x, const Vec& v) const {
  return std::sqrt(v.dot(metric(x) * v));
}

void ManifoldGrid::validate() const {
  if (weights_.minCoeff() <= 0.0)
    throw HypothesisViolated("quadrature weights must be strictly positive");
  for (const Vec& x : points_) {
    Mat g = metric(x);
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw HypothesisViolated("metric tensor not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw HypothesisViolated("metric tensor not positive-definite");
  }
}

ManifoldGrid manifold_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("manifold stanza: ") + e.what());
  }
  ManifoldSpec spec;
  const std::string model = j.value("model", "circle");
  std::string metric_type = "uniform";
  double amplitude = -1.0;
  if (j.contains("metric")) {
    metric_type = j["metric"].value("type", "uniform");
    amplitude = j["metric"].value("amplitude", -1.0);
  }
  if (model == "circle") {
    spec.model = metric_type == "conformal" ? Model::CircleConformal
                                            : Model::Circle;
    spec.conformal_amplitude = amplitude < 0 ? 0.5 : amplitude;
  } else if (model == "torus") {
    spec.model = metric_type == "conformal" ? Model::TorusConformal
                                            : Model::Torus;
    spec.conformal_amplitude = amplitude < 0 ? 0.1 : amplitude;
  } else if (model == "heis3") {
    spec.model = Model::Heis3;
    spec.extent = j.value("extent", 2.0);
  } else {
    throw ConfigInvalid("unknown manifold model '" + model + "'");
  }
  spec.n = j.value("n", 64);
  if (j.contains("torsion")) spec.torsion_tau = j["torsion"].value("tau", 0.0);
  return ManifoldGrid(spec);
}

JacobiSolution solve_jacobi(const GeodesicProblem& problem,
                            const JacobiCoefficients& coeffs) {
  const int n = static_cast<int>(problem.direction.size());
  const double np = problem.direction.norm();
  JacobiSolution sol;
  if (np == 0.0) {  // zero geodesic: the variation is untouched
    sol.w1 = problem.variation;
    return sol;
  }
  const double c = coeffs.c;
  const double d = c * np;
  if (d > 1.0 + 1e-12)
    throw HypothesisViolated("c*|p| = " + std::to_string(d) + " exceeds 1");

  const int steps = std::max(8, problem.steps);
  const double h = 1.0 / steps;

  // sample D(t) = [[0, |p| I], [-B/|p|, -A]] and check the coefficient bounds
  std::vector<Mat> D(steps + 1);
  bool zero_coeffs = true;
  double d_eff = 0.0;  // measured sup_t |D(t)|, drives the majorant
  for (int i = 0; i <= steps; ++i) {
    const double t = i * h;
    Mat A = coeffs.A ? coeffs.A(t) : Mat::Zero(n, n);
    Mat B = coeffs.B ? coeffs.B(t) : Mat::Zero(n, n);
    if (mat_norm2(A) > c * np * (1.0 + 1e-9) + 1e-300)
      throw HypothesisViolated("|A(t)| exceeds c|p|");
    if (mat_norm2(B) > c * np * np * (1.0 + 1e-9) + 1e-300)
      throw HypothesisViolated("|B(t)| exceeds c|p|^2");
    if (A.cwiseAbs().maxCoeff() > 0.0 || B.cwiseAbs().maxCoeff() > 0.0)
      zero_coeffs = false;
    Mat Dt = Mat::Zero(2 * n, 2 * n);
    Dt.block(0, n, n, n) = np * Mat::Identity(n, n);
    Dt.block(n, 0, n, n) = -B / np;
    Dt.block(n, n, n, n) = -A;
    d_eff = std::max(d_eff, mat_norm2(Dt));
    D[i] = std::move(Dt);
  }
  if (zero_coeffs) {  // A = B = 0: the series terminates at W(t) = t q
    sol.w1 = problem.variation;
    return sol;
  }

  Vec c0 = Vec::Zero(2 * n);
  c0.tail(n) = problem.variation / np;
  const double c0n = c0.norm();

  std::vector<Vec> current(steps + 1, c0);
  std::vector<Vec> sum(steps + 1, c0);
  bool converged = false;
  for (int k = 1; k <= problem.max_terms; ++k) {
    std::vector<Vec> integrand(steps + 1);
    for (int i = 0; i <= steps; ++i) integrand[i] = D[i] * current[i];
    current = cumulative_integral(integrand, h);
    double term_sup = 0.0;
    for (int i = 0; i <= steps; ++i) {
      term_sup = std::max(term_sup, current[i].norm());
      sum[i] += current[i];
    }
    sol.term_norms.push_back(term_sup);
    sol.terms = k;
    // Volterra majorant |D^k(C0)| <= |C0| d^k / k! with the measured d;
    // the block norm can exceed c|p| by a bounded factor when torsion is
    // present, so c|p| itself is only the admission gate
    const double majorant = c0n * std::pow(d_eff, k) / factorial(k);
    if (term_sup > majorant * (1.0 + 1e-8) + 1e-250)
      throw NonConvergence("Volterra term exceeds its majorant");
    // truncation trigger: bound for the next term
    const double next_bound =
        c0n * std::pow(d_eff, k + 1) / factorial(k + 1) * d_eff;
    if (next_bound < problem.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergence("Volterra series did not reach tolerance");
  sol.w1 = sum[steps].head(n);
  return sol;
}

namespace {

// Geodesic ODE right-hand side in chart coordinates.
Vec geodesic_accel(const ManifoldGrid& grid, const Vec& x, const Vec& v) {
  switch (grid.spec().model) {
    case Model::CircleConformal: {
      const double a = grid.spec().conformal_amplitude;
      const double gamma =
          a * std::cos(x[0]) / (1.0 + a * std::sin(x[0]));
      Vec out(1);
      out[0] = -gamma * v[0] * v[0];
      return out;
    }
    case Model::TorusConformal: {
      const double a = grid.spec().conformal_amplitude;
      Vec gp(2);
      gp << a * std::cos(x[0]) * std::sin(x[1]),
          a * std::sin(x[0]) * std::cos(x[1]);
      return (-2.0 * gp.dot(v)) * v + v.squaredNorm() * gp;
    }
    default:
      return Vec::Zero(x.size());
  }
}

struct GeodesicPath {
  std::vector<Vec> pos;  // samples at t_i = i/steps
  int steps;
};

GeodesicPath integrate_geodesic(const ManifoldGrid& grid, const Vec& x,
                                const Vec& v_chart, int steps) {
  GeodesicPath path;
  path.steps = steps;
  path.pos.reserve(steps + 1);
  Vec p = x, v = v_chart;
  path.pos.push_back(p);
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    auto f = [&](const Vec& pp, const Vec& vv) {
      return std::pair<Vec, Vec>(vv, geodesic_accel(grid, pp, vv));
    };
    auto [k1p, k1v] = f(p, v);
    auto [k2p, k2v] = f(p + 0.5 * h * k1p, v + 0.5 * h * k1v);
    auto [k3p, k3v] = f(p + 0.5 * h * k2p, v + 0.5 * h * k2v);
    auto [k4p, k4v] = f(p + h * k3p, v + h * k3v);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    path.pos.push_back(p);
  }
  return path;
}

}  // namespace

JacobiCoefficients jacobi_coefficients(const ManifoldGrid& grid, const Vec& x,
                                       const Vec& p) {
  JacobiCoefficients coeffs;
  coeffs.c = grid.effective_bound();
  const int n = grid.dim();
  const double np = p.norm();

  const double tau = grid.spec().torsion_tau;
  if (tau != 0.0 && n == 2) {
    // constant torsion T^1_{12} = tau on the flat torus; exercises the
    // first-order term only
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = tau * p[1];
    A(0, 1) = -tau * p[0];
    coeffs.A = [A](double) { return A; };
  }

  if (grid.spec().model == Model::TorusConformal && np > 0.0) {
    // B(t) = K(gamma_t) |p|^2 (I - p^ p^T) in the parallel frame
    const Vec v_chart = grid.frame(x) * p;
    GeodesicPath path = integrate_geodesic(grid, x, v_chart, 512);
    std::vector<double> curv(path.pos.size());
    for (std::size_t i = 0; i < path.pos.size(); ++i)
      curv[i] = grid.gauss_curvature(path.pos[i]);
    Mat proj = Mat::Identity(2, 2) - (p / np) * (p / np).transpose();
    const int steps = path.steps;
    coeffs.B = [curv, proj, np, steps](double t) {
      double s = t * steps;
      int i = std::min(static_cast<int>(s), steps - 1);
      if (i < 0) i = 0;
      const double frac = s - i;
      const double K = (1.0 - frac) * curv[i] + frac * curv[i + 1];
      return Mat(K * np * np * proj);
    };
  }
  return coeffs;
}

Vec exp_map(const ManifoldGrid& grid, const Vec& x, const Vec& v) {
  if (v.norm() > grid.ball_radius() * (1.0 + 1e-12))
    throw OutOfBall("|v| = " + std::to_string(v.norm()) + " > ball radius " +
                    std::to_string(grid.ball_radius()));
  const Vec v_chart = grid.frame(x) * v;
  if (grid.is_flat()) return grid.wrap_point(x + v_chart);
  GeodesicPath path = integrate_geodesic(grid, x, v_chart, 512);
  return grid.wrap_point(path.pos.back());
}

Mat exp_jacobian_fd(const ManifoldGrid& grid, const Vec& x, const Vec& u,
                    double step) {
  const int n = grid.dim();
  Mat jac(n, n);
  for (int i = 0; i < n; ++i) {
    Vec up = u, um = u;
    up[i] += step;
    um[i] -= step;
    Vec yp = exp_map(grid, x, up);
    Vec ym = exp_map(grid, x, um);
    jac.col(i) = grid.wrap_displacement(ym, yp) / (2.0 * step);
  }
  return jac;
}

Vec log_map(const ManifoldGrid& grid, const Vec& x, const Vec& y) {
  const Vec d = grid.wrap_displacement(x, y);
  Vec u = grid.frame(x).inverse() * d;  // exact on flat models
  if (grid.is_flat()) return u;
  for (int it = 0; it < 40; ++it) {
    Vec r = grid.wrap_displacement(exp_map(grid, x, u), y);
    if (r.norm() < 1e-12) return u;
    Mat jac = exp_jacobian_fd(grid, x, u);
    u += jac.colPivHouseholderQr().solve(r);
  }
  throw NonConvergence("log_map Newton iteration failed");
}

Mat tangent_map(const ManifoldGrid& grid, const Vec& x, const Vec& p) {
  const int n = grid.dim();
  JacobiCoefficients coeffs = jacobi_coefficients(grid, x, p);
  Mat w(n, n);
  for (int j = 0; j < n; ++j) {
    GeodesicProblem prob;
    prob.base = x;
    prob.direction = p;
    prob.variation = Vec::Unit(n, j);
    w.col(j) = solve_jacobi(prob, coeffs).w1;
  }
  return w;
}

Mat transition_map(const ManifoldGrid& grid, const Vec& x, const Vec& y) {
  const double r = grid.ball_radius();
  Vec z = grid.wrap_point(x + 0.5 * grid.wrap_displacement(x, y));
  Vec ux, uy;
  try {
    ux = log_map(grid, x, z);
    uy = log_map(grid, y, z);
  } catch (const NonConvergence&) {
    throw DisjointNeighborhoods("no common chart point for x, y");
  }
  if (ux.norm() > r || uy.norm() > r)
    throw DisjointNeighborhoods("chart balls of x and y do not meet");
  Mat jx = exp_jacobian_fd(grid, x, ux);
  Mat jy = exp_jacobian_fd(grid, y, uy);
  return jy.colPivHouseholderQr().solve(jx);
}

double density_factor(const ManifoldGrid& grid, const Vec& x, const Vec& u) {
  if (u.norm() == 0.0 || grid.is_flat()) return 1.0;
  Mat w = tangent_map(grid, x, u);
  return 1.0 / std::sqrt(std::abs(w.determinant()));
}

double density_factor_from_tensor(const Mat& g) {
  return std::pow(std::abs(g.determinant()), -0.25);
}

}  // namespace cq::geo
