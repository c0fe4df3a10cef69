#include "coarsequant/index.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "coarsequant/linalg.hpp"

namespace cq::idx {

HEllipticityReport h_elliptic_check(const sym::Symbol& s,
                                    const geo::ManifoldGrid& grid) {
  // pointwise self-adjointness on a sample set
  std::vector<Vec> xis = sym::dyadic_samples(s.xi_dim, 16.0);
  for (int i = 0; i < grid.size(); i += std::max(1, grid.size() / 16)) {
    Vec x = grid.points()[i].head(s.x_dim);
    for (const Vec& xi : xis) {
      CMat v = s.eval(x, xi);
      if ((v - v.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw NotSelfAdjoint("symbol is not self-adjoint-valued");
    }
  }
  sym::Symbol defect;
  defect.fiber_dim = s.fiber_dim;
  defect.x_dim = s.x_dim;
  defect.xi_dim = s.xi_dim;
  defect.name = s.name + "^2-1";
  auto base = s.eval;
  const int m = s.fiber_dim;
  defect.eval = [base, m](const Vec& x, const Vec& xi) {
    CMat v = base(x, xi);
    return CMat(v * v - CMat::Identity(m, m));
  };
  HEllipticityReport rep;
  double outer = 0.0;
  const double r = std::max(16, grid.spec().n / 2);
  for (const Vec& xi : sym::dyadic_samples(s.xi_dim, r)) {
    if (std::abs(xi.norm() - r) > 1e-9 * (1 + r)) continue;
    for (int i = 0; i < grid.size(); i += std::max(1, grid.size() / 32))
      outer = std::max(outer,
                       defect.eval(grid.points()[i].head(s.x_dim), xi).norm());
  }
  rep.outer_shell_defect = outer;
  try {
    rep.defect_class = sym::classify_order(defect, grid);
  } catch (const Inconclusive&) {
    rep.pass = false;
    return rep;
  }
  rep.pass = rep.defect_class != sym::OrderClass::Order0;
  return rep;
}

CMat bounded_transform(const CMat& d, double tol) {
  const double scale = std::max(1.0, max_abs(d));
  if (hermiticity_defect(d) > tol * scale)
    throw NotSymmetric("bounded_transform requires D = D*");
  Eigen::SelfAdjointEigenSolver<CMat> es((d + d.adjoint()) / 2.0);
  Vec lam = es.eigenvalues();
  Vec g(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    g[i] = lam[i] / std::sqrt(lam[i] * lam[i] + 1.0);
  return es.eigenvectors() * g.asDiagonal() *
         es.eigenvectors().adjoint();
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

double resolvent_integral_check(const CMat& d, double quad_tol,
                                int max_panels) {
  const double scale = std::max(1.0, max_abs(d));
  if (hermiticity_defect(d) > 1e-10 * scale)
    throw NotSymmetric("resolvent_integral_check requires D = D*");
  const int n = static_cast<int>(d.rows());
  const CMat d2 = d * d;
  const CMat id = CMat::Identity(n, n);

  // lambda = tan(s) turns the integrand into D (D^2 cos^2 s + 1)^{-1} on
  // [0, pi/2]
  std::vector<double> nodes, weights;
  gauss_legendre(16, nodes, weights);
  auto integrate = [&](int panels) {
    CMat acc = CMat::Zero(n, n);
    const double len = (kPi / 2.0) / panels;
    for (int p = 0; p < panels; ++p) {
      const double s0 = p * len;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double s = s0 + 0.5 * len * (nodes[q] + 1.0);
        const double c2 = std::cos(s) * std::cos(s);
        CMat res = (c2 * d2 + id).ldlt().solve(id);
        acc += (0.5 * len * weights[q]) * (d * res);
      }
    }
    return CMat((2.0 / kPi) * acc);
  };

  CMat prev = integrate(4);
  for (int panels = 8; panels <= max_panels; panels *= 2) {
    CMat cur = integrate(panels);
    const double change = max_abs(cur - prev);
    prev = cur;
    if (change <= quad_tol * scale)
      return op_norm(prev - bounded_transform(d));
  }
  throw QuadratureFail("resolvent quadrature did not converge");
}

IndexReport fredholm_index_calderon(const CMat& a, const CMat& p,
                                    const CalderonOptions& opts) {
  const int n = static_cast<int>(a.rows());
  CMat r = CMat::Identity(n, n) - p * a;
  CMat s = CMat::Identity(n, n) - a * p;

  IndexReport rep;
  {
    Vec sr = singular_values(r), ss = singular_values(s);
    const int gate_rank = truncation_rank(n);
    auto ratio = [&](const Vec& sv) {
      if (sv.size() == 0 || sv[0] <= 1e-14) return 0.0;
      return gate_rank < sv.size() ? sv[gate_rank] / sv[0] : 0.0;
    };
    rep.gate_tail_r = ratio(sr);
    rep.gate_tail_s = ratio(ss);
    if (rep.gate_tail_r > opts.gate_threshold ||
        rep.gate_tail_s > opts.gate_threshold)
      throw NotAlmostInvertible(
          "remainders 1-PA / 1-AP are not rapidly decaying");
  }

  // windowed traces in the Fourier basis
  const CMat& f = dft_matrix(n);
  CMat diff = r - s;
  CMat fd = f * diff;  // rows indexed by frequency
  const int window = opts.window > 0 ? opts.window : n / 4;
  std::vector<int> ladder_windows = {n / 16, n / 8, (3 * n) / 16, n / 4};
  bool window_listed = false;
  for (int w : ladder_windows) window_listed |= (w == window);
  if (!window_listed) ladder_windows.push_back(window);
  std::sort(ladder_windows.begin(), ladder_windows.end());

  // diagonal entries of F (R - S) F^H per frequency
  Vec diag_re(n);
  for (int row = 0; row < n; ++row)
    diag_re[row] = (fd.row(row) * f.row(row).adjoint())(0, 0).real();

  for (int w : ladder_windows) {
    double tr = 0.0;
    for (int row = 0; row < n; ++row)
      if (std::abs(dft_frequency(row, n)) <= w) tr += diag_re[row];
    rep.ladder.emplace_back(w, tr);
    if (w == window) rep.analytic_index = tr;
  }
  rep.rounded = static_cast<int>(std::lround(rep.analytic_index));
  rep.residual = std::abs(rep.analytic_index - rep.rounded);
  return rep;
}

int winding_number(const sym::Symbol& s, int samples, double xi_ref,
                   double* residual) {
  Vec xi(1);
  xi[0] = xi_ref;
  double total = 0.0;
  cplx prev = s.eval(Vec::Zero(1), xi)(0, 0);
  if (std::abs(prev) < 1e-9)
    throw SymbolVanishes("symbol vanishes on the contour");
  for (int j = 1; j <= samples; ++j) {
    Vec x(1);
    x[0] = 2.0 * kPi * j / samples;
    cplx cur = s.eval(x, xi)(0, 0);
    if (std::abs(cur) < 1e-9)
      throw SymbolVanishes("symbol vanishes on the contour");
    total += std::arg(cur / prev);
    prev = cur;
  }
  const double turns = total / (2.0 * kPi);
  if (residual) *residual = std::abs(turns - std::lround(turns));
  return static_cast<int>(std::lround(turns));
}

ProbeReport homotopy_invariance_probe(const CMat& a, const CMat& p,
                                      CounterRng& rng,
                                      const CalderonOptions& opts, int steps) {
  const int n = static_cast<int>(a.rows());
  const int rank = std::max(1, n / 16);
  CMat u = rng.cnormal_mat(n, rank), v = rng.cnormal_mat(n, rank);
  CMat k = u * v.adjoint();
  // confine the perturbation to the trace window
  const int window = opts.window > 0 ? opts.window : n / 4;
  const CMat& f = dft_matrix(n);
  CVec mask = CVec::Zero(n);
  for (int row = 0; row < n; ++row)
    if (std::abs(dft_frequency(row, n)) <= window) mask[row] = 1.0;
  CMat proj = f.adjoint() * mask.asDiagonal() * f;
  k = proj * k * proj;
  k *= 0.05 * op_norm_estimate(a) / std::max(1e-300, op_norm_estimate(k));

  ProbeReport rep;
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    IndexReport ir;
    try {
      ir = fredholm_index_calderon(a + t * k, p, opts);
    } catch (const NotAlmostInvertible&) {
      throw PathLeavesFredholm("decay gate failed at t = " +
                               std::to_string(t));
    }
    rep.t.push_back(t);
    rep.rounded.push_back(ir.rounded);
  }
  rep.base = rep.rounded.empty() ? 0 : rep.rounded.front();
  rep.constant = true;
  for (int r : rep.rounded)
    if (r != rep.base) rep.constant = false;
  return rep;
}

CMat hardy_compress(const CVec& f_values) {
  const int n = static_cast<int>(f_values.size());
  CMat pp = hardy_projection(n);
  CMat mf = f_values.asDiagonal();
  return pp * mf * pp + (CMat::Identity(n, n) - pp);
}

namespace {
CVec winding_symbol_values(int n, int w, bool invert) {
  CVec f(n);
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * kPi * j / n;
    cplx v = std::exp(cplx(0.0, w * th)) * (1.0 + 0.1 * std::sin(th));
    f[j] = invert ? 1.0 / v : v;
  }
  return f;
}
}  // namespace

CMat toeplitz_winding_operator(int n, int w) {
  return hardy_compress(winding_symbol_values(n, w, false));
}

CMat toeplitz_winding_parametrix(int n, int w) {
  return hardy_compress(winding_symbol_values(n, w, true));
}

}  // namespace cq::idx
