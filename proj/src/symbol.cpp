#include "coarsequant/symbol.hpp"

#include <algorithm>
#include <cmath>

#include "coarsequant/expr.hpp"

namespace cq::sym {

std::string to_string(OrderClass c) {
  switch (c) {
    case OrderClass::Order0: return "order0";
    case OrderClass::Negative: return "negative";
    case OrderClass::StronglyNegative: return "strongly_negative";
  }
  return "?";
}

Symbol make_symbol(const std::string& name, int winding) {
  Symbol s;
  s.name = name;
  if (name == "constant") {
    s.eval = [](const Vec&, const Vec&) {
      return CMat::Constant(1, 1, cplx(1.0));
    };
    return s;
  }
  if (name == "dirac1d") {
    s.eval = [](const Vec&, const Vec& xi) {
      const double v = xi[0] / std::sqrt(1.0 + xi[0] * xi[0]);
      return CMat::Constant(1, 1, cplx(v));
    };
    return s;
  }
  if (name == "winding_w") {
    const double w = winding;
    s.compact_xi_radius = 1.0;
    s.eval = [w](const Vec& x, const Vec& xi) {
      cplx v(1.0, 0.0);
      if (xi[0] >= 0.0) {
        const double th = x[0];
        v = std::exp(cplx(0.0, w * th)) * (1.0 + 0.1 * std::sin(th));
      }
      return CMat::Constant(1, 1, v);
    };
    s.name = "winding_" + std::to_string(winding);
    return s;
  }
  if (name == "heis_homog") {
    s.x_dim = 3;
    s.xi_dim = 3;
    s.eval = [](const Vec&, const Vec& xi) {
      const double den =
          std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + std::abs(xi[2]));
      const double v = den > 0.0 ? xi[0] / den : 0.0;
      return CMat::Constant(1, 1, cplx(v));
    };
    return s;
  }
  throw ConfigInvalid("unknown catalog symbol '" + name + "'");
}

Symbol symbol_from_expression(const std::string& text, int x_dim, int xi_dim) {
  expr::Expression e = expr::Expression::parse(text);
  Symbol s;
  s.name = "expr";
  s.x_dim = x_dim;
  s.xi_dim = xi_dim;
  s.eval = [e, x_dim, xi_dim](const Vec& x, const Vec& xi) {
    expr::Env env;
    env["x"] = x[0];
    if (x_dim > 1) env["y"] = x[1];
    env["xi"] = xi[0];
    if (xi_dim > 1) env["eta"] = xi[1];
    return CMat::Constant(1, 1, e.eval(env));
  };
  return s;
}

Symbol graded_from_block(const Symbol& u) {
  if (u.fiber_dim != 1)
    throw ConfigInvalid("graded_from_block expects a scalar symbol");
  Symbol s = u;
  s.fiber_dim = 2;
  s.name = u.name + "_graded";
  auto base = u.eval;
  s.eval = [base](const Vec& x, const Vec& xi) {
    const cplx v = base(x, xi)(0, 0);
    CMat m = CMat::Zero(2, 2);
    m(0, 1) = std::conj(v);
    m(1, 0) = v;
    return m;
  };
  return s;
}

std::vector<Vec> dyadic_samples(int xi_dim, double max_radius) {
  std::vector<Vec> dirs;
  if (xi_dim == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else if (xi_dim == 2) {
    for (int k = 0; k < 8; ++k) {
      Vec d(2);
      d << std::cos(kPi * k / 4.0), std::sin(kPi * k / 4.0);
      dirs.push_back(d);
    }
  } else {
    for (int a = 0; a < xi_dim; ++a) {
      dirs.push_back(Vec::Unit(xi_dim, a));
      dirs.push_back(-Vec::Unit(xi_dim, a));
    }
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          Vec d(3);
          d << sx, sy, sz;
          dirs.push_back(d / d.norm());
        }
  }
  std::vector<Vec> out;
  for (double r = 1.0; r <= max_radius * (1 + 1e-12); r *= 2.0)
    for (const Vec& d : dirs) out.push_back(r * d);
  return out;
}

namespace {

double differential_norm(const Symbol& s, const Vec& x, const Vec& xi,
                         double step) {
  double acc = 0.0;
  for (int i = 0; i < s.xi_dim; ++i) {
    Vec xp = xi, xm = xi;
    xp[i] += step;
    xm[i] -= step;
    CMat d = (s.eval(x, xp) - s.eval(x, xm)) / (2.0 * step);
    const double n = d.norm();  // Frobenius; exact for scalar symbols
    acc += n * n;
  }
  return std::sqrt(acc);
}

std::vector<Vec> x_probes(const Symbol& s, const geo::ManifoldGrid& grid,
                          int cap) {
  std::vector<Vec> xs;
  const int stride = std::max(1, grid.size() / cap);
  for (int i = 0; i < grid.size(); i += stride) {
    Vec x = grid.points()[i];
    if (static_cast<int>(x.size()) >= s.x_dim)
      xs.push_back(x.head(s.x_dim));
    else {
      Vec padded = Vec::Zero(s.x_dim);
      padded.head(x.size()) = x;
      xs.push_back(padded);
    }
  }
  return xs;
}

}  // namespace

HormanderReport check_hormander(const Symbol& s, const geo::ManifoldGrid& grid,
                                const std::vector<Vec>& xi_samples) {
  HormanderReport rep;
  std::vector<Vec> xs = x_probes(s, grid, 48);

  // group samples by shell radius
  std::vector<double> radii;
  for (const Vec& xi : xi_samples) {
    const double r = xi.norm();
    if (radii.empty() || std::abs(radii.back() - r) > 1e-9 * (1.0 + r)) {
      bool found = false;
      for (double q : radii)
        if (std::abs(q - r) <= 1e-9 * (1.0 + r)) found = true;
      if (!found) radii.push_back(r);
    }
  }
  std::sort(radii.begin(), radii.end());

  rep.worst_x = xs.empty() ? Vec() : xs[0];
  rep.worst_xi = xi_samples.empty() ? Vec() : xi_samples[0];
  for (double r : radii) {
    double shell_c = 0.0;
    for (const Vec& xi : xi_samples) {
      if (std::abs(xi.norm() - r) > 1e-9 * (1.0 + r)) continue;
      if (xi.norm() <= s.compact_xi_radius) continue;
      const double step = 0.1 * (1.0 + xi.norm());
      for (const Vec& x : xs) {
        const double c = differential_norm(s, x, xi, step) * (1.0 + xi.norm());
        if (c > shell_c) shell_c = c;
        if (c > rep.c) {
          rep.c = c;
          rep.worst_x = x;
          rep.worst_xi = xi;
        }
      }
    }
    rep.shell_constants.push_back(shell_c);
  }

  // continuity in x, uniformly in xi: adjacent-probe modulus
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (const Vec& xi : xi_samples) {
      const double d = (s.eval(xs[i], xi) - s.eval(xs[i + 1], xi)).norm();
      rep.x_modulus = std::max(rep.x_modulus, d);
    }

  const std::size_t half = rep.shell_constants.size() / 2;
  double inner = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < rep.shell_constants.size(); ++i)
    (i < half ? inner : outer) =
        std::max(i < half ? inner : outer, rep.shell_constants[i]);
  rep.pass = outer <= 1.25 * inner + 1e-9;
  return rep;
}

OrderClass classify_order(const Symbol& s, const geo::ManifoldGrid& grid,
                          double tol) {
  const double max_r = std::max(16, grid.spec().n / 2);
  std::vector<Vec> samples = dyadic_samples(s.xi_dim, max_r);
  std::vector<Vec> xs = x_probes(s, grid, 48);

  std::vector<double> radii;
  for (double r = 1.0; r <= max_r * (1 + 1e-12); r *= 2.0) radii.push_back(r);
  std::vector<double> sup(radii.size(), 0.0);
  for (std::size_t si = 0; si < radii.size(); ++si)
    for (const Vec& xi : samples) {
      if (std::abs(xi.norm() - radii[si]) > 1e-9 * (1.0 + radii[si])) continue;
      for (const Vec& x : xs)
        sup[si] = std::max(sup[si], s.eval(x, xi).norm());
    }

  const double last = sup.back();
  const double peak = *std::max_element(sup.begin(), sup.end());
  if (last <= tol) {
    // demand monotone decay over the final shells
    const std::size_t k = sup.size();
    for (std::size_t i = k >= 3 ? k - 3 : 0; i + 1 < k; ++i)
      if (sup[i + 1] > sup[i] * 1.05 + 1e-12)
        throw Inconclusive("decay nonmonotone near the sampling horizon");
    // strong decay additionally requires decay in x; only meaningful on the
    // non-compact R^3 model
    if (grid.spec().model == geo::Model::Heis3) {
      double outer_x = 0.0;
      const double edge = 0.8 * grid.spec().extent;
      for (const Vec& x : grid.points()) {
        if (x.cwiseAbs().maxCoeff() < edge) continue;
        for (const Vec& xi : samples)
          outer_x = std::max(outer_x, s.eval(x, xi).norm());
      }
      if (outer_x <= tol) return OrderClass::StronglyNegative;
    }
    return OrderClass::Negative;
  }
  if (last >= 0.5 * peak) return OrderClass::Order0;
  throw Inconclusive("norm decays but has not converged at the horizon");
}

int FiberLattice::size() const {
  int s = 1;
  for (int d = 0; d < dim; ++d) s *= points_per_axis();
  return s;
}

Vec FiberLattice::point(int flat_index) const {
  Vec u(dim);
  const int m = points_per_axis();
  int rem = flat_index;
  for (int d = 0; d < dim; ++d) {
    u[d] = (rem % m - half_points) * spacing;
    rem /= m;
  }
  return u;
}

int FiberLattice::index_of(const std::vector<int>& coords) const {
  const int m = points_per_axis();
  int idx = 0, strideN = 1;
  for (int d = 0; d < dim; ++d) {
    idx += (coords[d] + half_points) * strideN;
    strideN *= m;
  }
  return idx;
}

double FiberLattice::cell_volume() const {
  return std::pow(spacing, dim);
}

CMat CosymbolFiber::eval(const Vec& u) const {
  if (u.cwiseAbs().maxCoeff() > window + 0.5 * lat.spacing)
    return CMat::Zero(m, m);
  // multilinear interpolation between the 2^dim surrounding nodes
  std::vector<int> base(lat.dim);
  std::vector<double> frac(lat.dim);
  for (int d = 0; d < lat.dim; ++d) {
    const double s = u[d] / lat.spacing;
    double fl = std::floor(s);
    base[d] = static_cast<int>(fl);
    frac[d] = s - fl;
    if (base[d] < -lat.half_points) {
      base[d] = -lat.half_points;
      frac[d] = 0.0;
    }
    if (base[d] >= lat.half_points) {
      base[d] = lat.half_points - 1;
      frac[d] = base[d] == lat.half_points - 1 ? frac[d] : 1.0;
    }
  }
  CMat out = CMat::Zero(m, m);
  const int corners = 1 << lat.dim;
  for (int c = 0; c < corners; ++c) {
    double wgt = 1.0;
    std::vector<int> coords(lat.dim);
    for (int d = 0; d < lat.dim; ++d) {
      const int bit = (c >> d) & 1;
      coords[d] = base[d] + bit;
      wgt *= bit ? frac[d] : 1.0 - frac[d];
    }
    if (wgt == 0.0) continue;
    out += wgt * samples[lat.index_of(coords)];
  }
  return out;
}

double CosymbolFiber::l2_norm() const {
  double acc = 0.0;
  for (const CMat& k : samples) acc += k.squaredNorm();
  return std::sqrt(acc * lat.cell_volume());
}

CosymbolFiber fourier_cosymbol(const Symbol& s, const Vec& x,
                               const FiberLattice& lat, int ambient_n,
                               double window, const FourierOptions& opts,
                               double* alias_metric_out) {
  CosymbolFiber fiber;
  fiber.lat = lat;
  fiber.m = s.fiber_dim;
  fiber.window = window;
  const double period = ambient_n * lat.spacing;

  // alias check: how much does sigma still vary beyond the Nyquist shell?
  double sup_norm = 1e-300, alias = 0.0;
  {
    const double nyq = kPi / lat.spacing;  // = (2 pi / period) * n/2
    std::vector<Vec> dirs = dyadic_samples(s.xi_dim, 1.0);
    for (const Vec& d0 : dirs) {
      const Vec d = d0 / d0.norm();
      CMat at_nyq = s.eval(x, nyq * d);
      sup_norm = std::max(sup_norm, at_nyq.norm());
      for (double f : {1.5, 2.0, 4.0}) {
        alias = std::max(alias, (s.eval(x, f * nyq * d) - at_nyq).norm());
      }
    }
  }
  if (alias_metric_out) *alias_metric_out = alias / sup_norm;
  if (opts.throw_on_alias && alias / sup_norm > opts.alias_tol)
    throw AliasWarning("symbol varies beyond Nyquist by " +
                       std::to_string(alias / sup_norm));

  // inverse DFT over the ambient integer frequency lattice, per axis
  const int nfreq = ambient_n;
  const double base_freq = 2.0 * kPi / period;
  const int total = fiber.lat.size();
  fiber.samples.assign(total, CMat::Zero(fiber.m, fiber.m));
  long freq_count = 1;
  for (int d = 0; d < lat.dim; ++d) freq_count *= nfreq;
  for (long fi = 0; fi < freq_count; ++fi) {
    Vec xi(lat.dim);
    long rem = fi;
    for (int d = 0; d < lat.dim; ++d) {
      xi[d] = (rem % nfreq - nfreq / 2) * base_freq;
      rem /= nfreq;
    }
    CMat sv = s.eval(x, xi);
    for (int p = 0; p < total; ++p) {
      const Vec u = fiber.lat.point(p);
      if (u.cwiseAbs().maxCoeff() > window + 1e-12) continue;
      const double phase = xi.dot(u);
      fiber.samples[p] += sv * std::polar(1.0, phase);
    }
  }
  const double scale = std::pow(1.0 / period, lat.dim);
  for (int p = 0; p < total; ++p) {
    const Vec u = fiber.lat.point(p);
    if (u.cwiseAbs().maxCoeff() > window + 1e-12)
      fiber.samples[p].setZero();  // cut to the compact window
    else
      fiber.samples[p] *= scale;
  }
  return fiber;
}

ZoomInvarianceReport check_zoom_invariance(const CosymbolFiber& fiber,
                                           const lie::GradedAlgebra& alg,
                                           const std::vector<double>& lambdas,
                                           double core_radius) {
  ZoomInvarianceReport rep;
  const int q = alg.homogeneous_dim();
  for (double lam : lambdas) {
    rep.lambdas.push_back(lam);
    double num = 0.0, den = 0.0;
    for (int p = 0; p < fiber.lat.size(); ++p) {
      const Vec u = fiber.lat.point(p);
      // homogeneous gauge |u|_hom = max_i |u_i|^{1/w_i}
      double rho = 0.0;
      for (int d = 0; d < alg.dim; ++d)
        rho = std::max(rho, std::pow(std::abs(u[d]), 1.0 / alg.weights[d]));
      if (rho < core_radius) continue;
      Vec zu = zoom(alg, lam, u);
      if (zu.cwiseAbs().maxCoeff() > fiber.window) continue;
      const CMat pushed = std::pow(lam, q) * fiber.eval(zu);
      const CMat orig = fiber.samples[p];
      num += (pushed - orig).squaredNorm();
      den += orig.squaredNorm();
    }
    rep.relative_defects.push_back(den > 0 ? std::sqrt(num / den) : 0.0);
  }
  return rep;
}

}  // namespace cq::sym
