#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "coarsequant/expr.hpp"
#include "coarsequant/symbol.hpp"

using namespace cq;
using namespace cq::sym;

namespace {
geo::ManifoldGrid circle(int n) {
  geo::ManifoldSpec spec;
  spec.model = geo::Model::Circle;
  spec.n = n;
  return geo::ManifoldGrid(spec);
}
}  // namespace

TEST_CASE("expression sublanguage") {
  using cq::expr::Expression;
  cq::expr::Env env{{"x", cplx(0.5, 0.0)}, {"xi", cplx(2.0, 0.0)}};
  CHECK(Expression::parse("1 + 2*3").eval({}) == cplx(7.0));
  CHECK(Expression::parse("(1+2)*3").eval({}) == cplx(9.0));
  CHECK(Expression::parse("2^3^2").eval({}).real() ==
        doctest::Approx(512.0));  // right associative
  CHECK(Expression::parse("exp(i*pi)").eval({}).real() ==
        doctest::Approx(-1.0));
  CHECK(std::abs(Expression::parse("xi/sqrt(1+xi^2)").eval(env) -
                 cplx(2.0 / std::sqrt(5.0))) < 1e-14);
  CHECK(Expression::parse("-x + conj(i*x)").eval(env) ==
        cplx(-0.5, -0.5));
  CHECK_THROWS_AS(Expression::parse("1 +"), ConfigInvalid);
  CHECK_THROWS_AS(Expression::parse("foo(1)").eval({}), ConfigInvalid);
  CHECK_THROWS_AS(Expression::parse("y").eval(env), ConfigInvalid);
}

TEST_CASE("catalog symbols evaluate as documented") {
  Symbol c = make_symbol("constant");
  CHECK(c.eval(Vec::Zero(1), Vec::Zero(1))(0, 0) == cplx(1.0));

  Symbol d = make_symbol("dirac1d");
  Vec xi(1);
  xi[0] = 3.0;
  CHECK(d.eval(Vec::Zero(1), xi)(0, 0).real() ==
        doctest::Approx(3.0 / std::sqrt(10.0)));

  Symbol w = make_symbol("winding_w", 2);
  Vec th(1);
  th[0] = 0.7;
  CHECK(std::abs(w.eval(th, xi)(0, 0) -
                 std::exp(cplx(0, 2 * 0.7)) * (1.0 + 0.1 * std::sin(0.7))) <
        1e-14);
  Vec xneg(1);
  xneg[0] = -1.0;
  CHECK(w.eval(th, xneg)(0, 0) == cplx(1.0));

  CHECK_THROWS_AS(make_symbol("no_such"), ConfigInvalid);
}

TEST_CASE("hormander check: constant passes, dirac passes, sin fails") {
  geo::ManifoldGrid grid = circle(64);
  auto shells = dyadic_samples(1, 32.0);

  HormanderReport rc = check_hormander(make_symbol("constant"), grid, shells);
  CHECK(rc.pass);
  CHECK(rc.c == doctest::Approx(0.0).epsilon(1e-9));

  HormanderReport rd = check_hormander(make_symbol("dirac1d"), grid, shells);
  CHECK(rd.pass);
  CHECK(rd.c > 0.0);
  CHECK(rd.c < 3.0);

  Symbol sin_xi = symbol_from_expression("sin(xi)", 1, 1);
  HormanderReport rs = check_hormander(sin_xi, grid, shells);
  CHECK_FALSE(rs.pass);
}

TEST_CASE("Lemma 6.1 stability under bounded trivialization changes") {
  geo::ManifoldGrid grid = circle(64);
  auto shells = dyadic_samples(1, 32.0);
  Symbol d = make_symbol("dirac1d");
  HormanderReport base = check_hormander(d, grid, shells);
  // psi_x(xi) = (1.5 + 0.4 sin x) xi: norms of psi and its inverse <= 2
  Symbol warped = d;
  auto inner = d.eval;
  warped.eval = [inner](const Vec& x, const Vec& xi) {
    return inner(x, Vec((1.5 + 0.4 * std::sin(x[0])) * xi));
  };
  HormanderReport rw = check_hormander(warped, grid, shells);
  CHECK(rw.pass);
  CHECK(rw.c <= 4.0 * std::max(base.c, 1e-9));  // measured kappa stays small
}

TEST_CASE("order classification") {
  geo::ManifoldGrid grid = circle(128);
  CHECK(classify_order(make_symbol("constant"), grid) == OrderClass::Order0);
  CHECK(classify_order(make_symbol("dirac1d"), grid) == OrderClass::Order0);
  Symbol dec = symbol_from_expression("1/sqrt(1+xi^2)", 1, 1);
  CHECK(classify_order(dec, grid) == OrderClass::Negative);

  // scaling down never upgrades the class to order0
  Symbol tiny = dec;
  auto base = dec.eval;
  tiny.eval = [base](const Vec& x, const Vec& xi) {
    return CMat(1e-3 * base(x, xi));
  };
  CHECK(classify_order(tiny, grid) != OrderClass::Order0);

  geo::ManifoldSpec hspec;
  hspec.model = geo::Model::Heis3;
  hspec.n = 6;
  geo::ManifoldGrid heis(hspec);
  Symbol strong;
  strong.x_dim = 3;
  strong.xi_dim = 3;
  strong.eval = [](const Vec& x, const Vec& xi) {
    return CMat::Constant(1, 1,
                          cplx(std::exp(-x.squaredNorm()) /
                               std::sqrt(1.0 + xi.squaredNorm())));
  };
  CHECK(classify_order(strong, heis) == OrderClass::StronglyNegative);
}

TEST_CASE("fourier cosymbol: delta for constants, shift theorem, Parseval") {
  geo::ManifoldGrid grid = circle(64);
  const double h = 2 * kPi / 64;
  FiberLattice lat{1, h, 12};

  CosymbolFiber delta =
      fourier_cosymbol(make_symbol("constant"), Vec::Zero(1), lat, 64, 0.6);
  for (int p = 0; p < lat.size(); ++p) {
    const double expect = p == lat.half_points ? 1.0 / h : 0.0;
    CHECK(std::abs(delta.samples[p](0, 0) - expect) < 1e-10);
  }

  // shift theorem: sigma(xi) = e^{i a xi} gives a delta at -a... the kernel
  // (1/L) sum sigma(k) e^{i k u} peaks where u = -a
  const double a = 4.0 * h;
  Symbol shift;
  shift.eval = [a](const Vec&, const Vec& xi) {
    return CMat::Constant(1, 1, std::exp(cplx(0.0, a * xi[0])));
  };
  CosymbolFiber sh = fourier_cosymbol(shift, Vec::Zero(1), lat, 64, 0.6);
  for (int p = 0; p < lat.size(); ++p) {
    const double u = (p - lat.half_points) * h;
    const double expect = std::abs(u + a) < h / 2 ? 1.0 / h : 0.0;
    CHECK(std::abs(sh.samples[p](0, 0) - expect) < 1e-10);
  }

  // Parseval before cutting: sum |k|^2 h = (1/L) sum |sigma(k)|^2
  FiberLattice big{1, h, 32};  // covers the whole circle: no cut
  Symbol s = make_symbol("dirac1d");
  CosymbolFiber f = fourier_cosymbol(s, Vec::Zero(1), big, 64, kPi + h);
  double lhs = 0.0;
  // the lattice wraps the circle: count each physical point once
  for (int p = 0; p < big.size(); ++p) {
    const double u = (p - big.half_points) * h;
    if (u < -kPi || u >= kPi) continue;
    lhs += std::norm(f.samples[p](0, 0)) * h;
  }
  double rhs = 0.0;
  for (int k = -32; k < 32; ++k) {
    Vec xi(1);
    xi[0] = k;
    rhs += std::norm(s.eval(Vec::Zero(1), xi)(0, 0)) / (2 * kPi);
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("alias warning fires for under-resolved symbols") {
  geo::ManifoldGrid grid = circle(16);
  const double h = 2 * kPi / 16;
  FiberLattice lat{1, h, 6};
  Symbol slow = symbol_from_expression("xi/sqrt(1+xi^2/10000)", 1, 1);
  double metric = 0.0;
  CHECK_THROWS_AS(
      fourier_cosymbol(slow, Vec::Zero(1), lat, 16, 0.6, {}, &metric),
      AliasWarning);
  FourierOptions opts;
  opts.throw_on_alias = false;
  fourier_cosymbol(slow, Vec::Zero(1), lat, 16, 0.6, opts, &metric);
  CHECK(metric > 0.25);
}

TEST_CASE("zoom invariance report on the Heisenberg lattice") {
  lie::GradedAlgebra h3 = lie::heisenberg_algebra();
  FiberLattice lat{3, 0.125, 8};
  const int Q = h3.homogeneous_dim();
  auto rho = [](const Vec& u) {
    return std::pow(std::pow(u[0] * u[0] + u[1] * u[1], 2) + u[2] * u[2],
                    0.25);
  };

  CosymbolFiber hom;
  hom.lat = lat;
  hom.window = 1.0;
  hom.samples.assign(lat.size(), CMat::Zero(1, 1));
  CosymbolFiber bump = hom;
  CosymbolFiber delta = hom;
  for (int p = 0; p < lat.size(); ++p) {
    const Vec u = lat.point(p);
    const double r = rho(u);
    hom.samples[p](0, 0) = r > 1e-9 ? std::pow(r, -Q) : 0.0;
    bump.samples[p](0, 0) = std::exp(-2.0 * (u - Vec::Constant(3, 0.3))
                                                .squaredNorm());
    delta.samples[p](0, 0) = u.norm() < 1e-12 ? 1.0 : 0.0;
  }
  const std::vector<double> lambdas = {0.8, 1.25};
  ZoomInvarianceReport rh = check_zoom_invariance(hom, h3, lambdas, 0.5);
  ZoomInvarianceReport rb = check_zoom_invariance(bump, h3, lambdas, 0.5);
  ZoomInvarianceReport rd = check_zoom_invariance(delta, h3, lambdas, 0.5);
  for (double dh : rh.relative_defects) CHECK(dh < 0.15);
  for (double dd : rd.relative_defects) CHECK(dd == doctest::Approx(0.0));
  CHECK(*std::max_element(rb.relative_defects.begin(),
                          rb.relative_defects.end()) > 0.5);
}

TEST_CASE("graded block extension is self-adjoint with |u|^2 square") {
  Symbol u = make_symbol("winding_w", 1);
  Symbol g = graded_from_block(u);
  Vec th(1), xi(1);
  th[0] = 0.3;
  xi[0] = 2.0;
  CMat v = g.eval(th, xi);
  CHECK((v - v.adjoint()).norm() < 1e-14);
  CMat sq = v * v;
  CHECK(std::abs(sq(0, 0) - sq(1, 1)) < 1e-14);
  CHECK(std::abs(sq(0, 1)) < 1e-14);
}
