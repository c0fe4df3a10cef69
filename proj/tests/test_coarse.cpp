#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "coarsequant/coarse.hpp"
#include "coarsequant/linalg.hpp"

using namespace cq;
using namespace cq::coarse;

namespace {

geo::ManifoldGrid circle(int n, bool conformal = false) {
  geo::ManifoldSpec spec;
  spec.model = conformal ? geo::Model::CircleConformal : geo::Model::Circle;
  spec.n = n;
  spec.conformal_amplitude = conformal ? 0.5 : 0.0;
  return geo::ManifoldGrid(spec);
}

}  // namespace

TEST_CASE("nu cutoff profile") {
  NuCutoff nu{0.5};
  CHECK(nu.profile(0.0) == 1.0);
  CHECK(nu.profile(0.5) == 1.0);
  CHECK(nu.profile(2.0 / 3.0) == 0.0);
  CHECK(nu.profile(0.58) > 0.0);
  CHECK(nu.profile(0.58) < 1.0);
  CHECK(nu.at_norm(0.2) == 1.0);   // 0.2 / 0.5 = 0.4 <= 1/2
  CHECK(nu.at_norm(0.4) == 0.0);   // 0.8 >= 2/3
}

TEST_CASE("transplant data: lattice-exact pullbacks on the flat circle") {
  geo::ManifoldGrid grid = circle(64);
  NuCutoff nu{grid.ball_radius()};
  TransplantData data = make_transplant_data(grid, Vec::Zero(1), nu);
  CHECK(data.lattice_exact);
  CHECK(!data.idx.empty());
  for (std::size_t i = 0; i < data.idx.size(); ++i) {
    CHECK(data.chi[i] == 1.0);
    CHECK(data.nu[i] > 0.0);
    CHECK(data.u[i].norm() < (2.0 / 3.0) * nu.radius + 1e-12);
  }
  // unitarity of the transplant measure: sum w chi^2 over the window equals
  // the Lebesgue mass of the pulled-back cells (flat: identical)
  double mass = 0.0;
  for (std::size_t i = 0; i < data.idx.size(); ++i)
    mass += grid.weights()[data.idx[i]] * data.chi[i] * data.chi[i];
  CHECK(mass == doctest::Approx(data.idx.size() * 2 * kPi / 64));
}

TEST_CASE("constant cosymbol transplants to nu^2 and quantizes to identity") {
  geo::ManifoldGrid grid = circle(64);
  NuCutoff nu{grid.ball_radius()};
  sym::Cosymbol cos = cosymbol_of(sym::make_symbol("constant"), grid, nu);

  Vec x = grid.points()[10];
  CMat f = transplant(cos, grid, x, nu);
  // multiplication by nu_x^2 on the window, zero elsewhere
  TransplantData data = make_transplant_data(grid, x, nu);
  CMat expect = CMat::Zero(grid.size(), grid.size());
  for (std::size_t a = 0; a < data.idx.size(); ++a)
    expect(data.idx[a], data.idx[a]) = data.nu[a] * data.nu[a];
  CHECK(max_abs(f - expect) < 1e-10);

  opint::PartitionOfUnity pou = opint::build_partition(
      grid, uniform_centers(grid, 32), 0.22);
  QuantizeOptions opts;
  opts.epsilon = 0.1;
  CoarseOperator F = quantize(cos, grid, pou, nu, opts);
  CHECK(max_abs(F.mat - CMat::Identity(grid.size(), grid.size())) < 1e-10);
  CHECK(F.fiber_sup == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transplant agrees with the windowed Fourier multiplier") {
  // xi-only symbol on the flat circle: F(x) = nu chi M_sigma chi nu
  const int n = 128;
  geo::ManifoldGrid grid = circle(n);
  NuCutoff nu{grid.ball_radius()};
  sym::Symbol s = sym::make_symbol("dirac1d");
  sym::Cosymbol cos = cosymbol_of(s, grid, nu);
  Vec x = grid.points()[40];
  CMat f = transplant(cos, grid, x, nu);

  // oracle: diag(nu_x) * (DFT multiplier with the cut kernel) * diag(nu_x)
  CVec m(n);
  for (int r = 0; r < n; ++r) {
    Vec xi(1);
    xi[0] = dft_frequency(r, n);
    m[r] = s.eval(x, xi)(0, 0);
  }
  CMat mult = fourier_multiplier(m);
  Vec nuvec = Vec::Zero(n);
  TransplantData data = make_transplant_data(grid, x, nu);
  for (std::size_t a = 0; a < data.idx.size(); ++a)
    nuvec[data.idx[a]] = data.nu[a];
  CVec nc = nuvec.cast<cplx>();
  CMat oracle = nc.asDiagonal() * mult * nc.asDiagonal();
  // agreement up to the kernel cut (compact): compare after truncation
  CHECK(rank_truncated_norm(f - oracle, truncation_rank(n)) < 1e-8);
}

TEST_CASE("shrinking the nu support is a two-sided multiplication") {
  geo::ManifoldGrid grid = circle(64);
  NuCutoff nu{grid.ball_radius()};
  NuCutoff nu_small{0.6 * grid.ball_radius()};
  sym::Cosymbol cos = cosymbol_of(sym::make_symbol("dirac1d"), grid, nu);
  // fibers cut to the smaller window for both, so only nu differs
  sym::Cosymbol cos_small =
      cosymbol_of(sym::make_symbol("dirac1d"), grid, nu_small);
  Vec x = grid.points()[5];
  CMat big = transplant(cos_small, grid, x, nu);
  CMat small = transplant(cos_small, grid, x, nu_small);
  // nu' nu = nu' here, so  small = nu' big nu'  on the shared window
  TransplantData d_small = make_transplant_data(grid, x, nu_small);
  Vec ratio = Vec::Zero(grid.size());
  TransplantData d_big = make_transplant_data(grid, x, nu);
  std::map<int, double> nu_big;
  for (std::size_t a = 0; a < d_big.idx.size(); ++a)
    nu_big[d_big.idx[a]] = d_big.nu[a];
  for (std::size_t a = 0; a < d_small.idx.size(); ++a)
    ratio[d_small.idx[a]] = d_small.nu[a] / nu_big[d_small.idx[a]];
  CVec rc = ratio.cast<cplx>();
  CHECK(max_abs(CMat(rc.asDiagonal() * big * rc.asDiagonal()) - small) <
        1e-10);
}

TEST_CASE("quantize: adjoint compatibility and norm control") {
  const int n = 128;
  geo::ManifoldGrid grid = circle(n);
  NuCutoff nu{grid.ball_radius()};
  sym::Symbol s = sym::make_symbol("winding_w", 1);
  sym::Cosymbol cos = cosymbol_of(s, grid, nu);
  opint::PartitionOfUnity pou =
      opint::build_partition(grid, uniform_centers(grid, 40), 0.18);
  QuantizeOptions opts;
  opts.epsilon = 0.6;
  CoarseOperator F = quantize(cos, grid, pou, nu, opts);

  // adjoint cosymbol quantizes to the adjoint for the same partition
  sym::Symbol sc = s;
  auto base = s.eval;
  sc.eval = [base](const Vec& x, const Vec& xi) {
    return CMat(base(x, xi).adjoint());
  };
  sym::Cosymbol cos_adj = cosymbol_of(sc, grid, nu);
  CoarseOperator Fadj = quantize(cos_adj, grid, pou, nu, opts);
  CHECK(max_abs(Fadj.mat - F.mat.adjoint()) < 1e-10);

  // Thm 5.2 3-degree norm control at the compact-proxy rank
  const double sup = F.fiber_sup;
  CHECK(rank_truncated_norm(F.mat, truncation_rank(n)) <= sup * 1.05);

  // proper support within the partition squares
  opint::SupportSet supp = opint::support_of(F.mat, 1e-9);
  std::vector<std::pair<int, int>> allowed;
  const int per = (n + supp.n_cells - 1) / supp.n_cells;
  for (std::size_t b = 0; b < pou.cover.size(); ++b) {
    std::vector<int> touched;
    for (int i = 0; i < n; ++i)
      if (pou.alphas[b][i] > 0) touched.push_back(i / per);
    for (int ci : touched)
      for (int cj : touched) allowed.emplace_back(ci, cj);
  }
  CHECK(opint::subset_within(supp, allowed, 0));
}

TEST_CASE("quantize product test: composition defect shrinks with epsilon") {
  auto defect_at = [&](int n, double radius) {
    geo::ManifoldGrid grid = circle(n);
    NuCutoff nu{grid.ball_radius()};
    sym::Symbol s1 = sym::make_symbol("winding_w", 1);
    sym::Symbol s2 = sym::make_symbol("dirac1d");
    sym::Symbol s12 = s1;
    auto e1 = s1.eval, e2 = s2.eval;
    s12.eval = [e1, e2](const Vec& x, const Vec& xi) {
      return CMat(e1(x, xi) * e2(x, xi));
    };
    const int count = static_cast<int>(std::ceil(2 * kPi / radius));
    opint::PartitionOfUnity pou = opint::build_partition(
        grid, uniform_centers(grid, count), radius);
    QuantizeOptions opts;
    opts.epsilon = 2.0;  // bookkeeping only here
    CoarseOperator f1 = quantize(cosymbol_of(s1, grid, nu), grid, pou, nu,
                                 opts);
    CoarseOperator f2 = quantize(cosymbol_of(s2, grid, nu), grid, pou, nu,
                                 opts);
    CoarseOperator f12 = quantize(cosymbol_of(s12, grid, nu), grid, pou, nu,
                                  opts);
    return rank_truncated_norm(f12.mat - f1.mat * f2.mat,
                               truncation_rank(n));
  };
  // radii small enough that neighbours' nu-cores cover each other's
  // partition supports; this is what the composition property needs
  const double coarse_defect = defect_at(192, 0.08);
  const double fine_defect = defect_at(384, 0.04);
  CHECK(fine_defect < 0.75 * coarse_defect);
}

TEST_CASE("norm continuity failure is detected") {
  const int n = 64;
  geo::ManifoldGrid grid = circle(n);
  NuCutoff nu{grid.ball_radius()};
  // discontinuous family: kernel jumps with the sign of cos(x)
  sym::Cosymbol cos;
  cos.m = 1;
  cos.provenance = "jump";
  const double h = 2 * kPi / n;
  sym::FiberLattice lat{1, h, 8};
  cos.fiber = [lat](const Vec& x) {
    sym::CosymbolFiber f;
    f.lat = lat;
    f.window = lat.half_points * lat.spacing;
    f.m = 1;
    f.samples.assign(lat.size(), CMat::Zero(1, 1));
    const double v = std::cos(x[0]) > 0 ? 1.0 : -1.0;
    f.samples[lat.half_points](0, 0) = v / lat.spacing;
    return f;
  };
  opint::PartitionOfUnity pou =
      opint::build_partition(grid, uniform_centers(grid, 32), 0.2);
  QuantizeOptions opts;
  opts.epsilon = 0.5;
  CHECK_THROWS_AS(quantize(cos, grid, pou, nu, opts), NormContinuityFail);
}

TEST_CASE("oversized partition radius violates subordination") {
  geo::ManifoldGrid grid = circle(64);
  NuCutoff nu{grid.ball_radius()};
  sym::Cosymbol cos = cosymbol_of(sym::make_symbol("constant"), grid, nu);
  opint::PartitionOfUnity pou =
      opint::build_partition(grid, uniform_centers(grid, 8), 1.2);
  CHECK_THROWS_AS(quantize(cos, grid, pou, nu, {}), ConfigInvalid);
}

TEST_CASE("kohn nirenberg: multipliers, multiplications, torus smoke") {
  const int n = 64;
  geo::ManifoldGrid grid = circle(n);
  // xi-only symbol -> Fourier multiplier
  sym::Symbol d = sym::make_symbol("dirac1d");
  CVec m(n);
  for (int r = 0; r < n; ++r) {
    Vec xi(1);
    xi[0] = dft_frequency(r, n);
    m[r] = d.eval(Vec::Zero(1), xi)(0, 0);
  }
  CHECK(max_abs(kohn_nirenberg(grid, d) - fourier_multiplier(m)) < 1e-10);

  // x-only symbol -> multiplication operator
  sym::Symbol mult = sym::symbol_from_expression("exp(i*x)", 1, 1);
  CMat km = kohn_nirenberg(grid, mult);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const cplx expect =
          j == l ? std::exp(cplx(0, grid.points()[j][0])) : cplx(0.0);
      CHECK(std::abs(km(j, l) - expect) < 1e-10);
    }

  geo::ManifoldSpec tspec;
  tspec.model = geo::Model::Torus;
  tspec.n = 8;
  geo::ManifoldGrid torus(tspec);
  sym::Symbol t2 = sym::symbol_from_expression("xi/sqrt(1+xi^2+eta^2)", 2, 2);
  CMat op = kohn_nirenberg(torus, t2);
  CHECK(op.rows() == 64);
  CHECK(op_norm(op) < 1.01);

  geo::ManifoldGrid conf = circle(16, true);
  CHECK_THROWS_AS(kohn_nirenberg(conf, d), ConfigInvalid);
}

TEST_CASE("recovery: multiplication operators give scaled deltas") {
  const int n = 128;
  geo::ManifoldGrid grid = circle(n);
  NuCutoff nu{grid.ball_radius()};
  const double h = 2 * kPi / n;
  sym::FiberLattice lat{1, h, static_cast<int>(std::ceil(
                                  (2.0 / 3.0) * nu.radius / h)) +
                                  2};
  CVec f(n);
  for (int i = 0; i < n; ++i)
    f[i] = 2.0 + std::sin(grid.points()[i][0]);
  CMat op = f.asDiagonal();
  Vec x = Vec::Zero(1);
  sym::CosymbolFiber rec = recover_cosymbol(op, grid, x, nu, lat, 0.15);
  for (int p = 0; p < lat.size(); ++p) {
    const double expect = p == lat.half_points ? 2.0 / h : 0.0;
    CHECK(std::abs(rec.samples[p](0, 0) - expect) < 0.02 / h);
  }
}

TEST_CASE("recovery roundtrip improves as the cut-off shrinks") {
  const int n = 256;
  geo::ManifoldGrid grid = circle(n);
  NuCutoff nu{grid.ball_radius()};
  sym::Symbol s = sym::make_symbol("winding_w", 1);
  sym::Cosymbol cos = cosymbol_of(s, grid, nu);
  opint::PartitionOfUnity pou = opint::build_partition(
      grid, uniform_centers(grid, 42), 0.16);
  QuantizeOptions opts;
  opts.epsilon = 0.6;
  CoarseOperator F = quantize(cos, grid, pou, nu, opts);
  Vec x = Vec::Zero(1);
  sym::CosymbolFiber truth = cos.fiber(x);
  double prev = 1e300;
  for (double cutoff : {0.2, 0.1}) {
    sym::CosymbolFiber rec =
        recover_cosymbol(F.mat, grid, x, nu, truth.lat, cutoff);
    double num = 0.0;
    for (int p = 0; p < truth.lat.size(); ++p)
      num += (rec.samples[p] - truth.samples[p]).squaredNorm();
    const double rel =
        std::sqrt(num * truth.lat.cell_volume()) / truth.l2_norm();
    CHECK(rel < prev + 1e-12);
    prev = rel;
  }
  CHECK(prev < 0.15);
  CHECK_THROWS_AS(recover_cosymbol(F.mat, grid, x, nu, truth.lat, 0.4),
                  CutoffTooWide);
}

TEST_CASE("compare_with_direct: constant symbol agrees immediately") {
  std::vector<std::tuple<int, double, double>> ladder = {{64, 0.2, 0.5}};
  auto levels =
      compare_with_direct(sym::make_symbol("constant"), ladder);
  CHECK(levels.size() == 1);
  CHECK(levels[0].defect < 1e-9);
}
