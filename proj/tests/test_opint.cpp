#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "coarsequant/coarse.hpp"
#include "coarsequant/linalg.hpp"
#include "coarsequant/opint.hpp"

using namespace cq;
using namespace cq::opint;

namespace {
geo::ManifoldGrid circle(int n) {
  geo::ManifoldSpec spec;
  spec.model = geo::Model::Circle;
  spec.n = n;
  return geo::ManifoldGrid(spec);
}
}  // namespace

TEST_CASE("partition of unity: normalization, support, overlap") {
  geo::ManifoldGrid grid = circle(96);
  SUBCASE("single ball covering everything gives alpha = 1") {
    PartitionOfUnity pou =
        build_partition(grid, {Vec::Zero(1)}, kPi + 0.1);
    for (int i = 0; i < grid.size(); ++i)
      CHECK(pou.alphas[0][i] == doctest::Approx(1.0));
  }
  SUBCASE("two half-overlapping balls normalize exactly") {
    Vec c2(1);
    c2[0] = kPi;
    PartitionOfUnity pou =
        build_partition(grid, {Vec::Zero(1), c2}, 0.75 * kPi);
    for (int i = 0; i < grid.size(); ++i) {
      double s = 0;
      for (const Vec& a : pou.alphas) s += a[i] * a[i];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("random 12-ball cover of the circle has bounded overlap") {
    CounterRng rng(21, 1);
    std::vector<Vec> centers;
    for (int i = 0; i < 12; ++i) {
      Vec c(1);
      c[0] = 2 * kPi * (i + 0.3 * rng.uniform()) / 12;
      centers.push_back(c);
    }
    PartitionOfUnity pou = build_partition(grid, centers, 0.8);
    CHECK(pou.max_overlap <= 4);
    for (int i = 0; i < grid.size(); ++i) {
      double s = 0;
      for (const Vec& a : pou.alphas) s += a[i] * a[i];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("uncovered point throws") {
    CHECK_THROWS_AS(build_partition(grid, {Vec::Zero(1)}, 0.5),
                    UncoveredPoint);
  }
}

TEST_CASE("epsilon cover: constant field, Lipschitz field, eps = 0") {
  geo::ManifoldGrid grid = circle(128);
  OperatorField constant;
  constant.eval = [&](const Vec&) {
    return CMat(CMat::Identity(grid.size(), grid.size()));
  };
  EpsilonCover cc = epsilon_cover(grid, constant, 0.05);
  CHECK(cc.radius == doctest::Approx(kPi / 2));  // largest candidate radius
  CHECK(cc.measured_modulus == 0.0);

  // Lipschitz field f(x) I with |f' | ~ 1
  OperatorField lip;
  lip.eval = [&](const Vec& x) {
    return CMat(cplx(std::sin(x[0]), 0.0) *
                CMat::Identity(grid.size(), grid.size()));
  };
  EpsilonCover cl = epsilon_cover(grid, lip, 0.2);
  CHECK(cl.radius <= 0.2);  // omega(2r) ~ 2r <= eps
  CHECK(cl.measured_modulus <= 0.2);
  // the centers at that radius really cover
  build_partition(grid, cl.centers, cl.radius);

  CHECK_THROWS_AS(epsilon_cover(grid, lip, 0.0), EpsilonTooSmall);
  CHECK_THROWS_AS(epsilon_cover(grid, lip, 1e-6), EpsilonTooSmall);
}

TEST_CASE("operator integral: norm bound, adjoint, scalar fields") {
  geo::ManifoldGrid grid = circle(48);
  const int n = grid.size();
  PartitionOfUnity pou =
      build_partition(grid, coarse::uniform_centers(grid, 6), 1.4);
  CounterRng rng(31, 2);
  std::vector<CMat> mats;
  std::vector<Vec> centers;
  for (const auto& ball : pou.cover) centers.push_back(ball.center);
  for (std::size_t i = 0; i < centers.size(); ++i)
    mats.push_back(rng.cnormal_mat(n, n));
  OperatorField field;
  field.eval = [&](const Vec& x) {
    for (std::size_t i = 0; i < centers.size(); ++i)
      if ((x - centers[i]).norm() < 1e-12) return mats[i];
    throw HypothesisViolated("probed off-center");
  };
  CMat integral = operator_integral(field, pou);
  double sup = 0;
  for (const CMat& m : mats) sup = std::max(sup, op_norm(m));
  CHECK(op_norm(integral) <= sup + 1e-12);

  // termwise adjoint: integral of F* equals the adjoint of the integral
  OperatorField adj;
  adj.eval = [&](const Vec& x) { return CMat(field.eval(x).adjoint()); };
  CHECK(max_abs(operator_integral(adj, pou) - integral.adjoint()) < 1e-13);
}

TEST_CASE("integral stability: identical partitions give zero defect") {
  geo::ManifoldGrid grid = circle(64);
  PartitionOfUnity pou =
      build_partition(grid, coarse::uniform_centers(grid, 8), 1.1);
  OperatorField field;
  field.eval = [&](const Vec& x) {
    return CMat(cplx(std::cos(x[0]), 0.1) *
                CMat::Identity(grid.size(), grid.size()));
  };
  CHECK(integral_stability(field, pou, pou) == doctest::Approx(0.0));
}

TEST_CASE("refinement partition alpha_i beta_j changes nothing") {
  // gamma_{ij} = alpha_i beta_j keeps sum gamma^2 = 1; with the same frozen
  // points the sum is reproduced exactly for multiplication fields and
  // modulo compacts for pseudolocal fields
  geo::ManifoldGrid grid = circle(128);
  const int n = grid.size();
  PartitionOfUnity pa =
      build_partition(grid, coarse::uniform_centers(grid, 6), 1.4);
  PartitionOfUnity pb =
      build_partition(grid, coarse::uniform_centers(grid, 9, 0.5), 1.0);

  auto refined_minus_direct = [&](auto field_at) {
    CMat direct = CMat::Zero(n, n);
    for (std::size_t i = 0; i < pa.cover.size(); ++i) {
      CVec a = pa.alphas[i].cast<cplx>();
      direct += CMat(a.asDiagonal() * field_at(pa.cover[i].center) *
                     a.asDiagonal());
    }
    CMat refined = CMat::Zero(n, n);
    for (std::size_t i = 0; i < pa.cover.size(); ++i)
      for (std::size_t j = 0; j < pb.cover.size(); ++j) {
        CVec g = (pa.alphas[i].cwiseProduct(pb.alphas[j])).cast<cplx>();
        refined += CMat(g.asDiagonal() * field_at(pa.cover[i].center) *
                        g.asDiagonal());
      }
    return CMat(refined - direct);
  };

  // multiplication field: the sums telescope exactly
  auto mult_field = [&](const Vec& x) {
    return CMat(cplx(std::sin(x[0]), 0.4) * CMat::Identity(n, n));
  };
  CHECK(max_abs(refined_minus_direct(mult_field)) < 1e-12);

  // pseudolocal multiplier field: equality holds modulo compacts
  CVec m(n);
  for (int r = 0; r < n; ++r) {
    const double k = dft_frequency(r, n);
    m[r] = k / std::sqrt(1.0 + k * k);
  }
  CMat mult = fourier_multiplier(m);
  auto dirac_field = [&](const Vec& x) {
    return CMat(cplx(1.0 + 0.3 * std::sin(x[0]), 0.0) * mult);
  };
  CMat diff = refined_minus_direct(dirac_field);
  CHECK(rank_truncated_norm(diff, truncation_rank(n)) <
        0.05 * op_norm_estimate(mult));
}

TEST_CASE("vanishing fields integrate to zero") {
  // F(x) kills everything supported near x: localized integral vanishes
  geo::ManifoldGrid grid = circle(64);
  const int n = grid.size();
  PartitionOfUnity pou =
      build_partition(grid, coarse::uniform_centers(grid, 8), 1.1);
  OperatorField field;
  field.eval = [&](const Vec& x) {
    Vec off(n);
    for (int i = 0; i < n; ++i)
      off[i] = grid.chart_distance(x, grid.points()[i]) > 1.2 ? 1.0 : 0.0;
    return CMat(off.cast<cplx>().asDiagonal());
  };
  CMat integral = operator_integral(field, pou);
  CHECK(max_abs(integral) < 1e-14);
}

TEST_CASE("multiplicativity defect shrinks under refinement") {
  geo::ManifoldGrid grid = circle(128);
  // scalar amplitudes times a pseudolocal multiplier; multiplicativity is
  // exact for plain scalars, this version has the mod-compact defect
  auto defect_at = [&](const geo::ManifoldGrid& g, int balls, double radius) {
    const int nn = g.size();
    CVec mm(nn);
    for (int r = 0; r < nn; ++r) {
      const int k = dft_frequency(r, nn);
      mm[r] = k / std::sqrt(1.0 + k * k);
    }
    CMat mg = fourier_multiplier(mm);
    PartitionOfUnity pou =
        build_partition(g, coarse::uniform_centers(g, balls), radius);
    OperatorField fa{[&](const Vec& x) {
                       return CMat(cplx(std::sin(x[0]), 0.0) * mg);
                     },
                     1,
                     {}};
    OperatorField fb{[&](const Vec& x) {
                       return CMat(cplx(std::cos(x[0]), 0.2) * mg);
                     },
                     1,
                     {}};
    OperatorField fab{[&](const Vec& x) {
                        return CMat(cplx(std::sin(x[0]), 0.0) *
                                    cplx(std::cos(x[0]), 0.2) * mg * mg);
                      },
                      1,
                      {}};
    CMat lhs = operator_integral(fab, pou);
    CMat rhs = operator_integral(fa, pou) * operator_integral(fb, pou);
    return rank_truncated_norm(lhs - rhs, truncation_rank(nn));
  };
  // eta(grid): fixed partition, doubled grid -> truncated defect shrinks
  const double d128 = defect_at(grid, 12, 0.8);
  const double d256 = defect_at(circle(256), 12, 0.8);
  CHECK(d256 < 0.8 * d128);
}

TEST_CASE("support sets: diagonal, shift, proper support of integrals") {
  geo::ManifoldGrid grid = circle(64);
  const int n = grid.size();
  CounterRng rng(51, 4);

  CMat diag = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) diag(i, i) = rng.cnormal();
  SupportSet sd = support_of(diag);
  CHECK(within_diagonal_band(sd, 0));
  CHECK(properly_supported(sd, 1));

  // multiplication operators are supported on the diagonal
  SupportSet sm = support_of(CMat(CVec::Constant(n, cplx(2.0)).asDiagonal()));
  CHECK(within_diagonal_band(sm, 0));

  CMat shift = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) shift((i + n / 4) % n, i) = 1.0;
  SupportSet ss = support_of(shift);
  CHECK_FALSE(within_diagonal_band(ss, 1));
  // every support cell sits on the shifted diagonal
  const int cells = ss.n_cells;
  for (auto [ci, cj] : ss.cells) {
    const int d = ((ci - cj - cells / 4) % cells + cells) % cells;
    CHECK((d <= 1 || d >= cells - 1));
  }

  // far off-diagonal rank one: support far from the diagonal
  CMat r1 = CMat::Zero(n, n);
  r1(3, n / 2) = 5.0;
  CHECK_FALSE(within_diagonal_band(support_of(r1), 2));

  // integral sums are properly supported inside the partition squares
  PartitionOfUnity pou =
      build_partition(grid, coarse::uniform_centers(grid, 8), 1.1);
  OperatorField field;
  field.eval = [&](const Vec&) { return CMat(rng.cnormal_mat(n, n)); };
  CMat integral = operator_integral(field, pou);
  SupportSet si = support_of(integral, 1e-10);
  std::vector<std::pair<int, int>> allowed;
  const int per = (n + si.n_cells - 1) / si.n_cells;
  for (std::size_t b = 0; b < pou.cover.size(); ++b) {
    std::vector<int> touched;
    for (int i = 0; i < n; ++i)
      if (pou.alphas[b][i] > 0) touched.push_back(i / per);
    for (int ci : touched)
      for (int cj : touched) allowed.emplace_back(ci, cj);
  }
  CHECK(subset_within(si, allowed, 0));
}

TEST_CASE("diagonal commutation check against support verdicts") {
  const int n = 128;
  geo::ManifoldGrid grid = circle(n);
  std::vector<Vec> funcs;
  Vec a(n);
  for (int i = 0; i < n; ++i) a[i] = std::sin(grid.points()[i][0]);
  funcs.push_back(a);

  // multiplication operator: zero commutators, diagonal support
  CMat mult = CVec::Constant(n, cplx(1.5, 0.5)).asDiagonal();
  CommutationReport rm = diagonal_commutation_check(mult, funcs);
  CHECK(rm.worst_tail_ratio == doctest::Approx(0.0));
  CHECK(rm.diagonal_support);
  CHECK(rm.consistent);

  // circulant smoothing kernel of width w: commutator norm O(w/n) by the
  // explicit kernel bound sum_d |k(d)| |a(i) - a(i-d)|
  CMat smooth = CMat::Zero(n, n);
  double kernel_bound = 0.0;
  for (int d = -2; d <= 2; ++d)
    kernel_bound += std::exp(-d * d) * std::abs(d) * (2 * kPi / n);
  for (int i = 0; i < n; ++i)
    for (int d = -2; d <= 2; ++d)
      smooth(i, (i + d + n) % n) = std::exp(-d * d);
  CMat comm = smooth * a.cast<cplx>().asDiagonal().toDenseMatrix() -
              a.cast<cplx>().asDiagonal().toDenseMatrix() * smooth;
  CHECK(op_norm(comm) <= kernel_bound + 1e-12);
  CHECK(op_norm(comm) > 0.0);

  // far off-diagonal rank-1: large commutator, non-diagonal support
  CMat bad = CMat::Zero(n, n);
  bad(0, n / 2) = 4.0;
  CommutationReport rb = diagonal_commutation_check(bad, funcs);
  CHECK_FALSE(rb.diagonal_support);
  CHECK(rb.worst_tail_ratio == doctest::Approx(0.0));  // rank 1 tail
}

TEST_CASE("functoriality under the double cover of the circle") {
  // h: Y -> X doubles the angle; integrating F over X with pulled-back
  // multiplications equals integrating F o h over Y, up to compacts
  auto defect_at = [&](int ny, int balls) {
    geo::ManifoldGrid Y = circle(ny);
    const int n = Y.size();
    CVec m(n);
    for (int r = 0; r < n; ++r) {
      const int k = dft_frequency(r, n);
      m[r] = k / std::sqrt(4.0 + k * k);
    }
    CMat mult = fourier_multiplier(m);
    auto F_of = [&](double xangle) {
      return CMat(cplx(1.0 + 0.5 * std::cos(xangle), 0.0) * mult);
    };
    // partition on X pulled back to Y (alpha o h), frozen at x_i
    std::vector<Vec> xcenters = coarse::uniform_centers(circle(64), balls);
    const double radius = 1.2 * 2 * kPi / balls;
    CMat intX = CMat::Zero(n, n);
    {
      std::vector<Vec> alphas;
      Vec norm2 = Vec::Zero(n);
      for (const Vec& c : xcenters) {
        Vec b(n);
        for (int i = 0; i < n; ++i) {
          const double hx = std::fmod(2.0 * Y.points()[i][0], 2 * kPi);
          double d = std::abs(hx - c[0]);
          d = std::min(d, 2 * kPi - d);
          b[i] = d < radius ? smoothstep5(1.0 - d / radius) : 0.0;
        }
        alphas.push_back(b);
        norm2 += b.cwiseProduct(b);
      }
      for (std::size_t bi = 0; bi < alphas.size(); ++bi) {
        Vec al = alphas[bi].cwiseQuotient(norm2.cwiseSqrt());
        CVec ac = al.cast<cplx>();
        intX += CMat(ac.asDiagonal() * F_of(xcenters[bi][0]) *
                     ac.asDiagonal());
      }
    }
    // partition on Y at matching scale, field F o h
    opint::PartitionOfUnity pouY = build_partition(
        Y, coarse::uniform_centers(Y, 2 * balls), radius / 2.0);
    OperatorField fieldY;
    fieldY.eval = [&](const Vec& y) {
      return F_of(std::fmod(2.0 * y[0], 2 * kPi));
    };
    CMat intY = operator_integral(fieldY, pouY);
    return rank_truncated_norm(intX - intY, truncation_rank(n));
  };
  const double coarse_defect = defect_at(128, 6);
  const double fine_defect = defect_at(256, 12);
  CHECK(fine_defect < 0.75 * coarse_defect + 1e-9);
}

TEST_CASE("decay at infinity gives uniformly convergent partial sums") {
  // R^3 model: fields vanishing at infinity have tails below tolerance
  geo::ManifoldSpec spec;
  spec.model = geo::Model::Heis3;
  spec.n = 6;
  spec.extent = 2.0;
  geo::ManifoldGrid grid(spec);
  const int n = grid.size();
  CounterRng rng(61, 5);
  CMat base = rng.cnormal_mat(n, n);
  base /= op_norm(base);
  // centers ordered outward; ball radius covers the box
  std::vector<std::pair<double, Vec>> centers;
  for (int i = 0; i < n; i += 9) {
    const Vec& p = grid.points()[i];
    centers.emplace_back(p.norm(), p);
  }
  std::sort(centers.begin(), centers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  auto F_of = [&](const Vec& x) {
    return CMat(std::exp(-x.squaredNorm()) * base);
  };
  // bumps without normalization: partial sums of alpha_i F alpha_i
  const double radius = 2.2;
  std::vector<CMat> partial;
  CMat acc = CMat::Zero(n, n);
  for (const auto& [r, c] : centers) {
    Vec b(n);
    for (int i = 0; i < n; ++i) {
      const double d = (grid.points()[i] - c).norm();
      b[i] = d < radius ? smoothstep5(1.0 - d / radius) : 0.0;
    }
    CVec bc = b.cast<cplx>();
    acc += CMat(bc.asDiagonal() * F_of(c) * bc.asDiagonal());
    partial.push_back(acc);
  }
  // tails decrease below tolerance
  const CMat& full = partial.back();
  double prev = 1e300;
  for (std::size_t k = partial.size() / 2; k < partial.size(); ++k) {
    const double tail = op_norm(full - partial[k]);
    CHECK(tail <= prev + 1e-12);
    prev = tail;
  }
  CHECK(prev == doctest::Approx(0.0));
  // the last added terms have norms controlled by sup |F| on the tail
  const double far_sup = std::exp(-centers[centers.size() / 2].first *
                                  centers[centers.size() / 2].first);
  CHECK(op_norm(full - partial[partial.size() / 2]) <=
        4.0 * 3.0 * far_sup + 1e-9);
}
