#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "coarsequant/common.hpp"
#include "coarsequant/linalg.hpp"

using namespace cq;

TEST_CASE("counter rng is deterministic and stable across streams") {
  CounterRng a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va >= 0.0);
    CHECK(va < 1.0);
  }
  CHECK(CounterRng(42, 1).uniform() != c.uniform());
}

TEST_CASE("normal draws have sane moments") {
  CounterRng rng(7, 3);
  double sum = 0, sum2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("smoothstep5 endpoints and smoothness") {
  CHECK(smoothstep5(0.0) == 0.0);
  CHECK(smoothstep5(1.0) == 1.0);
  CHECK(smoothstep5(0.5) == doctest::Approx(0.5));
  // C^2: one-sided difference quotients at the ends vanish
  const double h = 1e-4;
  CHECK(std::abs(smoothstep5(h) / h) < 1e-6);
  CHECK(std::abs((smoothstep5(1.0) - smoothstep5(1.0 - h)) / h) < 1e-6);
}

TEST_CASE("pairwise accumulation matches plain summation") {
  CounterRng rng(3, 4);
  std::vector<CMat> terms;
  CMat direct = CMat::Zero(5, 5);
  PairwiseAccumulator acc;
  for (int i = 0; i < 13; ++i) {
    CMat t = rng.cnormal_mat(5, 5);
    direct += t;
    terms.push_back(t);
    acc.add(t);
  }
  CHECK(max_abs(pairwise_sum(terms) - direct) < 1e-12);
  CHECK(max_abs(acc.result() - direct) < 1e-12);
}

TEST_CASE("cumulative integral is 4th order") {
  auto run = [](int steps) {
    std::vector<Vec> f(steps + 1);
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      f[i] = Vec::Constant(1, std::exp(t));
    }
    auto F = cumulative_integral(f, 1.0 / steps);
    return std::abs(F[steps][0] - (std::exp(1.0) - 1.0));
  };
  const double e64 = run(64), e128 = run(128);
  CHECK(e64 < 1e-7);
  CHECK(e128 * 12.0 < e64);  // ~16x per doubling
}

TEST_CASE("rank truncated norm equals tail singular value") {
  CounterRng rng(9, 5);
  CMat a = rng.cnormal_mat(20, 20);
  Vec s = singular_values(a);
  CHECK(rank_truncated_norm(a, 3) == doctest::Approx(s[3]));
  CHECK(rank_truncated_norm(a, 25) == 0.0);
  CHECK(op_norm(a) == doctest::Approx(s[0]));
  CHECK(op_norm_estimate(a) <= s[0] + 1e-9);
  CHECK(op_norm_estimate(a) >= s[0] * 0.999);
}

TEST_CASE("dft matrix is unitary and multipliers diagonalize") {
  const int n = 16;
  const CMat& f = dft_matrix(n);
  CHECK(max_abs(f * f.adjoint() - CMat::Identity(n, n)) < 1e-12);
  CVec m(n);
  for (int r = 0; r < n; ++r) m[r] = cplx(dft_frequency(r, n), 0.5);
  CMat op = fourier_multiplier(m);
  // applying to a pure mode scales it by the multiplier value
  for (int r : {3, 8, 12}) {
    CVec mode = f.row(r).adjoint();
    CHECK((op * mode - m[r] * mode).norm() < 1e-10);
  }
}
