#include "coarsequant/acceptance.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "coarsequant/coarse.hpp"
#include "coarsequant/diagnostics.hpp"
#include "coarsequant/geometry.hpp"
#include "coarsequant/index.hpp"
#include "coarsequant/liegroup.hpp"
#include "coarsequant/linalg.hpp"
#include "coarsequant/opint.hpp"
#include "coarsequant/oracles.hpp"
#include "coarsequant/symbol.hpp"

namespace cq::accept {

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " FAIL{" << what << "}";
    }
  }
};

geo::ManifoldGrid circle_grid(int n) {
  geo::ManifoldSpec spec;
  spec.model = geo::Model::Circle;
  spec.n = n;
  return geo::ManifoldGrid(spec);
}

// ---- 1. Toeplitz index shadow ------------------------------------------

CriterionResult criterion_toeplitz_index(std::uint64_t) {
  CriterionResult res{1, "Toeplitz index = -w (n=512, |w|<=3, <=60s)"};
  Check c;
  const int n = 512;
  const auto t0 = Clock::now();
  for (int w = -3; w <= 3; ++w) {
    CMat a = idx::toeplitz_winding_operator(n, w);
    CMat p = idx::toeplitz_winding_parametrix(n, w);
    idx::IndexReport rep = idx::fredholm_index_calderon(a, p);
    rep.topological_index =
        idx::winding_number(sym::make_symbol("winding_w", w), 4096, 1.0);
    c.require(rep.rounded == -w,
              "w=" + std::to_string(w) + " rounded=" +
                  std::to_string(rep.rounded));
    c.require(rep.residual <= 0.01,
              "w=" + std::to_string(w) + " residual=" +
                  std::to_string(rep.residual));
    c.require(rep.topological_index == w,
              "w=" + std::to_string(w) + " winding oracle");
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  c.require(secs <= 60.0, "runtime " + std::to_string(secs) + "s");
  res.pass = c.pass;
  res.seconds = secs;
  res.detail = "7 windings in " + std::to_string(secs) + "s" +
               c.detail.str();
  return res;
}

// ---- 2. Lemma 2.6 norm bound -------------------------------------------

CriterionResult criterion_norm_bound(std::uint64_t seed) {
  CriterionResult res{2, "operator integral norm <= sup |F(x_i)| (50 fields)"};
  Check c;
  CounterRng rng(seed, 2);
  geo::ManifoldGrid grid = circle_grid(48);
  const int n = grid.size();
  std::vector<Vec> centers = coarse::uniform_centers(grid, 6);
  opint::PartitionOfUnity pou =
      opint::build_partition(grid, centers, 1.8);
  double worst_margin = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CMat> mats;
    double sup = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      CMat f = rng.cnormal_mat(n, n) / std::sqrt(static_cast<double>(n));
      sup = std::max(sup, op_norm(f));
      mats.push_back(std::move(f));
    }
    opint::OperatorField field;
    field.eval = [&](const Vec& x) {
      for (std::size_t i = 0; i < centers.size(); ++i)
        if ((x - centers[i]).norm() < 1e-12) return mats[i];
      throw HypothesisViolated("field probed off-center");
    };
    const double nrm = op_norm(opint::operator_integral(field, pou));
    worst_margin = std::max(worst_margin, nrm - sup);
    c.require(nrm <= sup + 1e-12, "trial " + std::to_string(trial));
  }
  res.pass = c.pass;
  res.detail = "worst (norm - sup) = " + std::to_string(worst_margin) +
               c.detail.str();
  return res;
}

// ---- 3. scalar fields -> multiplication operators ------------------------

CriterionResult criterion_scalar_multiplication(std::uint64_t) {
  CriterionResult res{3, "scalar fields quantize to multiplication operators"};
  Check c;
  geo::ManifoldGrid grid = circle_grid(64);
  const int n = grid.size();
  opint::PartitionOfUnity pou =
      opint::build_partition(grid, coarse::uniform_centers(grid, 8), 1.2);
  auto f = [](const Vec& x) {
    return std::exp(cplx(0.0, 2.0 * std::sin(x[0]))) *
           (1.0 + 0.3 * std::cos(x[0]));
  };
  opint::OperatorField field;
  field.eval = [&](const Vec& x) {
    return CMat(f(x) * CMat::Identity(n, n));
  };
  CMat integral = opint::operator_integral(field, pou);
  double offdiag = 0.0, diag_err = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx expected = 0.0;
    for (std::size_t b = 0; b < pou.alphas.size(); ++b)
      expected += pou.alphas[b][i] * pou.alphas[b][i] *
                  f(pou.cover[b].center);
    diag_err = std::max(diag_err, std::abs(integral(i, i) - expected));
    for (int j = 0; j < n; ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(integral(i, j)));
  }
  c.require(offdiag <= 1e-12, "off-diagonal " + std::to_string(offdiag));
  c.require(diag_err <= 1e-12, "diagonal " + std::to_string(diag_err));
  // constant scalar field reproduces the constant exactly
  opint::OperatorField cfield;
  cfield.eval = [&](const Vec&) {
    return CMat(cplx(0.7, -0.2) * CMat::Identity(n, n));
  };
  CMat ci = opint::operator_integral(cfield, pou);
  c.require(max_abs(ci - cplx(0.7, -0.2) * CMat::Identity(n, n)) <= 1e-12,
            "constant field");
  res.pass = c.pass;
  res.detail = "offdiag=" + std::to_string(offdiag) +
               " diag_err=" + std::to_string(diag_err) + c.detail.str();
  return res;
}

// ---- 4. epsilon-covering stability ---------------------------------------

CriterionResult criterion_epsilon_stability(std::uint64_t) {
  CriterionResult res{4, "eps-partition stability <= 2 eps + eta (halving)"};
  Check c;
  const std::vector<std::pair<double, int>> ladder = {
      {0.2, 128}, {0.1, 256}, {0.05, 512}};
  std::ostringstream detail;
  double eta_budget = 0.12;  // pinned at n = 128, halves per doubling
  for (auto [eps, n] : ladder) {
    geo::ManifoldGrid grid = circle_grid(n);
    coarse::NuCutoff nu{grid.ball_radius()};
    auto cos = std::make_shared<const sym::Cosymbol>(
        coarse::cosymbol_of(sym::make_symbol("winding_w", 1), grid, nu));
    opint::OperatorField field = coarse::transplant_field(grid, cos, nu);
    opint::EpsilonCover cover = opint::epsilon_cover(grid, field, eps);
    opint::PartitionOfUnity pou1 =
        opint::build_partition(grid, cover.centers, cover.radius);
    // independent second partition: one more ball, phase shifted
    const int k2 = static_cast<int>(cover.centers.size()) + 1;
    std::vector<Vec> centers2;
    for (int i = 0; i < k2; ++i) {
      Vec x(1);
      x[0] = grid.period(0) * (i + 0.37) / k2;
      centers2.push_back(x);
    }
    opint::PartitionOfUnity pou2 =
        opint::build_partition(grid, centers2, cover.radius);
    const double defect = opint::integral_stability(field, pou1, pou2);
    detail << " (eps=" << eps << ",n=" << n << ",defect=" << defect
           << ",budget=" << 2 * eps + eta_budget << ")";
    c.require(defect <= 2 * eps + eta_budget,
              "defect at n=" + std::to_string(n));
    eta_budget /= 2.0;
  }
  res.pass = c.pass;
  res.detail = detail.str() + c.detail.str();
  return res;
}

// ---- 5. distortion certificate -------------------------------------------

CriterionResult criterion_distortion(std::uint64_t seed) {
  CriterionResult res{5, "Jacobi distortion <= |q||p|^2 c^2 e; flat exact"};
  Check c;
  CounterRng rng(seed, 5);
  geo::ManifoldSpec pspec;
  pspec.model = geo::Model::TorusConformal;
  pspec.n = 16;
  pspec.conformal_amplitude = 0.1;
  geo::ManifoldGrid perturbed(pspec);
  const double bound_c = perturbed.effective_bound();
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vec x(2);
    x << rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi);
    const double ang = rng.uniform(0, 2 * kPi);
    const double pn = rng.uniform(0.02, 1.0 / bound_c);
    Vec p(2);
    p << pn * std::cos(ang), pn * std::sin(ang);
    Vec q(2);
    const double qa = rng.uniform(0, 2 * kPi);
    q << std::cos(qa), std::sin(qa);
    geo::GeodesicProblem prob;
    prob.base = x;
    prob.direction = p;
    prob.variation = q;
    Vec w1 = geo::solve_jacobi(prob,
                               geo::jacobi_coefficients(perturbed, x, p)).w1;
    const double bound =
        q.norm() * pn * pn * bound_c * bound_c * std::exp(1.0);
    const double dist = (w1 - q).norm();
    worst_ratio = std::max(worst_ratio, dist / bound);
    c.require(dist <= bound + 1e-12, "trial " + std::to_string(trial));
  }
  // flat model: distortion at machine precision
  geo::ManifoldSpec fspec;
  fspec.model = geo::Model::Torus;
  fspec.n = 16;
  geo::ManifoldGrid flat(fspec);
  double flat_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(2);
    x << rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi);
    Vec p = 0.5 * rng.normal_vec(2).normalized();
    Vec q = rng.normal_vec(2).normalized();
    geo::GeodesicProblem prob;
    prob.base = x;
    prob.direction = p;
    prob.variation = q;
    Vec w1 = geo::solve_jacobi(prob, geo::jacobi_coefficients(flat, x, p)).w1;
    flat_worst = std::max(flat_worst, (w1 - q).norm());
  }
  c.require(flat_worst <= 1e-13, "flat distortion " +
                                     std::to_string(flat_worst));
  res.pass = c.pass;
  res.detail = "worst dist/bound = " + std::to_string(worst_ratio) +
               ", flat = " + std::to_string(flat_worst) + c.detail.str();
  return res;
}

// ---- 6. sphere Jacobi oracle ----------------------------------------------

CriterionResult criterion_sphere_jacobi(std::uint64_t) {
  CriterionResult res{6, "sphere Jacobi field = sin(t)/t (1e-6 vs RK4)"};
  Check c;
  std::ostringstream detail;
  for (double t : {0.1, 0.3, 0.5}) {
    Vec p(2), q(2);
    p << t, 0.0;
    q << 0.0, 1.0;
    Mat proj = Mat::Identity(2, 2) - (p / t) * (p / t).transpose();
    auto B = [t, proj](double) { return Mat(t * t * proj); };
    geo::GeodesicProblem prob;
    prob.base = Vec::Zero(2);
    prob.direction = p;
    prob.variation = q;
    prob.steps = 512;
    geo::JacobiCoefficients coeffs;
    coeffs.B = B;
    coeffs.c = 1.0;
    const double got = geo::solve_jacobi(prob, coeffs).w1.norm();
    const double expected = std::sin(t) / t;
    const double rk4 = oracle::jacobi_rk4(nullptr, B, q).norm();
    detail << " t=" << t << ": |W|=" << got << " sin(t)/t=" << expected;
    c.require(std::abs(got - expected) <= 1e-6,
              "vs closed form at t=" + std::to_string(t));
    c.require(std::abs(got - rk4) <= 1e-6,
              "vs RK4 oracle at t=" + std::to_string(t));
    c.require(std::abs(rk4 - expected) <= 1e-7, "oracle sanity");
  }
  res.pass = c.pass;
  res.detail = detail.str() + c.detail.str();
  return res;
}

// ---- 7. coarse vs direct quantization ------------------------------------

CriterionResult criterion_compare_direct(std::uint64_t) {
  CriterionResult res{7, "coarse vs Kohn-Nirenberg defect ladder"};
  Check c;
  std::ostringstream detail;
  const std::vector<std::tuple<int, double, double>> ladder = {
      {128, 0.20, 0.60}, {256, 0.09, 0.30}, {512, 0.04, 0.15}};
  for (const std::string& name : {std::string("dirac1d"),
                                  std::string("winding_w")}) {
    sym::Symbol s = sym::make_symbol(name, 1);
    std::vector<coarse::CompareLevel> levels =
        coarse::compare_with_direct(s, ladder);
    const double sup = levels.back().sigma_sup;
    const double floor_val = 1e-6 * sup;
    detail << " " << s.name << ":";
    for (const auto& lev : levels) detail << " " << lev.defect;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
      const bool at_floor = levels[i].defect <= floor_val &&
                            levels[i + 1].defect <= floor_val;
      c.require(at_floor ||
                    levels[i + 1].defect * 2.0 <= levels[i].defect + 1e-14,
                s.name + " shrink level " + std::to_string(i));
    }
    c.require(levels.back().defect <= 0.05 * sup, s.name + " final defect");
  }
  res.pass = c.pass;
  res.detail = detail.str() + c.detail.str();
  return res;
}

// ---- 8. recovery roundtrip -------------------------------------------------

CriterionResult criterion_recovery(std::uint64_t) {
  CriterionResult res{8, "cosymbol recovery error shrinks with the cut-off"};
  Check c;
  const int n = 512;
  geo::ManifoldGrid grid = circle_grid(n);
  coarse::NuCutoff nu{grid.ball_radius()};
  sym::Symbol s = sym::make_symbol("winding_w", 1);
  sym::Cosymbol cos = coarse::cosymbol_of(s, grid, nu);
  const double radius = 0.12;
  const int count = static_cast<int>(std::ceil(grid.period(0) / radius));
  opint::PartitionOfUnity pou = opint::build_partition(
      grid, coarse::uniform_centers(grid, count), radius);
  coarse::QuantizeOptions qopts;
  qopts.epsilon = 0.5;
  coarse::CoarseOperator F = coarse::quantize(cos, grid, pou, nu, qopts);

  Vec x = Vec::Zero(1);
  sym::CosymbolFiber truth = cos.fiber(x);
  std::vector<double> errors;
  std::ostringstream detail;
  for (double cutoff : {0.2, 0.1, 0.05}) {
    sym::CosymbolFiber rec =
        coarse::recover_cosymbol(F.mat, grid, x, nu, truth.lat, cutoff);
    double num = 0.0;
    for (int i = 0; i < truth.lat.size(); ++i)
      num += (rec.samples[i] - truth.samples[i]).squaredNorm();
    const double rel = std::sqrt(num * truth.lat.cell_volume()) /
                       truth.l2_norm();
    errors.push_back(rel);
    detail << " cutoff=" << cutoff << ": rel=" << rel;
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    c.require(errors[i + 1] <= errors[i] + 1e-12,
              "monotone at level " + std::to_string(i));
  c.require(errors.back() <= 0.1, "final error");
  res.pass = c.pass;
  res.detail = detail.str() + c.detail.str();
  return res;
}

// ---- 9. resolvent integral identity ---------------------------------------

CriterionResult criterion_resolvent(std::uint64_t seed) {
  CriterionResult res{9, "bounded transform = resolvent integral (1e-8)"};
  Check c;
  CounterRng rng(seed, 9);
  double worst = 0.0, spec_max = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CMat g = rng.cnormal_mat(50, 50);
    CMat d = (g + g.adjoint()) / 2.0;
    const double defect = idx::resolvent_integral_check(d);
    worst = std::max(worst, defect);
    c.require(defect <= 1e-8, "trial " + std::to_string(trial));
    Eigen::SelfAdjointEigenSolver<CMat> es(idx::bounded_transform(d));
    const double m = es.eigenvalues().cwiseAbs().maxCoeff();
    spec_max = std::max(spec_max, m);
    c.require(m < 1.0, "spectrum trial " + std::to_string(trial));
  }
  res.pass = c.pass;
  res.detail = "worst defect = " + std::to_string(worst) +
               ", max |spec| = " + std::to_string(spec_max) + c.detail.str();
  return res;
}

// ---- 10. pseudolocality proxy suite ---------------------------------------

CriterionResult criterion_pseudolocality(std::uint64_t) {
  CriterionResult res{10, "commutator compactness proxy (catalog + control)"};
  Check c;
  std::ostringstream detail;
  const std::vector<int> ns = {128, 256, 512};
  auto multiplier_for = [&](const sym::Symbol& s, const geo::ManifoldGrid& g,
                            bool x_dependent) {
    if (x_dependent) return coarse::kohn_nirenberg(g, s);
    const int n = g.spec().n;
    CVec m(n);
    for (int r = 0; r < n; ++r) {
      Vec xi(1);
      xi[0] = dft_frequency(r, n);
      m[r] = s.eval(Vec::Zero(1), xi)(0, 0);
    }
    return fourier_multiplier(m);
  };

  struct Entry {
    std::string name;
    bool x_dependent;
    bool must_pass;
  };
  const std::vector<Entry> entries = {{"constant", false, true},
                                      {"dirac1d", false, true},
                                      {"winding_w", true, true}};
  for (const Entry& e : entries) {
    sym::Symbol s = sym::make_symbol(e.name, 1);
    std::vector<diag::CompactnessReport> ladder;
    for (int n : ns) {
      geo::ManifoldGrid g = circle_grid(n);
      CMat op = multiplier_for(s, g, e.x_dependent);
      Vec a(n);
      for (int i = 0; i < n; ++i) a[i] = std::sin(g.points()[i][0]);
      ladder.push_back(diag::commutator_report(op, a));
    }
    diag::ProxyVerdict v = diag::compactness_verdict(ladder);
    detail << " " << s.name << ":";
    for (double r : v.ladder_ratios) detail << " " << r;
    c.require(v.pass == e.must_pass, s.name + " proxy verdict");
  }
  {  // negative control: multiplier sin(xi) must fail
    std::vector<diag::CompactnessReport> ladder;
    for (int n : ns) {
      geo::ManifoldGrid g = circle_grid(n);
      CVec m(n);
      for (int r = 0; r < n; ++r)
        m[r] = std::sin(static_cast<double>(dft_frequency(r, n)));
      CMat op = fourier_multiplier(m);
      Vec a(n);
      for (int i = 0; i < n; ++i) a[i] = std::sin(g.points()[i][0]);
      ladder.push_back(diag::commutator_report(op, a));
    }
    diag::ProxyVerdict v = diag::compactness_verdict(ladder);
    detail << " sin(xi):";
    for (double r : v.ladder_ratios) detail << " " << r;
    c.require(!v.pass, "sin(xi) control must fail");
  }
  res.pass = c.pass;
  res.detail = detail.str() + c.detail.str();
  return res;
}

// ---- 11. averaging bound ---------------------------------------------------

CriterionResult criterion_averaging(std::uint64_t seed) {
  CriterionResult res{11, "averaging bound |Av(T)| <= |K| |T| (20 trials)"};
  Check c;
  CounterRng rng(seed, 11);
  lie::ProperActionScene scene = lie::make_scene(96, 0.1, 5, 12);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int width = 4 + static_cast<int>(rng.uniform() * 26);
    const int lo = 8 + static_cast<int>(rng.uniform() *
                                        (96 - width - 16));
    CMat t = CMat::Zero(96, 96);
    t.block(lo, lo, width, width) = rng.cnormal_mat(width, width);
    lie::AverageResult avg = lie::group_average(scene, t);
    const double lhs = op_norm(avg.mat);
    const double rhs = avg.effective_translates * op_norm(t);
    worst = std::max(worst, lhs - rhs);
    c.require(lhs <= rhs + 1e-12, "trial " + std::to_string(trial));
  }
  res.pass = c.pass;
  res.detail = "worst (|Av| - |K||T|) = " + std::to_string(worst) +
               c.detail.str();
  return res;
}

// ---- 12. BCH / zoom algebra -----------------------------------------------

CriterionResult criterion_bch_zoom(std::uint64_t seed) {
  CriterionResult res{12, "BCH associativity + zoom automorphism (1e-12)"};
  Check c;
  CounterRng rng(seed, 12);
  lie::GradedAlgebra h3 = lie::heisenberg_algebra();
  double assoc = 0.0, autom = 0.0, comp = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec x(3), y(3), z(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = rng.uniform(-1, 1);
      y[i] = rng.uniform(-1, 1);
      z[i] = rng.uniform(-1, 1);
    }
    Vec a = lie::bch_multiply(h3, lie::bch_multiply(h3, x, y), z);
    Vec b = lie::bch_multiply(h3, x, lie::bch_multiply(h3, y, z));
    assoc = std::max(assoc, (a - b).cwiseAbs().maxCoeff());
    const double lam = rng.uniform(0.5, 2.0), mu = rng.uniform(0.5, 2.0);
    Vec lhs = lie::zoom(h3, lam, lie::bch_multiply(h3, x, y));
    Vec rhs = lie::bch_multiply(h3, lie::zoom(h3, lam, x),
                                lie::zoom(h3, lam, y));
    autom = std::max(autom, (lhs - rhs).cwiseAbs().maxCoeff());
    Vec c1 = lie::zoom(h3, lam, lie::zoom(h3, mu, x));
    Vec c2 = lie::zoom(h3, lam * mu, x);
    comp = std::max(comp, (c1 - c2).cwiseAbs().maxCoeff());
  }
  c.require(assoc <= 1e-12, "associativity " + std::to_string(assoc));
  c.require(autom <= 1e-12, "automorphism " + std::to_string(autom));
  c.require(comp <= 1e-12, "composition " + std::to_string(comp));
  res.pass = c.pass;
  res.detail = "assoc=" + std::to_string(assoc) +
               " autom=" + std::to_string(autom) +
               " comp=" + std::to_string(comp) + c.detail.str();
  return res;
}

}  // namespace

std::vector<CriterionResult> run_all(std::uint64_t seed, std::ostream& os) {
  using Fn = CriterionResult (*)(std::uint64_t);
  const Fn criteria[] = {
      criterion_toeplitz_index,  criterion_norm_bound,
      criterion_scalar_multiplication, criterion_epsilon_stability,
      criterion_distortion,      criterion_sphere_jacobi,
      criterion_compare_direct,  criterion_recovery,
      criterion_resolvent,       criterion_pseudolocality,
      criterion_averaging,       criterion_bch_zoom};
  std::vector<CriterionResult> results;
  for (Fn fn : criteria) {
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = fn(seed);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
      r.id = static_cast<int>(results.size()) + 1;
      r.name = "criterion";
    }
    if (r.seconds == 0.0)
      r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << " — "
       << r.detail << "\n";
    os.flush();
    results.push_back(std::move(r));
  }
  return results;
}

bool all_pass(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace cq::accept
