#include "coarsequant/liegroup.hpp"

#include <cmath>

#include "json.hpp"

namespace cq::lie {

Vec GradedAlgebra::bracket(const Vec& x, const Vec& y) const {
  Vec out = Vec::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < dim; ++j) {
      if (y[j] == 0.0) continue;
      out += x[i] * y[j] * brackets[i][j];
    }
  }
  return out;
}

int GradedAlgebra::homogeneous_dim() const {
  int q = 0;
  for (int w : weights) q += w;
  return q;
}

GradedAlgebra abelian_algebra(int dim) {
  GradedAlgebra alg;
  alg.dim = dim;
  alg.weights.assign(dim, 1);
  alg.brackets.assign(dim, std::vector<Vec>(dim, Vec::Zero(dim)));
  alg.step = 1;
  return alg;
}

GradedAlgebra heisenberg_algebra() {
  GradedAlgebra alg;
  alg.dim = 3;
  alg.weights = {1, 1, 2};
  alg.brackets.assign(3, std::vector<Vec>(3, Vec::Zero(3)));
  alg.brackets[0][1] = Vec::Unit(3, 2);   // [e1, e2] = e3
  alg.brackets[1][0] = -Vec::Unit(3, 2);
  alg.step = 2;
  return alg;
}

void validate_algebra(const GradedAlgebra& alg, double tol) {
  const int n = alg.dim;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if ((alg.brackets[i][j] + alg.brackets[j][i]).cwiseAbs().maxCoeff() >
          tol)
        throw HypothesisViolated("brackets not antisymmetric");
      for (int k = 0; k < n; ++k) {
        if (alg.brackets[i][j][k] != 0.0 &&
            alg.weights[i] + alg.weights[j] != alg.weights[k])
          throw HypothesisViolated("brackets do not respect the grading");
      }
    }
  // Jacobi identity on basis triples
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec ei = Vec::Unit(n, i), ej = Vec::Unit(n, j), ek = Vec::Unit(n, k);
        Vec jac = alg.bracket(ei, alg.bracket(ej, ek)) +
                  alg.bracket(ej, alg.bracket(ek, ei)) +
                  alg.bracket(ek, alg.bracket(ei, ej));
        if (jac.cwiseAbs().maxCoeff() > tol)
          throw HypothesisViolated("Jacobi identity fails");
      }
}

GradedAlgebra algebra_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("algebra stanza: ") + e.what());
  }
  const std::string type = j.value("type", "abelian");
  if (type == "abelian") return abelian_algebra(j.value("dim", 1));
  if (type == "heisenberg") return heisenberg_algebra();
  throw ConfigInvalid("unknown algebra type '" + type + "'");
}

Vec bch_multiply(const GradedAlgebra& alg, const Vec& x, const Vec& y) {
  if (alg.step > 3)
    throw UnsupportedStep("BCH truncation is exact only for step <= 3");
  Vec out = x + y;
  if (alg.step >= 2) {
    Vec xy = alg.bracket(x, y);
    out += 0.5 * xy;
    if (alg.step >= 3)
      out += (alg.bracket(x, xy) - alg.bracket(y, xy)) / 12.0;
  }
  return out;
}

Vec zoom(const GradedAlgebra& alg, double lambda, const Vec& v) {
  if (lambda <= 0.0) throw NonpositiveLambda("zoom requires lambda > 0");
  Vec out = v;
  for (int i = 0; i < alg.dim; ++i)
    out[i] *= std::pow(lambda, alg.weights[i]);
  return out;
}

GroupGrid make_group_grid(const GradedAlgebra& alg, int points_per_axis,
                          double extent) {
  if (points_per_axis < 3 || points_per_axis % 2 == 0)
    throw ConfigInvalid(
        "points_per_axis must be odd (>= 3) so the lattice contains the "
        "identity");
  GroupGrid grid;
  grid.algebra = alg;
  grid.extent = extent;
  grid.points_per_axis = points_per_axis;
  const int m = points_per_axis;
  const double h = 2.0 * extent / (m - 1);
  grid.cell_volume = std::pow(h, alg.dim);
  const int half = (m - 1) / 2;
  std::vector<int> idx(alg.dim, -half);
  const long total = static_cast<long>(std::pow(m, alg.dim));
  grid.samples.reserve(total);
  for (long t = 0; t < total; ++t) {
    Vec v(alg.dim);
    long rem = t;
    for (int d = 0; d < alg.dim; ++d) {
      v[d] = (rem % m - half) * h;
      rem /= m;
    }
    grid.samples.push_back(v);
  }
  return grid;
}

GroupKernel delta_kernel(const GroupGrid& grid) {
  const double h = 2.0 * grid.extent / (grid.points_per_axis - 1);
  const double vol = grid.cell_volume;
  GroupKernel k;
  k.support_radius = 0.51 * h;
  k.eval = [h, vol](const Vec& u) -> cplx {
    return u.cwiseAbs().maxCoeff() < 0.5 * h ? cplx(1.0 / vol) : cplx(0.0);
  };
  return k;
}

ConvolutionOperator convolution_operator(const GroupGrid& grid,
                                         const GroupKernel& kernel) {
  if (kernel.support_radius > grid.extent * (1.0 + 1e-12))
    throw SupportOverflow("kernel support exceeds the lattice window");
  const int n = grid.size();
  ConvolutionOperator op;
  op.mat = CMat::Zero(n, n);
  op.interior.assign(n, true);
  const double R = kernel.support_radius;
  const bool abelian = grid.algebra.step == 1;
  for (int a = 0; a < n; ++a) {
    const Vec& ga = grid.samples[a];
    const double an = ga.cwiseAbs().maxCoeff();
    double margin = R;
    if (!abelian && grid.algebra.dim >= 2)
      margin += 0.5 * (std::abs(ga[0]) + std::abs(ga[1])) * R;
    op.interior[a] = an + margin <= grid.extent * (1.0 + 1e-12);
    for (int b = 0; b < n; ++b) {
      Vec diff = bch_multiply(grid.algebra, ga, -grid.samples[b]);
      if (diff.cwiseAbs().maxCoeff() > R) continue;
      cplx v = kernel.eval(diff);
      if (v != cplx(0.0)) op.mat(a, b) = v * grid.cell_volume;
    }
  }
  return op;
}

ProperActionScene make_scene(int n_points, double spacing, int shift_cells,
                             int window) {
  if (shift_cells < 1) throw ConfigInvalid("shift_cells must be >= 1");
  ProperActionScene scene;
  scene.spacing = spacing;
  scene.shift_cells = shift_cells;
  scene.window = window;
  scene.line.resize(n_points);
  const double mid = 0.5 * (n_points - 1);
  for (int i = 0; i < n_points; ++i) scene.line[i] = (i - mid) * spacing;
  const double T = shift_cells * spacing;
  scene.cutoff.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double x = scene.line[i];
    double c = 0.0;
    if (x >= -T && x <= 0.0)
      c = smoothstep5((x + T) / T);
    else if (x > 0.0 && x <= T)
      c = 1.0 - smoothstep5(x / T);
    scene.cutoff[i] = c;
  }
  return scene;
}

SupportInterval support_interval(const CMat& t, double tol) {
  SupportInterval s;
  s.lo = static_cast<int>(t.rows());
  s.hi = -1;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (std::abs(t(i, j)) > tol) {
        s.lo = std::min({s.lo, i, j});
        s.hi = std::max({s.hi, i, j});
      }
  if (s.hi < s.lo) s.lo = 0, s.hi = -1;
  return s;
}

namespace {
// T conjugated by the shift of `cells` grid cells, zero filled.
CMat shifted(const CMat& t, int cells) {
  const int n = static_cast<int>(t.rows());
  CMat out = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int si = i + cells;
    if (si < 0 || si >= n) continue;
    for (int j = 0; j < n; ++j) {
      const int sj = j + cells;
      if (sj < 0 || sj >= n) continue;
      out(si, sj) = t(i, j);
    }
  }
  return out;
}
}  // namespace

AverageResult group_average(const ProperActionScene& scene, const CMat& t) {
  const int n = scene.size();
  if (t.rows() != n || t.cols() != n)
    throw ConfigInvalid("operator does not act on the scene grid");
  SupportInterval supp = support_interval(t);
  if (supp.width() >= n)
    throw ImproperAction(
        "operator support fills the window; translate count does not close");
  AverageResult res;
  res.mat = CMat::Zero(n, n);
  if (supp.width() == 0) return res;
  res.effective_translates =
      2 * ((supp.width() - 1) / scene.shift_cells) + 1;
  std::vector<CMat> terms;
  for (int j = -scene.window; j <= scene.window; ++j)
    terms.push_back(shifted(t, j * scene.shift_cells));
  res.mat = pairwise_sum(terms);
  return res;
}

}  // namespace cq::lie
