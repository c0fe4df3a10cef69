#include "coarsequant/opint.hpp"

#include <algorithm>
#include <cmath>

#include "coarsequant/linalg.hpp"

namespace cq::opint {

namespace {

double bump(double dist, double radius) {
  if (dist >= radius) return 0.0;
  return smoothstep5(1.0 - dist / radius);
}

// expands a per-point vector to block structure (point-major)
CVec expand_blocks(const Vec& v, int block) {
  if (block == 1) return v.cast<cplx>();
  CVec out(v.size() * block);
  for (int i = 0; i < v.size(); ++i)
    for (int b = 0; b < block; ++b) out[i * block + b] = v[i];
  return out;
}

}  // namespace

PartitionOfUnity build_partition(const geo::ManifoldGrid& grid,
                                 const std::vector<Vec>& centers,
                                 double radius) {
  const int n = grid.size();
  PartitionOfUnity pou;
  std::vector<Vec> bumps;
  bumps.reserve(centers.size());
  for (const Vec& c : centers) {
    pou.cover.push_back({c, radius});
    Vec b(n);
    for (int i = 0; i < n; ++i)
      b[i] = bump(grid.chart_distance(c, grid.points()[i]), radius);
    bumps.push_back(std::move(b));
  }
  Vec norm2 = Vec::Zero(n);
  for (const Vec& b : bumps) norm2 += b.cwiseProduct(b);
  for (int i = 0; i < n; ++i) {
    if (norm2[i] <= 0.0)
      throw UncoveredPoint("grid point " + std::to_string(i) +
                           " not covered by any ball");
  }
  Vec inv = norm2.cwiseSqrt().cwiseInverse();
  pou.alphas.reserve(bumps.size());
  for (Vec& b : bumps) pou.alphas.push_back(b.cwiseProduct(inv));
  for (int i = 0; i < n; ++i) {
    int cnt = 0;
    for (const Vec& b : bumps)
      if (b[i] > 0.0) ++cnt;
    pou.max_overlap = std::max(pou.max_overlap, cnt);
  }
  return pou;
}

EpsilonCover epsilon_cover(const geo::ManifoldGrid& grid,
                           const OperatorField& field, double eps) {
  if (eps <= 0.0) throw EpsilonTooSmall("eps must be positive");
  // modulus at separation delta, probed on a fixed base net with explicit
  // partners at exactly that separation
  const int base_count = grid.dim() == 1 ? 12 : 9;
  std::vector<Vec> base;
  if (grid.dim() == 1) {
    for (int i = 0; i < base_count; ++i) {
      Vec x(1);
      x[0] = grid.period(0) * i / base_count;
      base.push_back(x);
    }
  } else {
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        Vec x(2);
        x << grid.period(0) * i / 3.0, grid.period(1) * j / 3.0;
        base.push_back(x);
      }
  }
  auto pair_norm = [&](const Vec& x, const Vec& y) {
    if (field.pair_modulus) return field.pair_modulus(x, y);
    return op_norm_estimate(field.eval(x) - field.eval(y));
  };
  auto modulus = [&](double delta) {
    double w = 0.0;
    for (double d : {delta, 0.5 * delta, 0.25 * delta})
      for (const Vec& x : base)
        for (int axis = 0; axis < grid.dim(); ++axis) {
          Vec y = x;
          y[axis] += d;
          w = std::max(w, pair_norm(x, grid.wrap_point(y)));
        }
    return w;
  };

  const double grid_h = grid.period(0) / grid.spec().n;
  double radius = grid.period(0) / 4.0;
  if (field.max_ball_radius > 0)
    radius = std::min(radius, field.max_ball_radius);
  EpsilonCover cover;
  while (true) {
    cover.measured_modulus = modulus(2.0 * radius);
    if (cover.measured_modulus <= eps) break;
    radius *= 0.8;
    if (radius < grid_h)
      throw EpsilonTooSmall("needed ball radius falls under grid resolution");
  }
  cover.radius = radius;
  const int per_axis =
      std::max(1, static_cast<int>(std::ceil(grid.period(0) / radius)));
  if (grid.dim() == 1) {
    for (int i = 0; i < per_axis; ++i) {
      Vec x(1);
      x[0] = grid.period(0) * i / per_axis;
      cover.centers.push_back(x);
    }
  } else {
    for (int j = 0; j < per_axis; ++j)
      for (int i = 0; i < per_axis; ++i) {
        Vec x(2);
        x << grid.period(0) * i / per_axis, grid.period(1) * j / per_axis;
        cover.centers.push_back(x);
      }
  }
  return cover;
}

CMat operator_integral(const OperatorField& field,
                       const PartitionOfUnity& pou) {
  const int terms = static_cast<int>(pou.cover.size());
  std::vector<CMat> parts(terms);
  parallel_for(terms, default_threads(), [&](int i) {
    CVec a = expand_blocks(pou.alphas[i], field.block);
    CMat f = field.eval(pou.cover[i].center);
    parts[i] = a.asDiagonal() * f * a.asDiagonal();
  });
  return pairwise_sum(parts);
}

double integral_stability(const OperatorField& field,
                          const PartitionOfUnity& pou1,
                          const PartitionOfUnity& pou2, const Vec* localizer,
                          int rank) {
  CMat s1 = operator_integral(field, pou1);
  CMat s2 = operator_integral(field, pou2);
  CMat diff = s1 - s2;
  if (localizer) {
    CVec a = expand_blocks(*localizer, field.block);
    diff = a.asDiagonal() * diff * a.asDiagonal();
  }
  if (rank < 0) rank = truncation_rank(static_cast<int>(diff.rows()));
  return rank_truncated_norm(diff, rank);
}

bool SupportSet::contains(int ci, int cj) const {
  return std::binary_search(cells.begin(), cells.end(),
                            std::make_pair(ci, cj));
}

SupportSet support_of(const CMat& t, double tol, int n_cells) {
  SupportSet s;
  s.grid_size = static_cast<int>(t.rows());
  s.n_cells = std::min(n_cells, s.grid_size);
  const double scale = op_norm_estimate(t);
  if (scale <= 1e-300) return s;
  const int per = (s.grid_size + s.n_cells - 1) / s.n_cells;
  for (int ci = 0; ci < s.n_cells; ++ci) {
    const int r0 = ci * per, r1 = std::min(s.grid_size, r0 + per);
    if (r0 >= r1) continue;
    for (int cj = 0; cj < s.n_cells; ++cj) {
      const int c0 = cj * per, c1 = std::min(s.grid_size, c0 + per);
      if (c0 >= c1) continue;
      const double bn = t.block(r0, c0, r1 - r0, c1 - c0).norm();
      if (bn > tol * scale) s.cells.emplace_back(ci, cj);
    }
  }
  std::sort(s.cells.begin(), s.cells.end());
  return s;
}

namespace {
int cyc_dist(int a, int b, int n) {
  int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}
}  // namespace

bool within_diagonal_band(const SupportSet& s, int band) {
  for (auto [ci, cj] : s.cells)
    if (cyc_dist(ci, cj, s.n_cells) > band) return false;
  return true;
}

bool subset_within(const SupportSet& s,
                   const std::vector<std::pair<int, int>>& allowed,
                   int slack) {
  for (auto [ci, cj] : s.cells) {
    bool ok = false;
    for (auto [ai, aj] : allowed)
      if (cyc_dist(ci, ai, s.n_cells) <= slack &&
          cyc_dist(cj, aj, s.n_cells) <= slack) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

bool properly_supported(const SupportSet& s, int bound) {
  std::vector<int> row_count(s.n_cells, 0), col_count(s.n_cells, 0);
  for (auto [ci, cj] : s.cells) {
    ++row_count[ci];
    ++col_count[cj];
  }
  for (int i = 0; i < s.n_cells; ++i)
    if (row_count[i] > bound || col_count[i] > bound) return false;
  return true;
}

CommutationReport diagonal_commutation_check(const CMat& t,
                                             const std::vector<Vec>& functions,
                                             double proxy_threshold) {
  CommutationReport rep;
  const int n = static_cast<int>(t.rows());
  for (const Vec& a : functions) {
    diag::CompactnessReport cr = diag::commutator_report(t, a);
    rep.worst_tail_ratio = std::max(rep.worst_tail_ratio, cr.tail_ratio(n / 8));
  }
  rep.commutators_small = rep.worst_tail_ratio <= proxy_threshold;
  rep.diagonal_support = within_diagonal_band(support_of(t), 1);
  rep.consistent = rep.commutators_small == rep.diagonal_support;
  return rep;
}

}  // namespace cq::opint
