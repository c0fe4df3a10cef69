#include "coarsequant/coarse.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "coarsequant/linalg.hpp"

namespace cq::coarse {

double NuCutoff::profile(double t) const {
  if (t <= 0.5) return 1.0;
  if (t >= 2.0 / 3.0) return 0.0;
  return 1.0 - smoothstep5((t - 0.5) * 6.0);
}

TransplantData make_transplant_data(const geo::ManifoldGrid& grid,
                                    const Vec& x, const NuCutoff& nu) {
  TransplantData data;
  data.center = x;
  const double search = 1.8 * nu.radius;
  std::vector<double> chis, nus, sqws;
  for (int i = 0; i < grid.size(); ++i) {
    const Vec& y = grid.points()[i];
    if (grid.chart_distance(x, y) > search) continue;
    Vec u;
    try {
      u = geo::log_map(grid, x, y);
    } catch (const NonConvergence&) {
      continue;  // outside the chart's reach
    }
    const double nv = nu.at_norm(u.norm());
    if (nv <= 0.0) continue;
    data.idx.push_back(i);
    data.u.push_back(u);
    nus.push_back(nv);
    chis.push_back(geo::density_factor(grid, x, u));
    sqws.push_back(std::sqrt(grid.weights()[i]));
  }
  const int k = static_cast<int>(data.idx.size());
  data.chi = Eigen::Map<Vec>(chis.data(), k);
  data.nu = Eigen::Map<Vec>(nus.data(), k);
  data.sqw = Eigen::Map<Vec>(sqws.data(), k);
  // do the pullbacks land on the fiber lattice? (true on the flat models
  // when x is a grid point)
  const double h = grid.period(0) > 0 ? grid.period(0) / grid.spec().n : 1.0;
  data.lattice_exact = grid.is_flat();
  for (const Vec& u : data.u) {
    for (int d = 0; d < u.size(); ++d) {
      const double q = u[d] / h;
      if (std::abs(q - std::round(q)) > 1e-9) data.lattice_exact = false;
    }
  }
  return data;
}

WindowedOperator transplant_windowed(const sym::CosymbolFiber& fiber,
                                     const TransplantData& data,
                                     const NuCutoff& nu) {
  if (fiber.window > (2.0 / 3.0) * nu.radius * (1.0 + 1e-9))
    throw WindowOverflow("fiber kernel window exceeds the nu support");
  const int k = static_cast<int>(data.idx.size());
  const int m = fiber.m;
  WindowedOperator w;
  w.idx = data.idx;
  w.m = m;
  w.local = CMat::Zero(k * m, k * m);
  for (int a = 0; a < k; ++a) {
    const double fa = data.sqw[a] * data.nu[a] * data.chi[a];
    for (int b = 0; b < k; ++b) {
      const double fb = data.sqw[b] * data.nu[b] * data.chi[b];
      const CMat kv = fiber.eval(data.u[a] - data.u[b]);
      if (kv.isZero(0.0)) continue;
      w.local.block(a * m, b * m, m, m) = (fa * fb) * kv;
    }
  }
  return w;
}

CMat embed_dense(const WindowedOperator& w, int ambient_points) {
  const int m = w.m;
  CMat out = CMat::Zero(ambient_points * m, ambient_points * m);
  const int k = static_cast<int>(w.idx.size());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      out.block(w.idx[a] * m, w.idx[b] * m, m, m) =
          w.local.block(a * m, b * m, m, m);
  return out;
}

CMat transplant(const sym::Cosymbol& cos, const geo::ManifoldGrid& grid,
                const Vec& x, const NuCutoff& nu) {
  TransplantData data = make_transplant_data(grid, x, nu);
  WindowedOperator w = transplant_windowed(cos.fiber(x), data, nu);
  return embed_dense(w, grid.size());
}

namespace {

double fiber_multiplier_sup(const sym::CosymbolFiber& fiber, int nfreq) {
  // sup over the ambient frequency lattice of the fiber multiplier norm
  double sup = 0.0;
  const double cell = fiber.lat.cell_volume();
  const double base = 2.0 * kPi / (nfreq * fiber.lat.spacing);
  std::vector<Vec> dirs = sym::dyadic_samples(fiber.lat.dim, 1.0);
  for (int k = 0; k <= nfreq / 2; ++k) {
    for (const Vec& d0 : dirs) {
      Vec xi = d0 / d0.norm() * (k * base);
      CMat mult = CMat::Zero(fiber.m, fiber.m);
      for (int p = 0; p < fiber.lat.size(); ++p) {
        if (fiber.samples[p].isZero(0.0)) continue;
        const Vec u = fiber.lat.point(p);
        mult += fiber.samples[p] * std::polar(cell, -xi.dot(u));
      }
      Eigen::JacobiSVD<CMat> svd(mult);
      if (svd.singularValues().size())
        sup = std::max(sup, svd.singularValues()[0]);
    }
  }
  return sup;
}

}  // namespace

double pair_field_modulus(const geo::ManifoldGrid& grid,
                          const WindowedOperator& fx,
                          const WindowedOperator& fy, const Vec& x,
                          const Vec& y, double core_radius, int rank) {
  std::vector<int> uni;
  uni.reserve(fx.idx.size() + fy.idx.size());
  std::set_union(fx.idx.begin(), fx.idx.end(), fy.idx.begin(), fy.idx.end(),
                 std::back_inserter(uni));
  const int m = fx.m;
  const int k = static_cast<int>(uni.size());
  auto place = [&](const WindowedOperator& w, CMat& dst, double sgn) {
    std::vector<int> pos(w.idx.size());
    for (std::size_t i = 0; i < w.idx.size(); ++i)
      pos[i] = static_cast<int>(
          std::lower_bound(uni.begin(), uni.end(), w.idx[i]) - uni.begin());
    for (std::size_t p = 0; p < w.idx.size(); ++p)
      for (std::size_t q = 0; q < w.idx.size(); ++q)
        dst.block(pos[p] * m, pos[q] * m, m, m) +=
            sgn * w.local.block(p * m, q * m, m, m);
  };
  CMat diff = CMat::Zero(k * m, k * m);
  place(fx, diff, 1.0);
  place(fy, diff, -1.0);
  // localize to the shared core
  int active = 0;
  for (int p = 0; p < k; ++p) {
    const Vec& z = grid.points()[uni[p]];
    const bool inside = grid.chart_distance(x, z) <= core_radius &&
                        grid.chart_distance(y, z) <= core_radius;
    if (!inside) {
      diff.block(p * m, 0, m, k * m).setZero();
      diff.block(0, p * m, k * m, m).setZero();
    } else {
      ++active;
    }
  }
  // compact budget at the local scale; the global N/8 budget would always
  // exceed the shared-core rank and report zero
  const int local_rank = std::min(rank, std::max(1, active * m / 4));
  return rank_truncated_norm(diff, local_rank);
}

CoarseOperator quantize(const sym::Cosymbol& cos, const geo::ManifoldGrid& grid,
                        const opint::PartitionOfUnity& pou, const NuCutoff& nu,
                        const QuantizeOptions& opts) {
  const int n = grid.size();
  const int m = cos.m;

  // subordination: supp(alpha_i) must sit inside the nu = 1 core of U_{x_i}
  double stretch = 0.0;
  for (int i = 0; i < n; i += std::max(1, n / 64)) {
    Mat g = grid.metric(grid.points()[i]);
    stretch = std::max(stretch, std::sqrt(g.diagonal().maxCoeff()));
  }
  for (const auto& ball : pou.cover)
    if (ball.radius * stretch > 0.5 * nu.radius * (1.0 + 1e-9))
      throw ConfigInvalid(
          "partition radius exceeds the nu-core of the chart balls");

  const int centers = static_cast<int>(pou.cover.size());
  std::vector<WindowedOperator> parts(centers);
  std::vector<double> fiber_sups(centers, 0.0);
  parallel_for(centers, default_threads(), [&](int i) {
    const Vec& x = pou.cover[i].center;
    sym::CosymbolFiber fiber = cos.fiber(x);
    TransplantData data = make_transplant_data(grid, x, nu);
    parts[i] = transplant_windowed(fiber, data, nu);
    fiber_sups[i] = fiber_multiplier_sup(fiber, grid.spec().n);
  });

  // norm-continuity modulus at the partition scale: rank-truncated and
  // localized to the shared nu-cores (Def-5.1 measurement)
  const int amb_rank =
      opts.rank > 0 ? opts.rank : truncation_rank(n * m);
  const double core_radius = 0.5 * nu.radius / stretch;
  double modulus = 0.0;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < centers; ++i)
    for (int j = i + 1; j < centers; ++j)
      if (grid.chart_distance(pou.cover[i].center, pou.cover[j].center) <=
          2.2 * pou.cover[i].radius)
        pairs.emplace_back(i, j);
  std::vector<double> pair_norms(pairs.size(), 0.0);
  parallel_for(static_cast<int>(pairs.size()), default_threads(), [&](int p) {
    pair_norms[p] = pair_field_modulus(
        grid, parts[pairs[p].first], parts[pairs[p].second],
        pou.cover[pairs[p].first].center, pou.cover[pairs[p].second].center,
        core_radius, amb_rank);
  });
  for (double v : pair_norms) modulus = std::max(modulus, v);

  const double threshold =
      opts.continuity_threshold > 0 ? opts.continuity_threshold : opts.epsilon;
  if (modulus > threshold)
    throw NormContinuityFail("field modulus " + std::to_string(modulus) +
                             " exceeds threshold " +
                             std::to_string(threshold));

  // integral sum; per-entry accumulation order is the fixed center order
  CoarseOperator result;
  result.mat = CMat::Zero(n * m, n * m);
  for (int i = 0; i < centers; ++i) {
    const Vec& alpha = pou.alphas[i];
    const WindowedOperator& w = parts[i];
    const int k = static_cast<int>(w.idx.size());
    for (int a = 0; a < k; ++a) {
      const double aa = alpha[w.idx[a]];
      if (aa == 0.0) continue;
      for (int b = 0; b < k; ++b) {
        const double ab = alpha[w.idx[b]];
        if (ab == 0.0) continue;
        result.mat.block(w.idx[a] * m, w.idx[b] * m, m, m) +=
            (aa * ab) * w.local.block(a * m, b * m, m, m);
      }
    }
  }
  result.measured_modulus = modulus;
  result.fiber_sup =
      fiber_sups.empty()
          ? 0.0
          : *std::max_element(fiber_sups.begin(), fiber_sups.end());
  result.provenance = cos.provenance + "|balls=" + std::to_string(centers) +
                      ",r=" + std::to_string(pou.cover.empty()
                                                 ? 0.0
                                                 : pou.cover[0].radius) +
                      "|n=" + std::to_string(grid.spec().n);
  return result;
}

sym::CosymbolFiber recover_cosymbol(const CMat& op,
                                    const geo::ManifoldGrid& grid,
                                    const Vec& x, const NuCutoff& nu,
                                    const sym::FiberLattice& lat,
                                    double cutoff_width) {
  if (grid.dim() != 1)
    throw UnsupportedFiber("recovery is implemented for 1D abelian fibers");
  if (cutoff_width > 0.5 * nu.radius * (1.0 + 1e-9))
    throw CutoffTooWide("cut-off support leaves the nu = 1 core");

  TransplantData data = make_transplant_data(grid, x, nu);
  const int k = static_cast<int>(data.idx.size());
  const double h = lat.spacing;

  // order window points along the chart line
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return data.u[a][0] < data.u[b][0];
  });

  // resample the unscaled kernel estimate onto the uniform lattice line
  const int line_half = static_cast<int>(std::floor(
      (2.0 / 3.0) * nu.radius / h));
  const int L = 2 * line_half + 1;
  auto raw_at = [&](int a, int b) {
    const double denom = data.sqw[a] * data.chi[a] *
                         std::max(data.nu[a], 0.05) * data.sqw[b] *
                         data.chi[b] * std::max(data.nu[b], 0.05);
    return op(data.idx[a], data.idx[b]) / denom;
  };
  CMat G;
  if (data.lattice_exact) {
    G = CMat::Zero(L, L);
    std::vector<int> slot(k, -1);
    for (int i = 0; i < k; ++i) {
      const int s = static_cast<int>(std::round(data.u[i][0] / h)) + line_half;
      if (s >= 0 && s < L) slot[i] = s;
    }
    for (int a = 0; a < k; ++a) {
      if (slot[a] < 0) continue;
      for (int b = 0; b < k; ++b)
        if (slot[b] >= 0) G(slot[a], slot[b]) = raw_at(a, b);
    }
  } else {
    // linear resampling from the sorted pullback line (provenance: flagged
    // through fiber.interpolated below)
    G = CMat::Zero(L, L);
    auto interp_index = [&](double u) -> std::pair<int, double> {
      int lo = 0, hi = k - 1;
      if (u <= data.u[order[0]][0]) return {0, 0.0};
      if (u >= data.u[order[k - 1]][0]) return {k - 2, 1.0};
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (data.u[order[mid]][0] <= u ? lo : hi) = mid;
      }
      const double u0 = data.u[order[lo]][0], u1 = data.u[order[lo + 1]][0];
      return {lo, (u - u0) / (u1 - u0)};
    };
    for (int p = 0; p < L; ++p) {
      auto [a0, fa] = interp_index((p - line_half) * h);
      for (int q = 0; q < L; ++q) {
        auto [b0, fb] = interp_index((q - line_half) * h);
        const cplx v00 = raw_at(order[a0], order[b0]);
        const cplx v01 = raw_at(order[a0], order[b0 + 1]);
        const cplx v10 = raw_at(order[a0 + 1], order[b0]);
        const cplx v11 = raw_at(order[a0 + 1], order[b0 + 1]);
        G(p, q) = (1 - fa) * ((1 - fb) * v00 + fb * v01) +
                  fa * ((1 - fb) * v10 + fb * v11);
      }
    }
  }

  // cut with the telescoping cut-off and average over lattice translates;
  // the lattice Riemann sum of this profile is exactly its mass s
  const int sc = std::max(1, static_cast<int>(std::floor(
                              cutoff_width / (2.0 * h))));
  const double s = sc * h;
  auto cutoff = [&](double u) {
    if (u >= -s && u <= 0.0) return smoothstep5((u + s) / s);
    if (u > 0.0 && u <= s) return 1.0 - smoothstep5(u / s);
    return 0.0;
  };
  for (int p = 0; p < L; ++p)
    G.row(p) *= cutoff((p - line_half) * h) * h / s;

  lie::ProperActionScene scene = lie::make_scene(L, h, 1, sc);
  lie::AverageResult avg = lie::group_average(scene, G);

  sym::CosymbolFiber fiber;
  fiber.lat = lat;
  fiber.m = 1;
  fiber.window = lat.half_points * lat.spacing;
  fiber.interpolated = !data.lattice_exact;
  fiber.samples.assign(lat.size(), CMat::Zero(1, 1));
  const int j0 = line_half;
  for (int d = -lat.half_points; d <= lat.half_points; ++d) {
    const int col = j0 - d;
    if (col < 0 || col >= L) continue;
    fiber.samples[d + lat.half_points](0, 0) = avg.mat(j0, col);
  }
  return fiber;
}

CMat kohn_nirenberg(const geo::ManifoldGrid& grid, const sym::Symbol& s) {
  const auto model = grid.spec().model;
  if (model != geo::Model::Circle && model != geo::Model::Torus)
    throw ConfigInvalid(
        "direct quantization runs on the flat periodic models only");
  const int n = grid.spec().n;
  const int m = s.fiber_dim;
  const int npts = grid.size();
  const int d = grid.dim();

  // frequency lattice matching the DFT rows per axis
  const int nfreq_total = npts;  // n^d
  CMat result = CMat::Zero(npts * m, npts * m);
  // B(j, r) = sigma(x_j, xi_r) e^{i xi_r . x_j} / n^{d/2};
  // F(r, l) = e^{-i xi_r . x_l} / n^{d/2}
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      CMat B(npts, nfreq_total), F(nfreq_total, npts);
      for (int r = 0; r < nfreq_total; ++r) {
        Vec xi(d);
        int rem = r;
        for (int ax = 0; ax < d; ++ax) {
          xi[ax] = rem % n - n / 2;
          rem /= n;
        }
        for (int j = 0; j < npts; ++j) {
          const double ph = xi.dot(grid.points()[j]);
          B(j, r) = s.eval(grid.points()[j], xi)(p, q) *
                    std::polar(1.0, ph);
          F(r, j) = std::polar(1.0, -ph);
        }
      }
      CMat block = (B * F) / static_cast<double>(nfreq_total);
      for (int j = 0; j < npts; ++j)
        for (int l = 0; l < npts; ++l)
          result(j * m + p, l * m + q) = block(j, l);
    }
  return result;
}

sym::Cosymbol cosymbol_of(const sym::Symbol& s, const geo::ManifoldGrid& grid,
                          const NuCutoff& nu) {
  sym::Cosymbol cos;
  cos.m = s.fiber_dim;
  cos.provenance = s.name;
  const double h = grid.period(0) / grid.spec().n;
  const double window = (2.0 / 3.0) * nu.radius;
  sym::FiberLattice lat;
  lat.dim = grid.dim();
  lat.spacing = h;
  lat.half_points = static_cast<int>(std::ceil(window / h)) + 2;
  const int ambient_n = grid.spec().n;
  cos.fiber = [s, lat, ambient_n, window](const Vec& x) {
    return sym::fourier_cosymbol(s, x, lat, ambient_n, window);
  };
  return cos;
}

std::vector<Vec> uniform_centers(const geo::ManifoldGrid& grid, int count,
                                 double phase) {
  std::vector<Vec> centers;
  const int n = grid.spec().n;
  if (grid.dim() == 1) {
    const double h = grid.period(0) / n;
    for (int i = 0; i < count; ++i) {
      const int gi =
          static_cast<int>(std::llround(phase + i * static_cast<double>(n) /
                                                      count)) %
          n;
      Vec x(1);
      x[0] = gi * h;
      centers.push_back(x);
    }
  } else {
    const double h = grid.period(0) / n;
    for (int j = 0; j < count; ++j)
      for (int i = 0; i < count; ++i) {
        const int gi = static_cast<int>(std::llround(
                           phase + i * static_cast<double>(n) / count)) %
                       n;
        const int gj = static_cast<int>(std::llround(
                           phase + j * static_cast<double>(n) / count)) %
                       n;
        Vec x(2);
        x << gi * h, gj * h;
        centers.push_back(x);
      }
  }
  return centers;
}

opint::OperatorField transplant_field(const geo::ManifoldGrid& grid,
                                      std::shared_ptr<const sym::Cosymbol> cos,
                                      const NuCutoff& nu) {
  opint::OperatorField field;
  field.block = cos->m;
  const geo::ManifoldGrid* g = &grid;
  field.eval = [g, cos, nu](const Vec& x) {
    TransplantData data = make_transplant_data(*g, x, nu);
    return embed_dense(transplant_windowed(cos->fiber(x), data, nu),
                       g->size());
  };
  field.pair_modulus = [g, cos, nu](const Vec& x, const Vec& y) {
    TransplantData dx = make_transplant_data(*g, x, nu);
    TransplantData dy = make_transplant_data(*g, y, nu);
    WindowedOperator fx = transplant_windowed(cos->fiber(x), dx, nu);
    WindowedOperator fy = transplant_windowed(cos->fiber(y), dy, nu);
    return pair_field_modulus(*g, fx, fy, x, y, 0.5 * nu.radius,
                              truncation_rank(g->size() * cos->m));
  };
  // pair comparisons need a shared nu-core, so cover balls stay below it
  field.max_ball_radius = 0.2 * nu.radius;
  return field;
}

std::vector<CompareLevel> compare_with_direct(
    const sym::Symbol& s,
    const std::vector<std::tuple<int, double, double>>& ladder,
    const CompareOptions& opts) {
  std::vector<CompareLevel> out;
  for (const auto& [n, radius, eps] : ladder) {
    CompareLevel lev;
    lev.n = n;
    lev.radius = radius;
    lev.epsilon = eps;
    geo::ManifoldSpec mspec;
    mspec.model = geo::Model::Circle;
    mspec.n = n;
    geo::ManifoldGrid grid(mspec);
    NuCutoff nucut;
    nucut.radius =
        opts.chart_radius > 0 ? opts.chart_radius : grid.ball_radius();

    CMat direct = kohn_nirenberg(grid, s);
    sym::Cosymbol cos = cosymbol_of(s, grid, nucut);
    const int count =
        static_cast<int>(std::ceil(grid.period(0) / radius));
    opint::PartitionOfUnity pou =
        opint::build_partition(grid, uniform_centers(grid, count), radius);
    QuantizeOptions qopts;
    qopts.epsilon = eps;
    CoarseOperator coarse_op = quantize(cos, grid, pou, nucut, qopts);

    lev.defect = rank_truncated_norm(direct - coarse_op.mat,
                                     truncation_rank(n * s.fiber_dim));
    double sup = 0.0;
    for (int j = 0; j < grid.size(); j += std::max(1, grid.size() / 64))
      for (int r = 0; r < n; ++r) {
        Vec xi(1);
        xi[0] = dft_frequency(r, n);
        sup = std::max(sup, s.eval(grid.points()[j], xi).norm());
      }
    lev.sigma_sup = sup;
    out.push_back(lev);
  }
  return out;
}

}  // namespace cq::coarse
