#include "coarsequant/diagnostics.hpp"

#include <cmath>

#include "coarsequant/linalg.hpp"

namespace cq::diag {

double CompactnessReport::tail_ratio(int r) const {
  if (svals.size() == 0 || svals[0] <= 1e-300) return 0.0;
  if (r >= svals.size()) return 0.0;
  return svals[r] / svals[0];
}

CompactnessReport compactness_report(const CMat& a) {
  CompactnessReport rep;
  rep.svals = singular_values(a);
  const int n = static_cast<int>(a.rows());
  rep.ranks = {n / 16, n / 8, n / 4};
  for (int r : rep.ranks) rep.tail_ratios.push_back(rep.tail_ratio(r));
  return rep;
}

CompactnessReport commutator_report(const CMat& f, const Vec& a) {
  CMat d = a.cast<cplx>().asDiagonal();
  return compactness_report(f * d - d * f);
}

ProxyVerdict compactness_verdict(const std::vector<CompactnessReport>& ladder,
                                 double threshold, double improvement) {
  ProxyVerdict v;
  for (const auto& rep : ladder) {
    const int n = static_cast<int>(rep.svals.size());
    v.ladder_ratios.push_back(rep.tail_ratio(n / 8));
  }
  if (v.ladder_ratios.empty()) return v;
  v.pass = v.ladder_ratios.back() <= threshold;
  for (std::size_t i = 0; i + 1 < v.ladder_ratios.size(); ++i) {
    const double a = v.ladder_ratios[i], b = v.ladder_ratios[i + 1];
    if (a <= 1e-14 && b <= 1e-14) continue;  // both at numerical floor
    if (b * improvement > a + 1e-14) v.pass = false;
  }
  return v;
}

SchurReport schur_bound(const CMat& kernel) {
  SchurReport rep;
  rep.row_sums = kernel.cwiseAbs().rowwise().sum();
  rep.col_sums = kernel.cwiseAbs().colwise().sum().transpose();
  const double r = rep.row_sums.size() ? rep.row_sums.maxCoeff() : 0.0;
  const double c = rep.col_sums.size() ? rep.col_sums.maxCoeff() : 0.0;
  rep.bound = std::max(r, c);
  return rep;
}

EssentialNormReport essential_norm_estimate(const CVec& multiplier,
                                            double tol) {
  EssentialNormReport rep;
  const int n = static_cast<int>(multiplier.size());
  // multiplier entries indexed like DFT rows: frequency r - n/2
  Vec mag = multiplier.cwiseAbs();
  Vec sorted = mag;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            std::greater<double>());
  const int r = truncation_rank(n);
  rep.truncated_norm = r < n ? sorted[r] : 0.0;
  // outer dyadic shell: |k| in (n/4, n/2]
  for (int i = 0; i < n; ++i) {
    const int k = dft_frequency(i, n);
    if (std::abs(k) > n / 4) rep.outer_sup = std::max(rep.outer_sup, mag[i]);
  }
  rep.pass = rep.truncated_norm <= rep.outer_sup + tol;
  return rep;
}

NonsingularReport nonsingular_check(
    const lie::GroupGrid& grid, const lie::GroupKernel& kernel,
    const std::function<double(const Vec&)>& annulus_cutoff,
    const Vec& localizer) {
  NonsingularReport rep;
  for (const Vec& g : grid.samples) {
    const double a = annulus_cutoff(g);
    if (a == 0.0) continue;
    rep.l1_mass += std::abs(a * kernel.eval(g)) * grid.cell_volume;
  }
  lie::GroupKernel cut;
  cut.support_radius = kernel.support_radius;
  auto base = kernel.eval;
  cut.eval = [base, annulus_cutoff](const Vec& u) {
    return annulus_cutoff(u) * base(u);
  };
  lie::ConvolutionOperator op = convolution_operator(grid, cut);
  CMat loc = localizer.cast<cplx>().asDiagonal();
  rep.localized = compactness_report(loc * op.mat * loc);
  return rep;
}

}  // namespace cq::diag
