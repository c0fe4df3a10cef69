#pragma once
//
// Pseudolocality and compactness diagnostics: singular-value tail reports as
// the finite-grid compactness proxy, Schur kernel bounds, essential-norm
// estimates for Fourier multipliers, and the L^1 off-identity criterion for
// convolution kernels.
//

#include "coarsequant/common.hpp"
#include "coarsequant/liegroup.hpp"

namespace cq::diag {

struct CompactnessReport {
  Vec svals;                     // decreasing
  std::vector<int> ranks;        // probe ranks (N/16, N/8, N/4)
  std::vector<double> tail_ratios;  // s_{r+1} / s_1 at those ranks

  double tail_ratio(int r) const;
};

CompactnessReport compactness_report(const CMat& a);

// Report for [F, diag(a)].
CompactnessReport commutator_report(const CMat& f, const Vec& a);

// Pass rule for the compactness proxy across a refinement ladder: final
// tail_ratio(N/8) <= threshold and improvement >= factor per doubling.
struct ProxyVerdict {
  std::vector<double> ladder_ratios;
  bool pass = false;
};

ProxyVerdict compactness_verdict(const std::vector<CompactnessReport>& ladder,
                                 double threshold = 0.05,
                                 double improvement = 1.5);

// Schur bound max(sup_row sum |k|, sup_col sum |k|) for a sampled kernel;
// always an upper bound for the operator norm of the sampled kernel matrix.
struct SchurReport {
  double bound = 0.0;
  Vec row_sums, col_sums;
};

SchurReport schur_bound(const CMat& kernel);

// Rank-truncated norm of the Fourier multiplier of f against the sup of |f|
// on the outer dyadic shell of the sampled lattice.
struct EssentialNormReport {
  double truncated_norm = 0.0;
  double outer_sup = 0.0;
  bool pass = false;
};

EssentialNormReport essential_norm_estimate(const CVec& multiplier,
                                            double tol = 1e-6);

// L^1 mass of the annulus-cut kernel alpha * k plus the compactness report
// of the localized cut convolution operator.
struct NonsingularReport {
  double l1_mass = 0.0;
  CompactnessReport localized;
};

NonsingularReport nonsingular_check(const lie::GroupGrid& grid,
                                    const lie::GroupKernel& kernel,
                                    const std::function<double(const Vec&)>&
                                        annulus_cutoff,
                                    const Vec& localizer);

}  // namespace cq::diag
