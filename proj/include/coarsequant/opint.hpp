#pragma once
//
// Riemann operator integration: coverings, partitions of unity with
// sum alpha_i^2 = 1, the integral sum  Sigma_i phi(alpha_i) F(x_i)
// phi(alpha_i), stability across partitions, and operator supports at cell
// resolution.
//

#include "coarsequant/common.hpp"
#include "coarsequant/diagnostics.hpp"
#include "coarsequant/geometry.hpp"

namespace cq::opint {

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct PartitionOfUnity {
  std::vector<Ball> cover;
  std::vector<Vec> alphas;  // one grid function per ball
  int max_overlap = 0;      // max number of balls containing one point
};

// alpha_i = bump_i / sqrt(sum_j bump_j^2) with the project-wide quintic
// bump; normalization is exact by construction. Throws UncoveredPoint.
PartitionOfUnity build_partition(const geo::ManifoldGrid& grid,
                                 const std::vector<Vec>& centers,
                                 double radius);

// Bounded norm-continuous operator field x -> F(x) on the ambient grid.
// `block` is the fiber dimension (operators act on C^{N * block}).
// `pair_modulus`, when set, replaces the plain-norm difference in modulus
// measurements (fields defined through chart cutoffs are only continuous
// after localization to the shared chart core).
struct OperatorField {
  std::function<CMat(const Vec& x)> eval;
  int block = 1;
  std::function<double(const Vec& x, const Vec& y)> pair_modulus;
  // largest admissible cover-ball radius (chart-cutoff fields are only
  // comparable within a shared core); <= 0 means unconstrained
  double max_ball_radius = -1.0;
};

struct EpsilonCover {
  std::vector<Vec> centers;
  double radius = 0.0;
  double measured_modulus = 0.0;  // omega(2 radius)
};

// Chooses a ball radius from the measured modulus of continuity so that the
// field varies by at most eps within each ball, and lays down a uniform net
// of centers at that spacing. Throws EpsilonTooSmall when the needed radius
// falls under the grid resolution.
EpsilonCover epsilon_cover(const geo::ManifoldGrid& grid,
                           const OperatorField& field, double eps);

// Integral sum as a dense matrix; deterministic pairwise reduction.
CMat operator_integral(const OperatorField& field,
                       const PartitionOfUnity& pou);

// || loc (Sigma_1 - Sigma_2) loc || after best rank-r subtraction
// (r = ceil(N/8) by default; localizer identity by default).
double integral_stability(const OperatorField& field,
                          const PartitionOfUnity& pou1,
                          const PartitionOfUnity& pou2,
                          const Vec* localizer = nullptr, int rank = -1);

// Support at cell resolution: grid indices are split into n_cells contiguous
// chunks (cyclic in grid order); a cell pair is in the support if the
// corresponding block exceeds tol * ||T||.
struct SupportSet {
  int n_cells = 0;
  int grid_size = 0;
  std::vector<std::pair<int, int>> cells;  // sorted

  bool contains(int ci, int cj) const;
};

SupportSet support_of(const CMat& t, double tol = 1e-8, int n_cells = 32);

// All support cells within `band` of the (cyclic) diagonal.
bool within_diagonal_band(const SupportSet& s, int band);

// Every support cell within Chebyshev distance `slack` of an allowed pair.
bool subset_within(const SupportSet& s,
                   const std::vector<std::pair<int, int>>& allowed,
                   int slack);

// Both projections of the support have fibers of at most `bound` cells.
bool properly_supported(const SupportSet& s, int bound);

struct CommutationReport {
  double worst_tail_ratio = 0.0;   // max_j tail_ratio(N/8) of [T, a_j]
  bool commutators_small = false;  // against the proxy threshold
  bool diagonal_support = false;   // support_of verdict (band 1)
  bool consistent = false;
};

// Thm-2.3-style cross-check: commutator compactness proxy vs diagonal
// support verdict.
CommutationReport diagonal_commutation_check(const CMat& t,
                                             const std::vector<Vec>& functions,
                                             double proxy_threshold = 0.05);

}  // namespace cq::opint
