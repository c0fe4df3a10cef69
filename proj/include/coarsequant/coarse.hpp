#pragma once
//
// The coarse quantization pipeline: nu-cutoffs, chi-density transplantation
// of cosymbol fibers into manifold neighborhoods, assembly through the
// operator integral, cosymbol recovery by cutting + group averaging, and the
// comparison against direct Kohn-Nirenberg quantization.
//

#include "coarsequant/common.hpp"
#include "coarsequant/geometry.hpp"
#include "coarsequant/opint.hpp"
#include "coarsequant/symbol.hpp"

#include <memory>

namespace cq::coarse {

// nu(t) = 1 for t <= 1/2, 0 for t >= 2/3, quintic in between; scaled by the
// chart-ball radius r_x.
struct NuCutoff {
  double radius = 0.5;

  double profile(double t) const;
  double at_norm(double u_norm) const { return profile(u_norm / radius); }
};

// Per-center chart data: ambient indices inside the nu-support, their
// log-map pullbacks (frame coordinates), chi and nu values, sqrt weights.
struct TransplantData {
  Vec center;
  std::vector<int> idx;
  std::vector<Vec> u;
  Vec chi, nu, sqw;
  bool lattice_exact = true;  // pullbacks land on the fiber lattice
};

TransplantData make_transplant_data(const geo::ManifoldGrid& grid,
                                    const Vec& x, const NuCutoff& nu);

// F(x) restricted to its window (indices + local block matrix).
struct WindowedOperator {
  std::vector<int> idx;
  CMat local;  // (k*m) x (k*m)
  int m = 1;
};

WindowedOperator transplant_windowed(const sym::CosymbolFiber& fiber,
                                     const TransplantData& data,
                                     const NuCutoff& nu);

CMat embed_dense(const WindowedOperator& w, int ambient_points);

// Rank-truncated norm of (F(x) - F(y)) localized to the shared nu = 1 core
// of the two charts. This is the Def-5.1 modulus the construction actually
// depends on: the partition functions are supported in those cores, so the
// O(1) differences between the nu-profiles themselves never enter the
// integral.
double pair_field_modulus(const geo::ManifoldGrid& grid,
                          const WindowedOperator& fx,
                          const WindowedOperator& fy, const Vec& x,
                          const Vec& y, double core_radius, int rank);

// Dense F(x) on the ambient grid; zero outside U_x. Throws WindowOverflow
// when the fiber kernel does not fit in the nu-core after cutting.
CMat transplant(const sym::Cosymbol& cos, const geo::ManifoldGrid& grid,
                const Vec& x, const NuCutoff& nu);

struct CoarseOperator {
  CMat mat;
  std::string provenance;        // cosymbol | partition | grid
  double measured_modulus = 0.0; // rank-truncated field modulus at scale
  double fiber_sup = 0.0;        // sup_x of fiber multiplier norms
};

struct QuantizeOptions {
  double epsilon = 0.1;               // required field modulus at ball scale
  double continuity_threshold = -1.0; // default: epsilon
  int rank = -1;                      // compact-proxy rank (default N/8)
};

// Full pipeline: transplant the fiber at every partition center, measure the
// norm-continuity modulus, assemble the operator integral. Throws
// NormContinuityFail when the measured modulus exceeds the threshold, and
// ConfigInvalid when the partition is not subordinate to the nu-cores.
CoarseOperator quantize(const sym::Cosymbol& cos,
                        const geo::ManifoldGrid& grid,
                        const opint::PartitionOfUnity& pou,
                        const NuCutoff& nu, const QuantizeOptions& opts = {});

// Recovers the cosymbol fiber at x from a coarse operator by cutting with a
// lattice-shift cut-off and averaging the translates. Abelian fibers only.
// Throws CutoffTooWide when supp(c) leaves the nu = 1 core.
sym::CosymbolFiber recover_cosymbol(const CMat& op,
                                    const geo::ManifoldGrid& grid,
                                    const Vec& x, const NuCutoff& nu,
                                    const sym::FiberLattice& lat,
                                    double cutoff_width);

// Direct Kohn-Nirenberg quantization on the flat periodic models.
CMat kohn_nirenberg(const geo::ManifoldGrid& grid, const sym::Symbol& s);

struct CompareLevel {
  int n = 0;
  double radius = 0.0;
  double epsilon = 0.0;
  double defect = 0.0;     // localized rank-truncated |Op(sigma) - F|
  double sigma_sup = 0.0;  // sup of the symbol norm at this level
};

struct CompareOptions {
  int centers_factor = 2;  // centers per radius-length of circumference
  double chart_radius = -1.0;  // default: grid ball radius
};

// Runs the refinement ladder (grid n, partition radius, epsilon) on the
// circle and reports the defect sequence.
std::vector<CompareLevel> compare_with_direct(
    const sym::Symbol& s, const std::vector<std::tuple<int, double, double>>&
                               ladder,
    const CompareOptions& opts = {});

// Cosymbol of a symbol on the given grid: fibers via fourier_cosymbol on the
// lattice matched to the ambient spacing, window (2/3) * chart radius.
sym::Cosymbol cosymbol_of(const sym::Symbol& s, const geo::ManifoldGrid& grid,
                          const NuCutoff& nu);

// Uniformly spaced partition centers snapped to grid points.
std::vector<Vec> uniform_centers(const geo::ManifoldGrid& grid, int count,
                                 double phase = 0.0);

// The transplanted field x -> F(x) as an opint operator field, with the
// core-localized pair modulus wired in.
opint::OperatorField transplant_field(const geo::ManifoldGrid& grid,
                                      std::shared_ptr<const sym::Cosymbol> cos,
                                      const NuCutoff& nu);

}  // namespace cq::coarse
