#pragma once
//
// Fields of Lie groups for the tangent Lie structure: abelian R^n and graded
// nilpotent algebras (Heisenberg h3) with zoom dilations, truncated BCH
// multiplication, Haar-measure convolution operators on lattice windows, and
// averaging of compactly supported operators over a proper action.
//

#include "coarsequant/common.hpp"

#include <string>

namespace cq::lie {

// Graded nilpotent Lie algebra given by structure constants c[i][j][k]
// ([e_i, e_j] = sum_k c_ijk e_k) and grading weights.
struct GradedAlgebra {
  int dim = 0;
  std::vector<int> weights;            // grading degree per coordinate
  std::vector<std::vector<Vec>> brackets;  // brackets[i][j] = [e_i, e_j]
  int step = 1;                        // nilpotency step

  Vec bracket(const Vec& x, const Vec& y) const;
  // Homogeneous dimension Q = sum of weights.
  int homogeneous_dim() const;
};

GradedAlgebra abelian_algebra(int dim);
GradedAlgebra heisenberg_algebra();

// Checks antisymmetry, the Jacobi identity and grading compatibility
// (c_ijk = 0 unless w_i + w_j = w_k). Throws HypothesisViolated.
void validate_algebra(const GradedAlgebra& alg, double tol = 1e-12);

GradedAlgebra algebra_from_json(const std::string& json_text);

// Group product in exponential coordinates by the BCH formula, exact for
// nilpotency step <= 3. Throws UnsupportedStep otherwise.
Vec bch_multiply(const GradedAlgebra& alg, const Vec& x, const Vec& y);

inline Vec bch_inverse(const Vec& x) { return -x; }

// Zoom dilation: v_i -> lambda^{w_i} v_i. Throws NonpositiveLambda.
Vec zoom(const GradedAlgebra& alg, double lambda, const Vec& v);

// Uniform lattice window in exponential coordinates with the (constant)
// Lebesgue = Haar cell volume.
struct GroupGrid {
  GradedAlgebra algebra;
  std::vector<Vec> samples;
  double cell_volume = 1.0;
  double extent = 1.0;     // lattice covers [-extent, extent]^dim
  int points_per_axis = 0;

  int size() const { return static_cast<int>(samples.size()); }
};

GroupGrid make_group_grid(const GradedAlgebra& alg, int points_per_axis,
                          double extent);

// Compactly supported kernel on the group, given by an evaluator.
struct GroupKernel {
  std::function<cplx(const Vec&)> eval;
  double support_radius = 0.0;  // sup-norm radius in exponential coordinates
};

// Left-convolution operator F(phi)(g) = int k(g z^{-1}) phi(z) dz on the
// lattice window. Rows whose kernel translate leaves the window are flagged
// non-interior. Throws SupportOverflow if the kernel support does not fit in
// the window at all.
struct ConvolutionOperator {
  CMat mat;
  std::vector<bool> interior;  // per row
};

ConvolutionOperator convolution_operator(const GroupGrid& grid,
                                         const GroupKernel& kernel);

// Discrete delta at the identity (1/cell_volume on the nearest lattice site).
GroupKernel delta_kernel(const GroupGrid& grid);

// Z acting by translations of step `shift` on a uniform line grid, with a
// smoothstep cut-off c satisfying sum_g g(c) = 1 on the window interior.
struct ProperActionScene {
  Vec line;            // grid coordinates
  double spacing = 0;
  int shift_cells = 1;           // translation length in grid cells
  int window = 0;                // translates -window..window are applied
  Vec cutoff;                    // c sampled on the line

  int size() const { return static_cast<int>(line.size()); }
};

ProperActionScene make_scene(int n_points, double spacing, int shift_cells,
                             int window);

// Support interval (index range) of a matrix, for the averaging bound.
struct SupportInterval {
  int lo = 0, hi = -1;  // inclusive; empty if hi < lo
  int width() const { return hi < lo ? 0 : hi - lo + 1; }
};

SupportInterval support_interval(const CMat& t, double tol = 1e-14);

// Sum of translates sum_g g(T) over the effective window. Throws
// ImproperAction when every group element in the window still meets the
// support (the translate count does not close up).
struct AverageResult {
  CMat mat;
  int effective_translates = 0;  // |K| of the averaging bound
};

AverageResult group_average(const ProperActionScene& scene, const CMat& t);

}  // namespace cq::lie
