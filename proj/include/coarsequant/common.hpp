#pragma once
//
// coarsequant : common types, errors, RNG, small numeric helpers
//

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cq {

using cplx = std::complex<double>;
using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Base class for all failure modes the library reports. Each named error in
// a module contract gets its own subclass so callers can catch precisely.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CQ_DEFINE_ERROR(Name)                                   \
  struct Name : Error {                                         \
    explicit Name(const std::string& w) : Error(#Name ": " + w) {} \
  }

CQ_DEFINE_ERROR(HypothesisViolated);
CQ_DEFINE_ERROR(NonConvergence);
CQ_DEFINE_ERROR(OutOfBall);
CQ_DEFINE_ERROR(DisjointNeighborhoods);
CQ_DEFINE_ERROR(UnsupportedStep);
CQ_DEFINE_ERROR(NonpositiveLambda);
CQ_DEFINE_ERROR(SupportOverflow);
CQ_DEFINE_ERROR(ImproperAction);
CQ_DEFINE_ERROR(Inconclusive);
CQ_DEFINE_ERROR(UncoveredPoint);
CQ_DEFINE_ERROR(EpsilonTooSmall);
CQ_DEFINE_ERROR(WindowOverflow);
CQ_DEFINE_ERROR(NormContinuityFail);
CQ_DEFINE_ERROR(CutoffTooWide);
CQ_DEFINE_ERROR(UnsupportedFiber);
CQ_DEFINE_ERROR(NotSelfAdjoint);
CQ_DEFINE_ERROR(NotSymmetric);
CQ_DEFINE_ERROR(QuadratureFail);
CQ_DEFINE_ERROR(NotAlmostInvertible);
CQ_DEFINE_ERROR(PathLeavesFredholm);
CQ_DEFINE_ERROR(SymbolVanishes);
CQ_DEFINE_ERROR(ConfigInvalid);
CQ_DEFINE_ERROR(IoError);

#undef CQ_DEFINE_ERROR

// Counter-based deterministic RNG (splitmix64 core). All randomized probes in
// the project draw from this; results are reproducible across platforms for a
// fixed (seed, stream) pair, which std::random distributions do not guarantee.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (deterministic, no cached spare)
  double normal();

  cplx cnormal() { return {normal(), normal()}; }

  Vec  normal_vec(int n);
  CMat cnormal_mat(int rows, int cols);

 private:
  std::uint64_t state_;
};

// Quintic smoothstep: 0 at 0, 1 at 1, C^2 at both ends. The single bump
// profile used project-wide (partitions of unity, nu-cutoffs, cut-off
// functions for averaging).
double smoothstep5(double t);

// Pairwise tree reduction with a fixed ordering; keeps floating-point sums
// reproducible independent of thread count.
CMat pairwise_sum(const std::vector<CMat>& terms);

// Streaming pairwise reduction (binary-carry merging); same determinism with
// O(log n) live partial sums.
class PairwiseAccumulator {
 public:
  void add(CMat term);
  CMat result() const;
  bool empty() const { return stack_.empty(); }

 private:
  std::vector<std::pair<int, CMat>> stack_;  // (level, partial sum)
};

// Cumulative integral of samples on a uniform grid over [0, t_i] for every i,
// 4th order (local cubic interpolation per step).
std::vector<Vec> cumulative_integral(const std::vector<Vec>& f, double h);

// Runs fn(i) for i in [0, n); uses up to `threads` workers. Thread count has
// no effect on results anywhere in the library.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Global default thread count (set from --threads / COARSEQUANT_THREADS).
int  default_threads();
void set_default_threads(int n);

}  // namespace cq
