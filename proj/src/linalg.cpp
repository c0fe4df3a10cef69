#include "coarsequant/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <map>
#include <mutex>

namespace cq {

Vec singular_values(const CMat& a) {
  if (a.rows() == 0 || a.cols() == 0) return Vec();
  if (std::min(a.rows(), a.cols()) <= 32) {
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues();
  }
  Eigen::BDCSVD<CMat> svd(a);
  return svd.singularValues();
}

double op_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Vec s = singular_values(a);
  return s.size() ? s[0] : 0.0;
}

double op_norm_estimate(const CMat& a, int iters) {
  if (a.size() == 0) return 0.0;
  CVec v = CVec::Ones(a.cols());
  v.normalize();
  double last = 0.0;
  for (int k = 0; k < iters; ++k) {
    CVec w = a.adjoint() * (a * v);
    double nn = w.norm();
    if (nn == 0.0) return 0.0;
    v = w / nn;
    double est = std::sqrt(nn);
    if (k > 4 && std::abs(est - last) <= 1e-12 * std::max(1.0, est)) return est;
    last = est;
  }
  return last;
}

double rank_truncated_norm(const CMat& a, int rank) {
  if (a.size() == 0) return 0.0;
  Vec s = singular_values(a);
  if (rank < 0) rank = 0;
  if (rank >= s.size()) return 0.0;
  return s[rank];
}

int truncation_rank(int n) { return (n + 7) / 8; }

double hermiticity_defect(const CMat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const CMat& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

const CMat& dft_matrix(int n) {
  static std::map<int, CMat> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    const int k = dft_frequency(r, n);
    for (int j = 0; j < n; ++j) {
      const double phi = -2.0 * kPi * k * j / n;
      f(r, j) = scale * cplx(std::cos(phi), std::sin(phi));
    }
  }
  return cache.emplace(n, std::move(f)).first->second;
}

CMat fourier_multiplier(const CVec& m) {
  const int n = static_cast<int>(m.size());
  const CMat& f = dft_matrix(n);
  return f.adjoint() * m.asDiagonal() * f;
}

CMat hardy_projection(int n) {
  CVec m = CVec::Zero(n);
  for (int r = 0; r < n; ++r)
    if (dft_frequency(r, n) >= 0) m[r] = 1.0;
  return fourier_multiplier(m);
}

}  // namespace cq
