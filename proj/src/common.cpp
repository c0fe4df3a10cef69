#include "coarsequant/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace cq {

double CounterRng::normal() {
  // Box-Muller; draw pairs fresh each call so the stream is stateless
  // apart from the counter.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Vec CounterRng::normal_vec(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

CMat CounterRng::cnormal_mat(int rows, int cols) {
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cnormal();
  return m;
}

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

CMat pairwise_sum(const std::vector<CMat>& terms) {
  if (terms.empty()) return CMat();
  std::vector<CMat> level = terms;
  while (level.size() > 1) {
    std::vector<CMat> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(level[i] + level[i + 1]);
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

void PairwiseAccumulator::add(CMat term) {
  int level = 0;
  while (!stack_.empty() && stack_.back().first == level) {
    term = stack_.back().second + term;
    stack_.pop_back();
    ++level;
  }
  stack_.emplace_back(level, std::move(term));
}

CMat PairwiseAccumulator::result() const {
  if (stack_.empty()) return CMat();
  CMat sum = stack_.front().second;
  for (std::size_t i = 1; i < stack_.size(); ++i) sum += stack_[i].second;
  return sum;
}

std::vector<Vec> cumulative_integral(const std::vector<Vec>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<Vec> out(n);
  if (n == 0) return out;
  const int dim = static_cast<int>(f[0].size());
  out[0] = Vec::Zero(dim);
  if (n == 1) return out;
  // Integrate step by step with the cubic through the four nearest samples.
  // Weights below are the exact integrals of the Lagrange basis over one step.
  for (int i = 0; i + 1 < n; ++i) {
    Vec inc;
    if (n < 4) {
      inc = 0.5 * h * (f[i] + f[i + 1]);  // degenerate short input
    } else {
      int j = i - 1;
      if (j < 0) j = 0;
      if (j > n - 4) j = n - 4;
      const double s = static_cast<double>(i - j);  // 0, 1 or 2
      // \int_s^{s+1} of cubic Lagrange basis on nodes {0,1,2,3}
      auto w = [s](int k) {
        auto antider = [k](double x) {
          // antiderivative of l_k(x), nodes 0..3, denominators -6,2,-2,6
          double a, b, c, dd;
          switch (k) {
            case 0: a = 1, b = -6, c = 11, dd = -6; break;   // (x-1)(x-2)(x-3)
            case 1: a = 1, b = -5, c = 6, dd = 0;  break;    // x(x-2)(x-3)
            case 2: a = 1, b = -4, c = 3, dd = 0;  break;    // x(x-1)(x-3)
            default: a = 1, b = -3, c = 2, dd = 0; break;    // x(x-1)(x-2)
          }
          double v = a * x * x * x * x / 4 + b * x * x * x / 3 +
                     c * x * x / 2 + dd * x;
          static const double den[4] = {-6, 2, -2, 6};
          return v / den[k];
        };
        return antider(s + 1.0) - antider(s);
      };
      inc = h * (w(0) * f[j] + w(1) * f[j + 1] + w(2) * f[j + 2] +
                 w(3) * f[j + 3]);
    }
    out[i + 1] = out[i] + inc;
  }
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nw = std::min(threads, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() { return g_threads.load(); }

void set_default_threads(int n) { g_threads.store(n < 1 ? 1 : n); }

}  // namespace cq
