#ifndef MASSCOVER_NUMUTIL_HPP
#define MASSCOVER_NUMUTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <thread>
#include <vector>

namespace masscover {

// Probabilities at or below this are treated as exact zeros in support checks.
inline constexpr double kZeroFloor = 1e-300;

/// log(sum_i exp(x[i])), max-shifted. Empty input yields -inf.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Online log-sum-exp: add terms one at a time, read off result() at the end.
class StreamingLogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (empty_) {
      m_ = x;
      s_ = 1.0;
      empty_ = false;
    } else if (x > m_) {
      s_ = s_ * std::exp(m_ - x) + 1.0;
      m_ = x;
    } else {
      s_ += std::exp(x - m_);
    }
  }
  double result() const {
    if (empty_) return -std::numeric_limits<double>::infinity();
    return m_ + std::log(s_);
  }

 private:
  bool empty_ = true;
  double m_ = 0.0;
  double s_ = 0.0;
};

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > kZeroFloor ? x * std::log(x) : 0.0; }

/// Binary entropy in nats.
inline double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

/// Shannon entropy (nats) of a nonnegative vector summing to ~1.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) h -= xlogx(x);
  return h;
}

/// log C(n, k) via lgamma.
inline double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Runs fn(begin, end) over [0, count) split into contiguous ranges, one per
/// worker. Results must be written to per-index slots; the split is a pure
/// function of (count, threads), so output never depends on scheduling.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    fn(0, count);
    return;
  }
  std::size_t nw = std::min<std::size_t>(threads, count);
  std::size_t chunk = (count + nw - 1) / nw;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    std::size_t b = w * chunk;
    std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace masscover

#endif
