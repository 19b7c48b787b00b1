#include "masscover/blockrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "masscover/errors.hpp"
#include "masscover/numutil.hpp"
#include "masscover/ratesolver.hpp"

namespace masscover {

namespace {

void check_rows_stochastic(std::size_t states, const std::vector<double>& t) {
  if (states < 1) throw ConfigError("markov chain needs at least one state");
  if (t.size() != states * states)
    throw ConfigError("transition matrix entry count does not match state count");
  for (std::size_t i = 0; i < states; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < states; ++j) {
      double v = t[i * states + j];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("transition entries must be finite and nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
      throw ConfigError("transition rows must sum to 1");
  }
}

// Solves pi T = pi, sum pi = 1 by Gaussian elimination on (T^t - I) with the
// last row replaced by the normalization constraint.
std::vector<double> stationary_law(std::size_t k, const std::vector<double>& t) {
  std::vector<double> a(k * k, 0.0), b(k, 0.0);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a[i * k + j] = t[j * k + i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) a[(k - 1) * k + j] = 1.0;
  b[k - 1] = 1.0;

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (std::abs(a[piv * k + col]) < 1e-14)
      throw ConfigError("transition matrix has no unique stationary law");
    if (piv != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[piv * k + j], a[col * k + j]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = a[r * k + col] / a[col * k + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < k; ++j) a[r * k + j] -= f * a[col * k + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = b[i] / a[i * k + i];
  double norm = 0.0;
  for (double& v : pi) {
    v = std::max(v, 0.0);
    norm += v;
  }
  for (double& v : pi) v /= norm;
  return pi;
}

}  // namespace

MarkovSource::MarkovSource(std::size_t states, std::vector<double> transition,
                           ProbabilityVector initial, bool marked)
    : states_(states),
      transition_(std::move(transition)),
      initial_(std::move(initial)),
      stationary_marked_(marked) {
  if (initial_.size() != states_)
    throw ConfigError("initial law dimension does not match state count");
  if (stationary_marked_) {
    for (std::size_t j = 0; j < states_; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < states_; ++i)
        v += initial_[i] * transition_[i * states_ + j];
      if (std::abs(v - initial_[j]) > kStationaryTol)
        throw ConfigError("initial law is not stationary for the transition matrix");
    }
  }
}

MarkovSource MarkovSource::stationary(std::size_t states, std::vector<double> transition) {
  check_rows_stochastic(states, transition);
  ProbabilityVector pi(stationary_law(states, transition));
  return MarkovSource(states, std::move(transition), std::move(pi), true);
}

MarkovSource MarkovSource::with_initial(std::size_t states, std::vector<double> transition,
                                        ProbabilityVector initial, bool marked_stationary) {
  check_rows_stochastic(states, transition);
  return MarkovSource(states, std::move(transition), std::move(initial), marked_stationary);
}

ProbabilityVector block_marginal(const MarkovSource& src, std::size_t k) {
  if (k < 1) throw ConfigError("block length must be >= 1");
  const std::size_t s = src.states();
  double total = std::pow(static_cast<double>(s), static_cast<double>(k));
  if (!(total <= kBlockMarginalCap))
    throw ConfigError("block marginal too large (|A|^k over cap)");
  std::size_t count = static_cast<std::size_t>(total);

  std::vector<double> p(count);
  std::vector<std::size_t> digits(k, 0);
  for (std::size_t idx = 0; idx < count; ++idx) {
    // row-major: x_1 is the most significant digit
    std::size_t rem = idx;
    for (std::size_t i = k; i-- > 0;) {
      digits[i] = rem % s;
      rem /= s;
    }
    double v = src.initial()[digits[0]];
    for (std::size_t i = 1; i < k; ++i) v *= src.transition(digits[i - 1], digits[i]);
    p[idx] = v;
  }
  return ProbabilityVector(std::move(p));
}

MassVector lift_mass(const MassVector& m, std::size_t k) {
  const std::size_t s = m.size();
  double total = std::pow(static_cast<double>(s), static_cast<double>(k));
  if (!(total <= kBlockMarginalCap)) throw ConfigError("lifted mass too large");
  std::size_t count = static_cast<std::size_t>(total);
  std::vector<double> lm(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      sum += m.log_at(rem % s);
      rem /= s;
    }
    lm[idx] = sum;
  }
  return MassVector::from_log(std::move(lm));
}

DistortionMatrix lift_distortion(const DistortionMatrix& rho, std::size_t k) {
  const std::size_t a = rho.rows(), b = rho.cols();
  double ra = std::pow(static_cast<double>(a), static_cast<double>(k));
  double rb = std::pow(static_cast<double>(b), static_cast<double>(k));
  if (!(ra * rb <= kBlockMatrixCap)) throw ConfigError("lifted distortion too large");
  std::size_t rows = static_cast<std::size_t>(ra), cols = static_cast<std::size_t>(rb);

  std::vector<double> out(rows * cols);
  std::vector<std::size_t> xd(k), yd(k);
  for (std::size_t x = 0; x < rows; ++x) {
    std::size_t rem = x;
    for (std::size_t i = k; i-- > 0;) {
      xd[i] = rem % a;
      rem /= a;
    }
    for (std::size_t y = 0; y < cols; ++y) {
      std::size_t r2 = y;
      for (std::size_t i = k; i-- > 0;) {
        yd[i] = r2 % b;
        r2 /= b;
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += rho.at(xd[i], yd[i]);
      out[x * cols + y] = sum / static_cast<double>(k);
    }
  }
  return DistortionMatrix(rows, cols, std::move(out));
}

BlockRatePoint block_rate(const MarkovSource& src, const MassVector& m,
                          const DistortionMatrix& rho, double d, std::size_t k) {
  if (rho.rows() != src.states())
    throw ConfigError("distortion rows must match source alphabet");
  if (rho.cols() != m.size())
    throw ConfigError("distortion columns must match reproduction alphabet");

  ProbabilityVector pk = block_marginal(src, k);
  StrippedLaw law = strip_zero_symbols(pk);
  DistortionMatrix rho_k = lift_distortion(rho, k);
  if (law.changed) rho_k = rho_k.select_rows(law.kept);
  MassVector m_k = lift_mass(m, k);

  RatePoint pt = solve_rate(law.p, m_k, rho_k, d);
  double per_letter = pt.R.value() / static_cast<double>(k);
  return BlockRatePoint{k, ExtendedReal(per_letter), d};
}

SubadditivityReport subadditivity_check(
    const MarkovSource& src, const MassVector& m, const DistortionMatrix& rho, double d,
    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  SubadditivityReport rep;
  rep.all_hold = true;
  for (auto [bm, bn] : pairs) {
    double rm = block_rate(src, m, rho, d, bm).per_letter_rate.value() *
                static_cast<double>(bm);
    double rn = block_rate(src, m, rho, d, bn).per_letter_rate.value() *
                static_cast<double>(bn);
    double rmn = block_rate(src, m, rho, d, bm + bn).per_letter_rate.value() *
                 static_cast<double>(bm + bn);
    bool holds = rmn <= rm + rn + 1e-5;
    rep.rows.push_back(SubadditivityRow{bm, bn, rm, rn, rmn, holds});
    rep.all_hold = rep.all_hold && holds;
  }
  return rep;
}

}  // namespace masscover
