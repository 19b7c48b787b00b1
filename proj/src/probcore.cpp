#include "masscover/probcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "masscover/errors.hpp"
#include "masscover/numutil.hpp"

namespace masscover {

namespace {

std::vector<std::string> default_labels(std::size_t size) {
  std::vector<std::string> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) out.push_back(std::to_string(i));
  return out;
}

}  // namespace

Alphabet::Alphabet(std::size_t size_in) : Alphabet(size_in, default_labels(size_in)) {}

Alphabet::Alphabet(std::size_t size_in, std::vector<std::string> labels_in)
    : size(size_in), labels(std::move(labels_in)) {
  if (size < 1) throw ConfigError("alphabet must have at least one symbol");
  if (labels.size() != size) throw ConfigError("alphabet label count does not match size");
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() != size) throw ConfigError("alphabet labels must be distinct");
}

namespace {

// Kahan-compensated sum so long vectors (block marginals) do not accumulate
// enough error to trip the simplex tolerance.
double stable_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ConfigError("probability vector must be nonempty");
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ConfigError("probability entries must be finite and nonnegative");
  }
  double sum = stable_sum(probs_);
  if (std::abs(sum - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os << "probability vector sums to " << sum << ", outside tolerance " << kSimplexTol;
    throw ConfigError(os.str());
  }
  // Skip the division when it could only shuffle last bits; this keeps
  // serialization round trips exact.
  if (std::abs(sum - 1.0) > 1e-15) {
    for (double& p : probs_) p /= sum;
  }
  logs_.resize(probs_.size());
  for (std::size_t i = 0; i < probs_.size(); ++i)
    logs_[i] = probs_[i] > kZeroFloor ? std::log(probs_[i])
                                      : -std::numeric_limits<double>::infinity();
}

bool ProbabilityVector::strictly_positive() const {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > kZeroFloor; });
}

ProbabilityVector ProbabilityVector::point_mass(std::size_t i, std::size_t size) {
  std::vector<double> p(size, 0.0);
  p.at(i) = 1.0;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector ProbabilityVector::uniform(std::size_t size) {
  return ProbabilityVector(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

StrippedLaw strip_zero_symbols(const ProbabilityVector& p) {
  std::vector<std::size_t> kept;
  std::vector<double> vals;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > kZeroFloor) {
      kept.push_back(i);
      vals.push_back(p[i]);
    }
  }
  if (kept.empty()) throw ConfigError("source law has no positive-probability symbols");
  bool changed = kept.size() != p.size();
  return StrippedLaw{ProbabilityVector(std::move(vals)), std::move(kept), changed};
}

ProbabilityVector EmpiricalMeasure::to_probability() const {
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return ProbabilityVector(std::move(p));
}

EmpiricalMeasure empirical_measure(std::span<const std::uint8_t> y, std::size_t alphabet_size) {
  if (y.empty()) throw ConfigError("empirical measure of an empty string");
  EmpiricalMeasure em;
  em.counts.assign(alphabet_size, 0);
  em.n = y.size();
  for (std::uint8_t s : y) {
    if (s >= alphabet_size) throw ConfigError("symbol out of alphabet range");
    ++em.counts[s];
  }
  return em;
}

MassVector::MassVector(std::vector<double> log_mass, std::vector<double> mass)
    : log_mass_(std::move(log_mass)), mass_(std::move(mass)) {
  if (log_mass_.empty()) throw ConfigError("mass vector must be nonempty");
  for (double lm : log_mass_) {
    if (!std::isfinite(lm))
      throw ConfigError("log-mass entries must be finite (M strictly positive and bounded)");
  }
}

MassVector MassVector::from_mass(const std::vector<double>& mass) {
  std::vector<double> lm(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (!(mass[i] > 0.0) || !std::isfinite(mass[i]))
      throw ConfigError("mass entries must be finite and strictly positive");
    lm[i] = std::log(mass[i]);
  }
  return MassVector(std::move(lm), mass);
}

MassVector MassVector::from_log(std::vector<double> log_mass) {
  std::vector<double> mass(log_mass.size());
  for (std::size_t i = 0; i < log_mass.size(); ++i) mass[i] = std::exp(log_mass[i]);
  return MassVector(std::move(log_mass), std::move(mass));
}

MassVector MassVector::ones(std::size_t size) {
  return MassVector(std::vector<double>(size, 0.0), std::vector<double>(size, 1.0));
}

double MassVector::r_min() const {
  return *std::min_element(log_mass_.begin(), log_mass_.end());
}

DistortionMatrix::DistortionMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ < 1 || cols_ < 1) throw ConfigError("distortion matrix must be nonempty");
  if (entries_.size() != rows_ * cols_)
    throw ConfigError("distortion matrix entry count does not match dimensions");
  rho_max_ = 0.0;
  for (double e : entries_) {
    if (!(e >= 0.0) || !std::isfinite(e))
      throw ConfigError("distortion entries must be finite and nonnegative");
    rho_max_ = std::max(rho_max_, e);
  }
}

DistortionMatrix DistortionMatrix::hamming(std::size_t size) {
  std::vector<double> e(size * size, 1.0);
  for (std::size_t i = 0; i < size; ++i) e[i * size + i] = 0.0;
  return DistortionMatrix(size, size, std::move(e));
}

std::vector<double> DistortionMatrix::row_minima() const {
  std::vector<double> mins(rows_);
  for (std::size_t x = 0; x < rows_; ++x) {
    double m = entries_[x * cols_];
    for (std::size_t y = 1; y < cols_; ++y) m = std::min(m, entries_[x * cols_ + y]);
    mins[x] = m;
  }
  return mins;
}

bool DistortionMatrix::rows_have_zero() const {
  auto mins = row_minima();
  return std::all_of(mins.begin(), mins.end(), [](double m) { return m == 0.0; });
}

DistortionMatrix DistortionMatrix::select_rows(std::span<const std::size_t> keep) const {
  std::vector<double> out;
  out.reserve(keep.size() * cols_);
  for (std::size_t x : keep) {
    if (x >= rows_) throw ConfigError("row index out of range in select_rows");
    out.insert(out.end(), entries_.begin() + x * cols_, entries_.begin() + (x + 1) * cols_);
  }
  return DistortionMatrix(keep.size(), cols_, std::move(out));
}

DistortionMatrix normalize_distortion(const DistortionMatrix& rho) {
  auto mins = rho.row_minima();
  std::vector<double> out(rho.entries());
  for (std::size_t x = 0; x < rho.rows(); ++x)
    for (std::size_t y = 0; y < rho.cols(); ++y) out[x * rho.cols() + y] -= mins[x];
  return DistortionMatrix(rho.rows(), rho.cols(), std::move(out));
}

namespace {

std::vector<double> validate_joint(std::size_t rows, std::size_t cols,
                                   std::vector<double> joint) {
  if (joint.size() != rows * cols)
    throw ConfigError("coupling entry count does not match dimensions");
  for (double w : joint)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("coupling entries must be finite and nonnegative");
  return joint;
}

std::vector<double> marginal_rows(std::size_t rows, std::size_t cols,
                                  const std::vector<double>& joint) {
  std::vector<double> m(rows, 0.0);
  for (std::size_t x = 0; x < rows; ++x)
    for (std::size_t y = 0; y < cols; ++y) m[x] += joint[x * cols + y];
  return m;
}

std::vector<double> marginal_cols(std::size_t rows, std::size_t cols,
                                  const std::vector<double>& joint) {
  std::vector<double> m(cols, 0.0);
  for (std::size_t x = 0; x < rows; ++x)
    for (std::size_t y = 0; y < cols; ++y) m[y] += joint[x * cols + y];
  return m;
}

}  // namespace

Coupling::Coupling(std::size_t rows, std::size_t cols, std::vector<double> joint)
    : rows_(rows),
      cols_(cols),
      joint_(validate_joint(rows, cols, std::move(joint))),
      row_marginal_(marginal_rows(rows, cols, joint_)),
      col_marginal_(marginal_cols(rows, cols, joint_)) {
  // Total-mass tolerance is enforced by the marginal ProbabilityVector
  // constructors (their sums equal the joint total).
}

Coupling Coupling::with_declared_marginal(std::size_t rows, std::size_t cols,
                                          std::vector<double> joint,
                                          const ProbabilityVector& p) {
  Coupling w(rows, cols, std::move(joint));
  if (p.size() != rows) throw ConfigError("declared marginal has wrong dimension");
  for (std::size_t x = 0; x < rows; ++x) {
    if (std::abs(w.row_marginal()[x] - p[x]) > kCouplingMarginalTol)
      throw ConfigError("coupling row marginal does not match declared source law");
  }
  return w;
}

double Coupling::expected_cost(const DistortionMatrix& rho) const {
  if (rho.rows() != rows_ || rho.cols() != cols_)
    throw ConfigError("distortion matrix dimensions do not match coupling");
  double d = 0.0;
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) d += joint_[x * cols_ + y] * rho.at(x, y);
  return d;
}

ExtendedReal relative_entropy(const ProbabilityVector& mu, const ProbabilityVector& nu) {
  if (mu.size() != nu.size())
    throw ConfigError("relative entropy requires distributions on the same alphabet");
  double h = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    if (mu[s] <= kZeroFloor) continue;  // 0 log(0/q) = 0
    if (nu[s] <= kZeroFloor) return ExtendedReal::infinity();
    h += mu[s] * (mu.log_probs()[s] - nu.log_probs()[s]);
  }
  return ExtendedReal(std::max(h, 0.0));
}

double mutual_information(const Coupling& w) {
  const auto& px = w.row_marginal();
  const auto& qy = w.col_marginal();
  double info = 0.0;
  for (std::size_t x = 0; x < w.rows(); ++x) {
    for (std::size_t y = 0; y < w.cols(); ++y) {
      double v = w.at(x, y);
      if (v <= kZeroFloor) continue;
      info += v * std::log(v / (px[x] * qy[y]));
    }
  }
  return std::max(info, 0.0);
}

}  // namespace masscover
