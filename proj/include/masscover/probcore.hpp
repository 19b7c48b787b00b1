#ifndef MASSCOVER_PROBCORE_HPP
#define MASSCOVER_PROBCORE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "masscover/extended_real.hpp"

namespace masscover {

// Construction tolerances. Vectors whose mass is within kSimplexTol of 1 are
// renormalized; anything further off is rejected.
inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kCouplingMarginalTol = 1e-9;

/// A finite alphabet: a size plus distinct display labels. All other types
/// index into 0..size-1. Both the source and the reproduction alphabet are
/// instances of this type.
struct Alphabet {
  explicit Alphabet(std::size_t size);
  Alphabet(std::size_t size, std::vector<std::string> labels);

  std::size_t size;
  std::vector<std::string> labels;
};

/// A probability distribution on a finite alphabet. Entries are nonnegative
/// and sum to one; natural logs of the entries are kept alongside.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& log_probs() const { return logs_; }
  bool strictly_positive() const;

  /// Point mass at symbol i.
  static ProbabilityVector point_mass(std::size_t i, std::size_t size);
  static ProbabilityVector uniform(std::size_t size);

 private:
  std::vector<double> probs_;
  std::vector<double> logs_;
};

/// Result of dropping zero-probability symbols from a source law. kept[i]
/// is the original index of new symbol i.
struct StrippedLaw {
  ProbabilityVector p;
  std::vector<std::size_t> kept;
  bool changed;
};

/// Drops symbols with zero probability and records the index remap.
StrippedLaw strip_zero_symbols(const ProbabilityVector& p);

/// Integer symbol counts of a string of length n.
struct EmpiricalMeasure {
  std::vector<std::int64_t> counts;
  std::size_t n;

  ProbabilityVector to_probability() const;
};

/// Per-symbol counts of a string over an alphabet of the given size.
EmpiricalMeasure empirical_measure(std::span<const std::uint8_t> y, std::size_t alphabet_size);

/// A strictly positive mass function on the reproduction alphabet, stored in
/// the natural-log domain. All entries must be finite.
class MassVector {
 public:
  static MassVector from_mass(const std::vector<double>& mass);
  static MassVector from_log(std::vector<double> log_mass);
  static MassVector ones(std::size_t size);

  std::size_t size() const { return log_mass_.size(); }
  const std::vector<double>& log_mass() const { return log_mass_; }
  double log_at(std::size_t y) const { return log_mass_[y]; }
  /// Mass-domain values; verbatim from from_mass, exp of the logs otherwise.
  const std::vector<double>& mass() const { return mass_; }
  double r_min() const;

 private:
  MassVector(std::vector<double> log_mass, std::vector<double> mass);
  std::vector<double> log_mass_;
  std::vector<double> mass_;
};

/// The single-letter cost rho(x, y) >= 0 on A x Ahat, row-major.
class DistortionMatrix {
 public:
  DistortionMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DistortionMatrix hamming(std::size_t size);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t x, std::size_t y) const { return entries_[x * cols_ + y]; }
  const std::vector<double>& entries() const { return entries_; }
  double rho_max() const { return rho_max_; }

  /// Minimum entry of each row.
  std::vector<double> row_minima() const;
  bool rows_have_zero() const;

  /// Keeps only the given rows, in order.
  DistortionMatrix select_rows(std::span<const std::size_t> keep) const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> entries_;
  double rho_max_;
};

/// Subtracts each row's minimum so every row contains a zero. Idempotent.
DistortionMatrix normalize_distortion(const DistortionMatrix& rho);

/// A joint distribution on A x Ahat with cached marginals.
class Coupling {
 public:
  /// Validates nonnegativity and total mass within kSimplexTol of 1.
  Coupling(std::size_t rows, std::size_t cols, std::vector<double> joint);

  /// Additionally checks the row marginal against a declared source law
  /// within kCouplingMarginalTol.
  static Coupling with_declared_marginal(std::size_t rows, std::size_t cols,
                                         std::vector<double> joint,
                                         const ProbabilityVector& p);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t x, std::size_t y) const { return joint_[x * cols_ + y]; }
  const std::vector<double>& joint() const { return joint_; }
  const ProbabilityVector& row_marginal() const { return row_marginal_; }
  const ProbabilityVector& col_marginal() const { return col_marginal_; }

  /// E_W[rho(X, Y)].
  double expected_cost(const DistortionMatrix& rho) const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> joint_;
  ProbabilityVector row_marginal_;
  ProbabilityVector col_marginal_;
};

/// Relative entropy H(mu || nu) in nats, with 0 log 0 = 0. Infinite when mu
/// puts mass where nu does not.
ExtendedReal relative_entropy(const ProbabilityVector& mu, const ProbabilityVector& nu);

/// I(X;Y) = H(W || W_X x W_Y) in nats. Always finite and nonnegative.
double mutual_information(const Coupling& w);

}  // namespace masscover

#endif
