#ifndef MASSCOVER_BLOCKRATE_HPP
#define MASSCOVER_BLOCKRATE_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "masscover/extended_real.hpp"
#include "masscover/probcore.hpp"

namespace masscover {

inline constexpr double kBlockMarginalCap = 65536.0;   // |A|^k states
inline constexpr double kBlockMatrixCap = 16777216.0;  // lifted matrix entries
inline constexpr double kStationaryTol = 1e-10;

/// A finite-state Markov chain on the source alphabet.
class MarkovSource {
 public:
  /// Computes the stationary law of a row-stochastic matrix (row-major).
  static MarkovSource stationary(std::size_t states, std::vector<double> transition);

  /// Uses an explicit initial law. When marked stationary it is checked
  /// against the transition matrix within kStationaryTol.
  static MarkovSource with_initial(std::size_t states, std::vector<double> transition,
                                   ProbabilityVector initial, bool marked_stationary);

  std::size_t states() const { return states_; }
  double transition(std::size_t i, std::size_t j) const {
    return transition_[i * states_ + j];
  }
  const std::vector<double>& transition_matrix() const { return transition_; }
  const ProbabilityVector& initial() const { return initial_; }
  bool is_stationary_marked() const { return stationary_marked_; }

 private:
  MarkovSource(std::size_t states, std::vector<double> transition, ProbabilityVector initial,
               bool marked);
  std::size_t states_;
  std::vector<double> transition_;
  ProbabilityVector initial_;
  bool stationary_marked_;
};

/// Law of (X_1, ..., X_k) as a distribution over k-tuples, row-major
/// (x_1 most significant).
ProbabilityVector block_marginal(const MarkovSource& src, std::size_t k);

struct BlockRatePoint {
  std::size_t k;
  ExtendedReal per_letter_rate;  // R_k(D) / k
  double D;
};

/// Per-letter k-block rate: solves the rate function on the k-fold
/// super-alphabet with tuple mass M^k and per-letter-averaged cost.
BlockRatePoint block_rate(const MarkovSource& src, const MassVector& m,
                          const DistortionMatrix& rho, double d, std::size_t k);

struct SubadditivityRow {
  std::size_t m, n;
  double r_m, r_n, r_mn;  // unnormalized block rates
  bool holds;             // r_mn <= r_m + r_n + 1e-5
};

struct SubadditivityReport {
  std::vector<SubadditivityRow> rows;
  bool all_hold;
};

SubadditivityReport subadditivity_check(const MarkovSource& src, const MassVector& m,
                                        const DistortionMatrix& rho, double d,
                                        std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Tuple mass: log M^k(y_1..y_k) = sum_i log M(y_i), row-major tuples.
MassVector lift_mass(const MassVector& m, std::size_t k);

/// Tuple cost: rho_k(x, y) = (sum_i rho(x_i, y_i)) / k, one division at the
/// end so split/combine identities hold exactly for divisor-exact blocks.
DistortionMatrix lift_distortion(const DistortionMatrix& rho, std::size_t k);

}  // namespace masscover

#endif
