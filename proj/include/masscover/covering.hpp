#ifndef MASSCOVER_COVERING_HPP
#define MASSCOVER_COVERING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "masscover/probcore.hpp"

namespace masscover {

inline constexpr std::uint64_t kRejectionBudget = 1000000;   // per word
inline constexpr double kMaxCodebookWords = 1e7;
inline constexpr double kExactEnumerationCap = 4194304.0;    // |A|^n <= 2^22
inline constexpr double kConverseSlack = 1e-6;               // solver tolerance allowance
inline constexpr double kDistCompareTol = 1e-12;             // closed-ball float slack

using Word = std::vector<std::uint8_t>;

/// No conditioning: plain product sampling.
struct NoRule {};

/// Keep words whose empirical measure exceeds the target law by at most
/// delta on every symbol.
struct TypeBallRule {
  double delta;
};

/// Keep words whose per-letter log-mass is at most cap. Carries the
/// per-symbol log-mass it is evaluated against.
struct MassCapRule {
  double cap;
  std::vector<double> log_mass;
};

using ConditioningRule = std::variant<NoRule, TypeBallRule, MassCapRule>;

struct CodebookMeta {
  ProbabilityVector q_star;
  ConditioningRule rule;
  std::uint64_t seed;
  double target_size_exponent;
  double rejection_rate;   // rejected / proposed during generation
  bool fallback_used;      // constant-word fallback was taken
};

/// An ordered multiset of reproduction words of common length n.
struct Codebook {
  std::size_t n;
  std::vector<Word> words;
  CodebookMeta meta;
};

enum class CoverageMode { Exact, MonteCarlo };

struct CoverageReport {
  std::size_t n;
  double coverage;             // P^n mass of the D-blowup of the codebook
  double coverage_ci;          // 95% half-width; 0 in exact mode
  double expected_distortion;  // E_{P^n} rho_n(X, C)
  double mass_exponent;        // (1/n) log M^n(C); NaN when no mass given
  CoverageMode mode;
  std::uint64_t samples;
  std::uint64_t seed;
};

/// Draws IID words from (q_star)^n conditioned on the rule, by rejection.
/// Word count is ceil(exp(n * size_exponent)) unless size_override is set.
/// Exhausting the rejection budget raises an error naming the observed
/// acceptance rate, unless fallback_symbol opts into the constant-word
/// fallback for an infeasible conditioning set.
Codebook sample_codebook(const ProbabilityVector& q_star, std::size_t n,
                         const ConditioningRule& rule, double size_exponent,
                         std::uint64_t seed,
                         std::optional<std::uint8_t> fallback_symbol = std::nullopt,
                         std::optional<std::size_t> size_override = std::nullopt);

struct NearestResult {
  std::size_t index;
  double distortion;
};

/// Closest codeword under rho_n, ties to the lowest index.
NearestResult nearest_word(const Word& x, const Codebook& cb, const DistortionMatrix& rho);

/// Full-enumeration coverage of the D-blowup plus exact expected distortion.
CoverageReport coverage_exact(const Codebook& cb, const ProbabilityVector& p,
                              const DistortionMatrix& rho, double d,
                              const MassVector* mass = nullptr);

/// Seeded Monte Carlo coverage. Samples are pre-partitioned into fixed
/// chunks with derived substream seeds, so counts are identical for any
/// thread count.
CoverageReport coverage_mc(const Codebook& cb, const ProbabilityVector& p,
                           const DistortionMatrix& rho, double d, std::uint64_t samples,
                           std::uint64_t seed, const MassVector* mass = nullptr,
                           int threads = 1);

/// (1/n) log M^n(C) over the ordered word list (duplicates count).
double mass_exponent(const Codebook& cb, const MassVector& mass);

struct ConverseCheck {
  double D;     // exact E_{P^n} rho_n(X, C)
  double lhs;   // (1/n) log M^n of the deduplicated codebook
  double rhs;   // R(D; P, M)
  bool holds;   // lhs >= rhs - kConverseSlack
  std::size_t multiset_size;
  std::size_t set_size;
};

/// Checks the finite-n mass lower bound against the rate function, with the
/// distortion computed by full enumeration and the codebook deduplicated.
ConverseCheck verify_converse(const Codebook& cb, const ProbabilityVector& p,
                              const MassVector& mass, const DistortionMatrix& rho);

enum class ConditioningKind { TypeBall, MassCap };

struct TracePoint {
  CoverageReport report;
  double rejection_rate;
  double target_rate;      // R(D) + epsilon, the certified mass cap
  std::size_t codebook_size;
  double delta_used;       // TypeBall slack actually chosen (0 for MassCap)
};

/// Builds the sampled-codebook construction at each n and measures coverage
/// and mass. Every codebook's mass exponent is asserted against
/// R(D) + epsilon; a violation throws rather than reports.
std::vector<TracePoint> achievability_trace(
    const ProbabilityVector& p, const MassVector& mass, const DistortionMatrix& rho,
    double d, double epsilon, std::span<const std::size_t> n_list, std::uint64_t seed,
    std::uint64_t samples, ConditioningKind kind = ConditioningKind::TypeBall,
    int threads = 1, bool allow_constant_fallback = false);

struct SteinPoint {
  std::size_t n;
  double alpha_n;             // P1^n(C_n^c), exact
  double log_beta_n_over_n;   // (1/n) log P2^n(C_n), exact
};

/// Binary typical-set decision regions with shrinking slack, evaluated by
/// exact log-domain binomial sums. The seed is accepted for interface parity
/// but unused: nothing here is sampled.
std::vector<SteinPoint> stein_experiment(const ProbabilityVector& p1,
                                         const ProbabilityVector& p2,
                                         std::span<const std::size_t> n_list,
                                         std::uint64_t seed);

struct BlowupReport {
  std::size_t trials;
  std::size_t violations;
  double min_margin;  // min over trials of lhs - rhs
};

/// Exact check of the product-measure blowup inequality
/// P^n([C]_D) >= 1 - exp(-n D^2 / 2) / P^n(C) on random nonempty subsets of
/// the binary cube.
BlowupReport blowup_inequality_check(const ProbabilityVector& p, std::size_t n, double d,
                                     std::size_t trials, std::uint64_t seed);

}  // namespace masscover

#endif
