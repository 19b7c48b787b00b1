#include "masscover/covering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "masscover/errors.hpp"
#include "masscover/numutil.hpp"
#include "masscover/ratesolver.hpp"
#include "masscover/rng.hpp"

namespace masscover {

namespace {

constexpr std::uint64_t kMcChunk = 4096;

std::vector<double> cdf_of(const ProbabilityVector& p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

bool rule_accepts(const ConditioningRule& rule, const Word& w, std::size_t n,
                  const ProbabilityVector& q_star) {
  if (std::holds_alternative<NoRule>(rule)) return true;
  if (const auto* tb = std::get_if<TypeBallRule>(&rule)) {
    std::vector<std::int64_t> counts(q_star.size(), 0);
    for (std::uint8_t s : w) ++counts[s];
    for (std::size_t b = 0; b < q_star.size(); ++b) {
      double cap = static_cast<double>(n) * (q_star[b] + tb->delta) + 1e-9;
      if (static_cast<double>(counts[b]) > cap) return false;
    }
    return true;
  }
  const auto& mc = std::get<MassCapRule>(rule);
  double lm = 0.0;
  for (std::uint8_t s : w) lm += mc.log_mass[s];
  return lm <= static_cast<double>(n) * mc.cap + 1e-9;
}

double word_log_mass(const Word& w, const MassVector& mass) {
  double lm = 0.0;
  for (std::uint8_t s : w) lm += mass.log_at(s);
  return lm;
}

// Weighted-popcount evaluator for binary words with zero-diagonal cost.
struct PackedEval {
  std::vector<std::uint64_t> words;
  double w01, w10;     // rho(0,1), rho(1,0)
  std::size_t n;
  std::uint64_t mask;

  static std::optional<PackedEval> make(const Codebook& cb, const DistortionMatrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2 || cb.n > 64) return std::nullopt;
    if (rho.at(0, 0) != 0.0 || rho.at(1, 1) != 0.0) return std::nullopt;
    PackedEval pe;
    pe.w01 = rho.at(0, 1);
    pe.w10 = rho.at(1, 0);
    pe.n = cb.n;
    pe.mask = cb.n == 64 ? ~0ULL : ((1ULL << cb.n) - 1);
    pe.words.reserve(cb.words.size());
    for (const Word& w : cb.words) pe.words.push_back(pack(w));
    return pe;
  }

  static std::uint64_t pack(const Word& w) {
    std::uint64_t b = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i]) b |= 1ULL << i;
    return b;
  }

  // min over words of rho_n(x, word), in per-letter units
  double min_distortion(std::uint64_t x) const {
    if (w01 == w10) {
      int best = 65;
      for (std::uint64_t w : words) {
        int d = std::popcount((x ^ w) & mask);
        if (d < best) {
          best = d;
          if (best == 0) break;
        }
      }
      return w01 * static_cast<double>(best) / static_cast<double>(n);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t w : words) {
      double c01 = static_cast<double>(std::popcount(~x & w & mask));
      double c10 = static_cast<double>(std::popcount(x & ~w & mask));
      best = std::min(best, w01 * c01 + w10 * c10);
    }
    return best / static_cast<double>(n);
  }
};

double generic_min_distortion(const Word& x, const Codebook& cb, const DistortionMatrix& rho) {
  double best = std::numeric_limits<double>::infinity();
  for (const Word& w : cb.words) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += rho.at(x[i], w[i]);
    best = std::min(best, s);
  }
  return best / static_cast<double>(x.size());
}

void check_codebook_instance(const Codebook& cb, const ProbabilityVector& p,
                             const DistortionMatrix& rho) {
  if (cb.words.empty()) throw ConfigError("codebook is empty");
  if (rho.rows() != p.size()) throw ConfigError("distortion rows must match source alphabet");
  for (const Word& w : cb.words) {
    if (w.size() != cb.n) throw ConfigError("codebook word length mismatch");
    for (std::uint8_t s : w)
      if (s >= rho.cols()) throw ConfigError("codebook symbol out of alphabet range");
  }
}

}  // namespace

Codebook sample_codebook(const ProbabilityVector& q_star, std::size_t n,
                         const ConditioningRule& rule, double size_exponent,
                         std::uint64_t seed, std::optional<std::uint8_t> fallback_symbol,
                         std::optional<std::size_t> size_override) {
  if (n < 1) throw ConfigError("block length must be >= 1");
  if (q_star.size() > 256) throw ConfigError("reproduction alphabet too large for words");
  std::size_t size;
  if (size_override) {
    size = *size_override;
  } else {
    double raw = std::exp(static_cast<double>(n) * size_exponent);
    if (!(raw <= kMaxCodebookWords))
      throw ConfigError("requested codebook size exceeds the sampling cap");
    size = static_cast<std::size_t>(std::ceil(raw));
  }
  if (size < 1) size = 1;

  Codebook cb{n,
              {},
              CodebookMeta{q_star, rule, seed, size_exponent, 0.0, false}};
  cb.words.reserve(size);

  auto cdf = cdf_of(q_star);
  CounterRng rng(seed);
  Word w(n);
  std::uint64_t accepted = 0, rejected = 0;
  while (accepted < size) {
    std::uint64_t consecutive = 0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i)
        w[i] = static_cast<std::uint8_t>(sample_categorical(rng, cdf));
      if (rule_accepts(rule, w, n, q_star)) break;
      ++rejected;
      if (++consecutive >= kRejectionBudget) {
        double rate = static_cast<double>(accepted) /
                      static_cast<double>(accepted + rejected);
        if (fallback_symbol) {
          // Conditioning set is (practically) empty at this n: collapse to
          // the constant word, as opted in.
          Word cw(n, *fallback_symbol);
          cb.words.assign(size, cw);
          cb.meta.fallback_used = true;
          cb.meta.rejection_rate =
              static_cast<double>(rejected) / static_cast<double>(rejected + accepted + 1);
          return cb;
        }
        std::ostringstream os;
        os << "rejection budget exhausted sampling word " << accepted + 1 << " of " << size
           << " at n = " << n << "; empirical acceptance rate " << rate
           << " (conditioning too tight for this block length)";
        throw SolveError(os.str());
      }
    }
    cb.words.push_back(w);
    ++accepted;
  }
  cb.meta.rejection_rate =
      static_cast<double>(rejected) / static_cast<double>(rejected + accepted);
  return cb;
}

NearestResult nearest_word(const Word& x, const Codebook& cb, const DistortionMatrix& rho) {
  if (cb.words.empty()) throw ConfigError("codebook is empty");
  if (x.size() != cb.n) throw ConfigError("string length does not match codebook");
  NearestResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < cb.words.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += rho.at(x[j], cb.words[i][j]);
    s /= static_cast<double>(x.size());
    if (s < best.distortion) best = NearestResult{i, s};
  }
  return best;
}

namespace {

// Shared full-enumeration pass: coverage at budget d plus exact expected
// minimum distortion.
struct ExactSums {
  double coverage;
  double expected_distortion;
  std::uint64_t points;
};

// Sums are normalized by the enumerated total mass, so an all-covered
// instance reports coverage exactly 1.
ExactSums enumerate_exact(const Codebook& cb, const ProbabilityVector& p,
                          const DistortionMatrix& rho, double d) {
  const std::size_t na = p.size();
  double total = std::pow(static_cast<double>(na), static_cast<double>(cb.n));
  if (!(total <= kExactEnumerationCap))
    throw ConfigError("instance too large for exact enumeration (|A|^n over cap)");
  std::uint64_t count = static_cast<std::uint64_t>(total);

  double covered = 0.0, distortion = 0.0, mass = 0.0;
  auto packed = na == 2 ? PackedEval::make(cb, rho) : std::nullopt;
  if (packed) {
    // Weight by popcount class: P^n(x) depends only on the number of ones.
    std::vector<double> wt(cb.n + 1);
    for (std::size_t k = 0; k <= cb.n; ++k) {
      double v = 1.0;
      for (std::size_t i = 0; i < k; ++i) v *= p[1];
      for (std::size_t i = k; i < cb.n; ++i) v *= p[0];
      wt[k] = v;
    }
    for (std::uint64_t x = 0; x < count; ++x) {
      double md = packed->min_distortion(x);
      double w = wt[static_cast<std::size_t>(std::popcount(x))];
      if (md <= d + kDistCompareTol) covered += w;
      distortion += w * md;
      mass += w;
    }
  } else {
    Word x(cb.n, 0);
    for (std::uint64_t idx = 0;; ++idx) {
      double w = 1.0;
      for (std::size_t i = 0; i < cb.n; ++i) w *= p[x[i]];
      double md = generic_min_distortion(x, cb, rho);
      if (md <= d + kDistCompareTol) covered += w;
      distortion += w * md;
      mass += w;
      // odometer
      std::size_t i = 0;
      for (; i < cb.n; ++i) {
        if (++x[i] < na) break;
        x[i] = 0;
      }
      if (i == cb.n) break;
    }
  }
  ExactSums sums{std::min(covered / mass, 1.0), distortion / mass, count};
  return sums;
}

}  // namespace

CoverageReport coverage_exact(const Codebook& cb, const ProbabilityVector& p,
                              const DistortionMatrix& rho, double d,
                              const MassVector* mass) {
  check_codebook_instance(cb, p, rho);
  ExactSums sums = enumerate_exact(cb, p, rho, d);
  CoverageReport rep;
  rep.n = cb.n;
  rep.coverage = sums.coverage;
  rep.coverage_ci = 0.0;
  rep.expected_distortion = sums.expected_distortion;
  rep.mass_exponent =
      mass ? mass_exponent(cb, *mass) : std::numeric_limits<double>::quiet_NaN();
  rep.mode = CoverageMode::Exact;
  rep.samples = sums.points;
  rep.seed = 0;
  return rep;
}

CoverageReport coverage_mc(const Codebook& cb, const ProbabilityVector& p,
                           const DistortionMatrix& rho, double d, std::uint64_t samples,
                           std::uint64_t seed, const MassVector* mass, int threads) {
  check_codebook_instance(cb, p, rho);
  if (samples < 1) throw ConfigError("samples must be >= 1");

  auto cdf = cdf_of(p);
  auto packed = p.size() == 2 ? PackedEval::make(cb, rho) : std::nullopt;
  std::uint64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<std::uint64_t> covered(chunks, 0);
  std::vector<double> distsum(chunks, 0.0);

  parallel_for(chunks, threads, [&](std::size_t b, std::size_t e) {
    Word x(cb.n);
    for (std::size_t c = b; c < e; ++c) {
      CounterRng rng(derive_stream(seed, c));
      std::uint64_t lo = c * kMcChunk;
      std::uint64_t hi = std::min<std::uint64_t>(samples, lo + kMcChunk);
      std::uint64_t cov = 0;
      double ds = 0.0;
      for (std::uint64_t i = lo; i < hi; ++i) {
        double md;
        if (packed) {
          std::uint64_t xs = 0;
          for (std::size_t j = 0; j < cb.n; ++j)
            if (rng.next_double() >= cdf[0]) xs |= 1ULL << j;
          md = packed->min_distortion(xs);
        } else {
          for (std::size_t j = 0; j < cb.n; ++j)
            x[j] = static_cast<std::uint8_t>(sample_categorical(rng, cdf));
          md = generic_min_distortion(x, cb, rho);
        }
        if (md <= d + kDistCompareTol) ++cov;
        ds += md;
      }
      covered[c] = cov;
      distsum[c] = ds;
    }
  });

  std::uint64_t cov = 0;
  double ds = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    cov += covered[c];
    ds += distsum[c];
  }

  CoverageReport rep;
  rep.n = cb.n;
  rep.coverage = static_cast<double>(cov) / static_cast<double>(samples);
  rep.coverage_ci =
      1.959963984540054 *
      std::sqrt(rep.coverage * (1.0 - rep.coverage) / static_cast<double>(samples));
  rep.expected_distortion = ds / static_cast<double>(samples);
  rep.mass_exponent =
      mass ? mass_exponent(cb, *mass) : std::numeric_limits<double>::quiet_NaN();
  rep.mode = CoverageMode::MonteCarlo;
  rep.samples = samples;
  rep.seed = seed;
  return rep;
}

double mass_exponent(const Codebook& cb, const MassVector& mass) {
  if (cb.words.empty()) throw ConfigError("codebook is empty");
  StreamingLogSumExp lse;
  for (const Word& w : cb.words) lse.add(word_log_mass(w, mass));
  return lse.result() / static_cast<double>(cb.n);
}

ConverseCheck verify_converse(const Codebook& cb, const ProbabilityVector& p,
                              const MassVector& mass, const DistortionMatrix& rho) {
  check_codebook_instance(cb, p, rho);
  if (mass.size() != rho.cols())
    throw ConfigError("mass vector must match reproduction alphabet");

  Codebook dedup = cb;
  std::sort(dedup.words.begin(), dedup.words.end());
  dedup.words.erase(std::unique(dedup.words.begin(), dedup.words.end()), dedup.words.end());

  ExactSums sums = enumerate_exact(dedup, p, rho, 0.0);
  double d = sums.expected_distortion;
  double lhs = mass_exponent(dedup, mass);
  RatePoint rp = solve_rate(p, mass, rho, d);
  double rhs = rp.R.value();
  return ConverseCheck{d,    lhs,
                       rhs,  lhs >= rhs - kConverseSlack,
                       cb.words.size(), dedup.words.size()};
}

std::vector<TracePoint> achievability_trace(const ProbabilityVector& p,
                                            const MassVector& mass,
                                            const DistortionMatrix& rho, double d,
                                            double epsilon,
                                            std::span<const std::size_t> n_list,
                                            std::uint64_t seed, std::uint64_t samples,
                                            ConditioningKind kind, int threads,
                                            bool allow_constant_fallback) {
  if (!(d > 0.0)) throw ConfigError("achievability trace needs D > 0");
  if (!(epsilon > 0.0)) throw ConfigError("achievability trace needs epsilon > 0");

  // Solve slightly inside the budget so the sampled reproduction law targets
  // strictly-interior distortion.
  double d_inner = d * (1.0 - 1e-3);
  RatePoint inner = solve_rate(p, mass, rho, d_inner);
  double target_rate = solve_rate(p, mass, rho, d).R.value() + epsilon;

  double r_min = mass.r_min();
  double s0 = 0.0, sum_abs = 0.0;
  for (std::size_t b = 0; b < mass.size(); ++b) {
    s0 += mass.log_at(b) - r_min;
    sum_abs += std::abs(mass.log_at(b));
  }

  ConditioningRule rule = NoRule{};
  double delta_used = 0.0;
  if (kind == ConditioningKind::TypeBall) {
    // Largest slack whose worst-case per-letter mass overshoot delta * s0
    // still fits inside epsilon/2 (s0 is the shift-invariant deviation
    // constant; for binary alphabets it is bounded by sum |log M|).
    double candidates[2] = {0.05, sum_abs > 0.0 ? std::min(0.05, epsilon / (4.0 * sum_abs))
                                                : 0.05};
    for (double c : candidates) {
      if (c * s0 <= epsilon / 2.0 + 1e-15) {
        delta_used = c;
        break;
      }
    }
    if (delta_used == 0.0) delta_used = std::min(0.05, (epsilon / 2.0) / s0);
    rule = TypeBallRule{delta_used};
  } else {
    rule = MassCapRule{inner.L_star + epsilon / 4.0, mass.log_mass()};
  }

  std::optional<std::uint8_t> fallback;
  if (allow_constant_fallback) {
    for (std::size_t b = 0; b < mass.size(); ++b)
      if (mass.log_at(b) == r_min) {
        fallback = static_cast<std::uint8_t>(b);
        break;
      }
  }

  std::vector<TracePoint> out;
  out.reserve(n_list.size());
  for (std::size_t n : n_list) {
    std::uint64_t cb_seed = derive_stream(seed, 2 * n);
    std::uint64_t mc_seed = derive_stream(seed, 2 * n + 1);
    Codebook cb = sample_codebook(inner.Q_opt, n, rule, inner.I_star + epsilon / 2.0,
                                  cb_seed, fallback);
    double me = mass_exponent(cb, mass);
    if (me > target_rate + 1e-9) {
      std::ostringstream os;
      os << "constructed codebook at n = " << n << " has mass exponent " << me
         << " above the certified cap " << target_rate;
      throw AssertionError(os.str());
    }
    CoverageReport rep = coverage_mc(cb, p, rho, d, samples, mc_seed, &mass, threads);
    out.push_back(TracePoint{rep, cb.meta.rejection_rate, target_rate, cb.words.size(),
                             delta_used});
  }
  return out;
}

std::vector<SteinPoint> stein_experiment(const ProbabilityVector& p1,
                                         const ProbabilityVector& p2,
                                         std::span<const std::size_t> n_list,
                                         std::uint64_t seed) {
  (void)seed;  // exact computation; kept for interface parity
  if (p1.size() != 2 || p2.size() != 2)
    throw ConfigError("stein experiment is computed exactly for binary alphabets only");
  if (!p1.strictly_positive() || !p2.strictly_positive())
    throw ConfigError("hypothesis laws must be strictly positive");

  std::vector<SteinPoint> out;
  out.reserve(n_list.size());
  for (std::size_t n : n_list) {
    if (n < 1) throw ConfigError("block length must be >= 1");
    double nd = static_cast<double>(n);
    // Slack n^{-1/4} / 8: shrinks slowly enough that alpha_n -> 0, fast
    // enough that the beta exponent is near its limit by n in the thousands.
    double delta = std::pow(nd, -0.25) / 8.0;
    double center = p1[1];
    std::int64_t klo =
        static_cast<std::int64_t>(std::ceil(nd * (center - delta) - 1e-9));
    std::int64_t khi =
        static_cast<std::int64_t>(std::floor(nd * (center + delta) + 1e-9));
    klo = std::max<std::int64_t>(klo, 0);
    khi = std::min<std::int64_t>(khi, static_cast<std::int64_t>(n));
    if (klo > khi) {  // window too narrow to contain a type at this n
      std::int64_t k = std::llround(nd * center);
      klo = khi = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(n));
    }

    auto log_pmf = [nd](std::int64_t k, const ProbabilityVector& q) {
      return log_binom(nd, static_cast<double>(k)) +
             static_cast<double>(k) * q.log_probs()[1] +
             (nd - static_cast<double>(k)) * q.log_probs()[0];
    };

    StreamingLogSumExp out_lse, in_lse;
    for (std::int64_t k = 0; k <= static_cast<std::int64_t>(n); ++k) {
      if (k >= klo && k <= khi)
        in_lse.add(log_pmf(k, p2));
      else
        out_lse.add(log_pmf(k, p1));
    }
    double alpha =
        klo == 0 && khi == static_cast<std::int64_t>(n) ? 0.0 : std::exp(out_lse.result());
    out.push_back(SteinPoint{n, std::min(alpha, 1.0), in_lse.result() / nd});
  }
  return out;
}

BlowupReport blowup_inequality_check(const ProbabilityVector& p, std::size_t n, double d,
                                     std::size_t trials, std::uint64_t seed) {
  if (p.size() != 2) throw ConfigError("blowup check runs on the binary cube");
  if (n < 1 || n > 22) throw ConfigError("blowup check needs 1 <= n <= 22");
  if (!(d >= 0.0)) throw ConfigError("blowup radius must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");

  const std::size_t total = std::size_t{1} << n;
  std::vector<double> wt(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double v = 1.0;
    for (std::size_t i = 0; i < k; ++i) v *= p[1];
    for (std::size_t i = k; i < n; ++i) v *= p[0];
    wt[k] = v;
  }
  int radius = static_cast<int>(std::floor(d * static_cast<double>(n) + 1e-9));

  const double inclusion[4] = {0.5, 0.125, 0.03125, 0.0078125};
  CounterRng rng(seed);
  BlowupReport rep{trials, 0, std::numeric_limits<double>::infinity()};
  std::vector<std::uint8_t> dist(total);
  std::vector<std::uint32_t> frontier, next;

  for (std::size_t t = 0; t < trials; ++t) {
    double prob = inclusion[t % 4];
    std::fill(dist.begin(), dist.end(), 0xFF);
    frontier.clear();
    double pc = 0.0;
    for (std::uint32_t x = 0; x < total; ++x) {
      if (rng.next_double() < prob) {
        dist[x] = 0;
        frontier.push_back(x);
        pc += wt[static_cast<std::size_t>(std::popcount(x))];
      }
    }
    if (frontier.empty()) {
      // nonempty sets only (the inequality divides by P^n(C))
      std::uint32_t x = static_cast<std::uint32_t>(rng.next_u64() & (total - 1));
      dist[x] = 0;
      frontier.push_back(x);
      pc += wt[static_cast<std::size_t>(std::popcount(x))];
    }

    double pcov = 0.0;
    for (std::uint32_t x : frontier) pcov += wt[static_cast<std::size_t>(std::popcount(x))];
    for (int level = 1; level <= radius && !frontier.empty(); ++level) {
      next.clear();
      for (std::uint32_t x : frontier) {
        for (std::size_t i = 0; i < n; ++i) {
          std::uint32_t y = x ^ (1u << i);
          if (dist[y] == 0xFF) {
            dist[y] = static_cast<std::uint8_t>(level);
            next.push_back(y);
            pcov += wt[static_cast<std::size_t>(std::popcount(y))];
          }
        }
      }
      frontier.swap(next);
    }

    double rhs = 1.0 - std::exp(-static_cast<double>(n) * d * d / 2.0) / pc;
    double margin = std::min(pcov, 1.0) - rhs;
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -1e-12) ++rep.violations;
  }
  return rep;
}

}  // namespace masscover
