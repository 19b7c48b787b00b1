#include "masscover/ratesolver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "masscover/errors.hpp"
#include "masscover/numutil.hpp"

namespace masscover {

namespace {

void check_instance(const ProbabilityVector& p, const MassVector& m,
                    const DistortionMatrix& rho) {
  if (rho.rows() != p.size()) throw ConfigError("distortion rows must match source alphabet");
  if (rho.cols() != m.size())
    throw ConfigError("distortion columns must match reproduction alphabet");
  if (!p.strictly_positive())
    throw ConfigError("source law must be strictly positive (strip zero symbols first)");
}

// A converged point on the Lagrangian trace, with enough state to mix.
struct TracePoint {
  double s;
  double d;        // E_W[rho]
  double i;        // mutual information
  double l;        // E_Q[log M]
  std::vector<double> joint;  // row-major |A| x |Ahat|
};

double rate_of(const TracePoint& t) { return t.i + t.l; }

// Alternating minimization of
//   F(V, Q) = sum_x P(x) sum_y V(y|x) [log(V(y|x)/Q(y)) + log M(y) + s rho(x,y)]
// from uniform Q. Row updates are Gibbs reweightings computed in the log
// domain, so arbitrarily large s is safe.
TracePoint run_alternating(const ProbabilityVector& p, const MassVector& m,
                           const DistortionMatrix& rho, double s) {
  const std::size_t na = p.size(), nb = m.size();
  std::vector<double> q(nb, 1.0 / static_cast<double>(nb));
  std::vector<double> logq(nb, -std::log(static_cast<double>(nb)));
  std::vector<double> cond(na * nb, 0.0);
  std::vector<double> logit(nb);

  double f_prev = std::numeric_limits<double>::infinity();
  double f = f_prev;
  double last_delta = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    // (a) V(y|x) proportional to Q(y) exp(-log M(y) - s rho(x, y)).
    f = 0.0;
    for (std::size_t x = 0; x < na; ++x) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < nb; ++y) {
        logit[y] = logq[y] - m.log_at(y) - s * rho.at(x, y);
        mx = std::max(mx, logit[y]);
      }
      double z = 0.0;
      for (std::size_t y = 0; y < nb; ++y) z += std::exp(logit[y] - mx);
      double logz = mx + std::log(z);
      for (std::size_t y = 0; y < nb; ++y) cond[x * nb + y] = std::exp(logit[y] - logz);
      f -= p[x] * logz;  // F after the row update equals -sum_x P(x) log Z_x
    }
#ifndef NDEBUG
    assert(f <= f_prev + 1e-9 && "alternating objective must be nonincreasing");
#endif
    // (b) Q <- column marginal, floored so support never dies. The growth
    // factors c_y = Q'(y)/Q(y) certify the optimality gap:
    // F - F* <= log max_y c_y, which collapses quickly even when Q itself
    // creeps along a flat valley between near-tied symbols.
    double cmax = 0.0;
    double qsum = 0.0;
    for (std::size_t y = 0; y < nb; ++y) {
      double col = 0.0;
      for (std::size_t x = 0; x < na; ++x) col += p[x] * cond[x * nb + y];
      cmax = std::max(cmax, col / q[y]);
      col = std::max(col, kQFloor);
      q[y] = col;
      qsum += col;
    }
    for (std::size_t y = 0; y < nb; ++y) {
      q[y] /= qsum;
      logq[y] = std::log(q[y]);
    }
    last_delta = std::abs(f - f_prev);
    if (last_delta < kObjectiveTol || std::log(cmax) < kGapCertificateTol) {
      converged = true;
      break;
    }
    f_prev = f;
  }
  if (!converged) {
    std::ostringstream os;
    os << "no convergence after " << kMaxIterations
       << " iterations at s = " << s << "; last objective delta = " << last_delta;
    throw SolveError(os.str());
  }

  TracePoint t;
  t.s = s;
  t.joint.resize(na * nb);
  std::vector<double> qw(nb, 0.0);
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t y = 0; y < nb; ++y) {
      double w = p[x] * cond[x * nb + y];
      t.joint[x * nb + y] = w;
      qw[y] += w;
    }
  t.d = 0.0;
  t.i = 0.0;
  t.l = 0.0;
  for (std::size_t y = 0; y < nb; ++y) t.l += qw[y] * m.log_at(y);
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t y = 0; y < nb; ++y) {
      double w = t.joint[x * nb + y];
      if (w <= kZeroFloor) continue;
      t.d += w * rho.at(x, y);
      t.i += w * std::log(w / (p[x] * qw[y]));
    }
  t.i = std::max(t.i, 0.0);
  return t;
}

// The s -> 0+ limit of the trace: mass collapses onto the cheapest
// mass-minimizing symbol (the plateau point). Returned for s = 0,
// where the alternating objective is flat across minimizers.
TracePoint plateau_point(const ProbabilityVector& p, const MassVector& m,
                         const RminDmax& rd) {
  const std::size_t na = p.size(), nb = m.size();
  TracePoint t;
  t.s = 0.0;
  t.joint.assign(na * nb, 0.0);
  for (std::size_t x = 0; x < na; ++x) t.joint[x * nb + rd.canonical] = p[x];
  t.d = rd.d_max;
  t.i = 0.0;
  t.l = rd.r_min;
  return t;
}

RatePoint make_point(const ProbabilityVector& p, const MassVector& m, double d_request,
                     double slope, std::vector<double> joint, double corner_gap) {
  Coupling w(p.size(), m.size(), std::move(joint));
  double istar = mutual_information(w);
  double lstar = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) lstar += w.col_marginal()[y] * m.log_at(y);
  return RatePoint{d_request,          ExtendedReal(istar + lstar), slope,
                   w.col_marginal(),   std::move(w),                istar,
                   lstar,              corner_gap};
}

}  // namespace

RminDmax rmin_dmax(const ProbabilityVector& p, const MassVector& m,
                   const DistortionMatrix& rho) {
  check_instance(p, m, rho);
  RminDmax out;
  out.r_min = m.r_min();
  out.d_max = std::numeric_limits<double>::infinity();
  out.canonical = 0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    if (m.log_at(y) != out.r_min) continue;
    out.argmin_set.push_back(y);
    double ed = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) ed += p[x] * rho.at(x, y);
    if (ed < out.d_max) {  // strict: ties break to the lowest symbol index
      out.d_max = ed;
      out.canonical = y;
    }
  }
  return out;
}

RatePoint solve_lagrangian(const ProbabilityVector& p, const MassVector& m,
                           const DistortionMatrix& rho, double s) {
  check_instance(p, m, rho);
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("slope must be finite and >= 0");
  TracePoint t =
      s == 0.0 ? plateau_point(p, m, rmin_dmax(p, m, rho)) : run_alternating(p, m, rho, s);
  return make_point(p, m, t.d, s, std::move(t.joint), 0.0);
}

RatePoint solve_rate(const ProbabilityVector& p, const MassVector& m,
                     const DistortionMatrix& rho, double d) {
  check_instance(p, m, rho);
  if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("distortion budget must be >= 0");
  RminDmax rd = rmin_dmax(p, m, rho);

  if (d >= rd.d_max - kPlateauTol) {
    TracePoint t = plateau_point(p, m, rd);
    RatePoint pt = make_point(p, m, d, 0.0, std::move(t.joint), 0.0);
    pt.R = ExtendedReal(rd.r_min);  // exact plateau value
    pt.I_star = 0.0;
    pt.L_star = rd.r_min;
    return pt;
  }

  // Bracket: D(s) is nonincreasing, D(0+) = D_max > d.
  TracePoint lo = plateau_point(p, m, rd);
  TracePoint hi;
  bool have_hi = false;
  for (double s = 64.0; s <= kSlopeCap; s *= 2.0) {
    TracePoint t = run_alternating(p, m, rho, s);
    if (t.d > d) {
      if (t.d > lo.d + kBisectDistTol)
        throw SolveError("non-monotone distortion trace while bracketing");
      lo = t;
    } else {
      hi = t;
      have_hi = true;
      break;
    }
  }
  if (!have_hi) {
    std::ostringstream os;
    os << "bisection failure: D(s) stayed above target " << d << " up to slope cap "
       << kSlopeCap;
    throw SolveError(os.str());
  }

  // Shrink until the traced distortions pinch the target.
  for (int it = 0; it < 200 && lo.d - hi.d > kBisectDistTol; ++it) {
    double sm = 0.5 * (lo.s + hi.s);
    if (sm <= lo.s || sm >= hi.s) break;  // slope bracket exhausted (corner)
    TracePoint t = run_alternating(p, m, rho, sm);
    if (t.d > d)
      lo = t;
    else
      hi = t;
  }
  double gap = lo.d - hi.d;
  double corner_gap = gap > kCornerGapTol ? gap : 0.0;

  // Distortion-matched mixture of the endpoints. On a strictly convex arc the
  // endpoints have pinched together; across a corner the rate function is
  // affine between them, so the mixture is an exact minimizer either way and
  // agrees with the supporting-line value R(s) + s (D(s) - D) to second order.
  double lambda = gap > 0.0 ? (lo.d - d) / gap : 1.0;
  lambda = std::clamp(lambda, 0.0, 1.0);
  std::vector<double> joint(hi.joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i)
    joint[i] = lambda * hi.joint[i] + (1.0 - lambda) * lo.joint[i];
  double chord = gap > 0.0 ? (rate_of(lo) - rate_of(hi)) / gap : hi.s;
  if (!(chord >= 0.0)) chord = hi.s;
  return make_point(p, m, d, chord, std::move(joint), corner_gap);
}

RateCurve rate_curve(const ProbabilityVector& p, const MassVector& m,
                     const DistortionMatrix& rho, std::span<const double> grid,
                     int threads) {
  check_instance(p, m, rho);
  if (grid.empty()) throw ConfigError("empty distortion grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw ConfigError("grid must be strictly ascending");
  if (grid.front() < 0.0) throw ConfigError("grid values must be >= 0");

  std::vector<double> ds(grid.begin(), grid.end());
  std::size_t clamped = 0;
  for (double& d : ds)
    if (d > rho.rho_max()) {
      d = rho.rho_max();
      ++clamped;
    }

  RminDmax rd = rmin_dmax(p, m, rho);
  std::vector<std::optional<RatePoint>> pts(ds.size());
  std::exception_ptr first_error;
  std::mutex err_mu;
  parallel_for(ds.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        pts[i] = solve_rate(p, m, rho, ds[i]);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  RateCurve curve;
  curve.r_min = rd.r_min;
  curve.d_max = rd.d_max;
  curve.clamped_count = clamped;
  curve.points.reserve(ds.size());
  for (auto& pt : pts) curve.points.push_back(std::move(*pt));

  // Shape checks: nonincreasing, midpoint-convex on uniform triples, exact
  // plateau beyond D_max.
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    double r0 = curve.points[i].R.value(), r1 = curve.points[i + 1].R.value();
    if (r1 > r0 + 1e-9) throw AssertionError("rate curve is not nonincreasing");
  }
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    double dl = curve.points[i - 1].D, dm = curve.points[i].D, dr = curve.points[i + 1].D;
    if (std::abs((dl + dr) / 2.0 - dm) > 1e-9 * std::max(1.0, std::abs(dm))) continue;
    double rl = curve.points[i - 1].R.value(), rm = curve.points[i].R.value(),
           rr = curve.points[i + 1].R.value();
    if (rm > (rl + rr) / 2.0 + 1e-8) throw AssertionError("rate curve fails midpoint convexity");
  }
  for (auto& pt : curve.points)
    if (pt.D >= rd.d_max && pt.R.value() != rd.r_min)
      throw AssertionError("rate curve is not exactly R_min beyond D_max");
  return curve;
}

RatePoint shannon_rdf(const ProbabilityVector& p, const DistortionMatrix& rho, double d) {
  return solve_rate(p, MassVector::ones(rho.cols()), rho, d);
}

RatePoint concentration_exponent(const ProbabilityVector& p, const DistortionMatrix& rho,
                                 double d) {
  if (rho.rows() != rho.cols())
    throw ConfigError("concentration exponent needs a square distortion matrix");
  return solve_rate(p, MassVector::from_mass(p.probs()), rho, d);
}

double stein_exponent(const ProbabilityVector& p1, const ProbabilityVector& p2, double alpha) {
  if (p1.size() != p2.size())
    throw ConfigError("hypothesis laws must share an alphabet");
  if (!p1.strictly_positive() || !p2.strictly_positive())
    throw ConfigError("hypothesis laws must be strictly positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  MassVector m = MassVector::from_mass(p2.probs());
  RatePoint pt = solve_rate(p1, m, DistortionMatrix::hamming(p1.size()), alpha);
  double eps = -pt.R.value();
  if (alpha == 0.0) {
    ExtendedReal kl = relative_entropy(p1, p2);
    if (!kl.is_finite() || std::abs(eps - kl.value()) > 1e-6)
      throw AssertionError("stein exponent at alpha=0 disagrees with relative entropy");
  }
  return eps;
}

namespace {

// All compositions of g into parts parts, lexicographic. Each row is a grid
// point of the simplex with denominator g.
std::vector<std::vector<int>> compositions(int g, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  // Odometer over the first parts-1 coordinates; the last absorbs the rest.
  std::function<void(int, int)> rec = [&](int idx, int left) {
    if (idx == parts - 1) {
      cur[idx] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  rec(0, g);
  return out;
}

}  // namespace

BruteForceResult brute_force_rate(const ProbabilityVector& p, const MassVector& m,
                                  const DistortionMatrix& rho, double d, int grid_steps) {
  check_instance(p, m, rho);
  if (grid_steps < 1) throw ConfigError("grid_steps must be >= 1");
  const std::size_t na = p.size(), nb = m.size();
  if (na * (nb - 1) > 4)
    throw ConfigError("instance too large for the exhaustive oracle (needs |A|(|Ahat|-1) <= 4)");

  auto rows = compositions(grid_steps, static_cast<int>(nb));
  double combos = std::pow(static_cast<double>(rows.size()), static_cast<double>(na));
  if (combos > static_cast<double>(1ULL << 26))
    throw ConfigError("instance too large for the exhaustive oracle (grid too fine)");

  const double g = static_cast<double>(grid_steps);
  // Per-row precomputation: entropy and per-source-symbol expected cost.
  std::vector<double> row_entropy(rows.size());
  std::vector<double> row_cost(rows.size() * na);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double h = 0.0;
    for (int c : rows[r]) h -= xlogx(static_cast<double>(c) / g);
    row_entropy[r] = h;
    for (std::size_t x = 0; x < na; ++x) {
      double ed = 0.0;
      for (std::size_t y = 0; y < nb; ++y)
        ed += static_cast<double>(rows[r][y]) / g * rho.at(x, y);
      row_cost[r * na + x] = ed;
    }
  }

  // Rounding the true optimum onto the grid moves each conditional row by at
  // most (nb-1)/g in either direction, hence the feasibility slack and the
  // entropy/mass modulus reported below.
  const double tv = static_cast<double>(nb - 1) / g;
  const double slack = rho.rho_max() * tv;
  double max_abs_logm = 0.0;
  for (std::size_t y = 0; y < nb; ++y)
    max_abs_logm = std::max(max_abs_logm, std::abs(m.log_at(y)));
  double modulus = 2.0 * (binary_entropy(std::min(tv, 0.5)) +
                          tv * std::log(std::max<double>(nb - 1, 1))) +
                   2.0 * tv * max_abs_logm;

  std::vector<std::size_t> pick(na, 0);
  std::vector<double> q(nb);
  bool any = false;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double ed = 0.0;
    for (std::size_t x = 0; x < na; ++x) ed += p[x] * row_cost[pick[x] * na + x];
    if (ed <= d + slack) {
      std::fill(q.begin(), q.end(), 0.0);
      double hcond = 0.0;
      for (std::size_t x = 0; x < na; ++x) {
        const auto& r = rows[pick[x]];
        hcond += p[x] * row_entropy[pick[x]];
        for (std::size_t y = 0; y < nb; ++y) q[y] += p[x] * static_cast<double>(r[y]) / g;
      }
      double hq = entropy(q);
      double lmass = 0.0;
      for (std::size_t y = 0; y < nb; ++y) lmass += q[y] * m.log_at(y);
      double val = hq - hcond + lmass;
      if (val < best) best = val;
      any = true;
    }
    // odometer
    std::size_t x = 0;
    for (; x < na; ++x) {
      if (++pick[x] < rows.size()) break;
      pick[x] = 0;
    }
    if (x == na) break;
  }

  BruteForceResult out;
  out.value = any ? ExtendedReal(best) : ExtendedReal::infinity();
  out.error_bound = modulus;
  out.dist_slack = slack;
  return out;
}

}  // namespace masscover
