#ifndef MASSCOVER_RATESOLVER_HPP
#define MASSCOVER_RATESOLVER_HPP

#include <span>
#include <vector>

#include "masscover/extended_real.hpp"
#include "masscover/probcore.hpp"

namespace masscover {

// Solver tolerances, pinned once.
inline constexpr double kObjectiveTol = 1e-12;        // alternating-minimization stop
inline constexpr double kGapCertificateTol = 1e-9;    // certified F - F* stop
inline constexpr int kMaxIterations = 2000000;        // hard cap per slope value
inline constexpr double kBisectDistTol = 1e-6;   // |D(s) - D| target
inline constexpr double kSlopeCap = 1048576.0;   // 2^20
inline constexpr double kQFloor = 1e-300;        // keeps support alive across iterates
inline constexpr double kCornerGapTol = 1e-3;    // D-jump size that flags a corner
inline constexpr double kPlateauTol = 1e-12;     // D >= D_max - tol takes the flat branch

/// One solved point of the rate function: the rate R(D) = I* + L*, the
/// achieving reproduction law and coupling, and the local slope.
struct RatePoint {
  double D;            // distortion budget answered for
  ExtendedReal R;      // nats per symbol
  double slope;        // Lagrange multiplier s >= 0
  ProbabilityVector Q_opt;
  Coupling W_opt;
  double I_star;       // mutual-information part
  double L_star;       // expected log-mass part
  double corner_gap;   // width of a bracketed D-jump; 0 away from corners
};

/// A swept rate curve, ordered by increasing distortion.
struct RateCurve {
  std::vector<RatePoint> points;
  double r_min;
  double d_max;
  std::size_t clamped_count;  // grid points clamped down to rho_max
};

struct RminDmax {
  double r_min;
  double d_max;
  std::vector<std::size_t> argmin_set;  // all mass-minimizing symbols
  std::size_t canonical;                // lowest-index achiever of d_max
};

/// Minimizes I(W) + E_Q[log M] + s E_W[rho] over couplings with X-marginal P
/// by alternating closed-form updates, and returns the traced point
/// (D(s), R(s)). At s = 0 the objective is flat across the optimal face, so
/// the canonical limit point (Q a point mass on the cheapest mass-minimizing
/// symbol, D = D_max) is returned instead of an arbitrary face point.
RatePoint solve_lagrangian(const ProbabilityVector& p, const MassVector& m,
                           const DistortionMatrix& rho, double s);

/// R(D; P, M): bisects the slope until the traced distortions bracket D
/// within kBisectDistTol, then returns the distortion-matched convex
/// combination of the bracket endpoints. For D >= D_max returns R_min
/// exactly with a point-mass reproduction law.
RatePoint solve_rate(const ProbabilityVector& p, const MassVector& m,
                     const DistortionMatrix& rho, double d);

/// Sweeps solve_rate over an ascending grid and enforces the curve shape
/// (nonincreasing, midpoint-convex, flat at R_min beyond D_max).
RateCurve rate_curve(const ProbabilityVector& p, const MassVector& m,
                     const DistortionMatrix& rho, std::span<const double> grid,
                     int threads = 1);

/// R_min = min_y log M(y) and D_max = min E_P[rho(X,y)] over the minimizers.
RminDmax rmin_dmax(const ProbabilityVector& p, const MassVector& m,
                   const DistortionMatrix& rho);

/// Shannon rate-distortion function: the M = 1 specialization.
RatePoint shannon_rdf(const ProbabilityVector& p, const DistortionMatrix& rho, double d);

/// Concentration exponent R(D; P, P): the M = P specialization.
RatePoint concentration_exponent(const ProbabilityVector& p, const DistortionMatrix& rho,
                                 double d);

/// Hypothesis-testing error exponent eps(alpha) = -R(alpha; P1, P2) under
/// Hamming cost. At alpha = 0 the result is checked against H(P1 || P2).
double stein_exponent(const ProbabilityVector& p1, const ProbabilityVector& p2, double alpha);

/// Exhaustive-grid lower-level oracle for tiny instances.
struct BruteForceResult {
  ExtendedReal value;
  double error_bound;  // objective modulus of the grid discretization
  double dist_slack;   // distortion slack admitted by the feasibility filter
};

/// Grid-scans conditional rows W(.|x) over the simplex with step
/// 1/grid_steps, keeping combos with E[rho] <= D + dist_slack, and returns
/// the smallest I + E_Q[log M] found. Independent of the iterative solver.
BruteForceResult brute_force_rate(const ProbabilityVector& p, const MassVector& m,
                                  const DistortionMatrix& rho, double d, int grid_steps);

}  // namespace masscover

#endif
