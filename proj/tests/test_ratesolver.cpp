#include <cmath>
#include <vector>

#include "doctest.h"
#include "masscover/errors.hpp"
#include "masscover/numutil.hpp"
#include "masscover/probcore.hpp"
#include "masscover/ratesolver.hpp"

using namespace masscover;

namespace {

const ProbabilityVector kP64({0.6, 0.4});
const DistortionMatrix kHam = DistortionMatrix::hamming(2);

// analytic binary Shannon rate-distortion function, nats
double binary_rdf(double p, double d) {
  double pm = std::min(p, 1.0 - p);
  if (d >= pm) return 0.0;
  return binary_entropy(p) - binary_entropy(d);
}

void check_decomposition(const RatePoint& pt, const MassVector& m) {
  CHECK(pt.R.value() == doctest::Approx(pt.I_star + pt.L_star).epsilon(1e-9));
  CHECK(std::abs(pt.I_star - mutual_information(pt.W_opt)) <= 1e-9);
  double l = 0.0;
  for (std::size_t y = 0; y < pt.Q_opt.size(); ++y) l += pt.Q_opt[y] * m.log_at(y);
  CHECK(std::abs(pt.L_star - l) <= 1e-9);
}

}  // namespace

TEST_CASE("rmin and dmax") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  RminDmax rd = rmin_dmax(kP64, mp, kHam);
  CHECK(rd.r_min == doctest::Approx(std::log(0.4)).epsilon(1e-15));
  CHECK(rd.d_max == doctest::Approx(0.6).epsilon(1e-15));
  REQUIRE(rd.argmin_set.size() == 1);
  CHECK(rd.argmin_set[0] == 1);

  RminDmax rd1 = rmin_dmax(kP64, MassVector::ones(2), kHam);
  CHECK(rd1.r_min == 0.0);
  CHECK(rd1.d_max == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(rd1.argmin_set == std::vector<std::size_t>{0, 1});
  CHECK(rd1.canonical == 0);

  // single reproduction symbol
  DistortionMatrix col(2, 1, {0.3, 0.7});
  MassVector m1 = MassVector::from_mass({2.0});
  RminDmax rdc = rmin_dmax(kP64, m1, col);
  CHECK(rdc.r_min == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(rdc.d_max == doctest::Approx(0.6 * 0.3 + 0.4 * 0.7).epsilon(1e-15));
}

TEST_CASE("lagrangian trace at s = 0 and at steep slope") {
  // no penalties at all: zero rate, product coupling, cheapest column
  RatePoint pt0 = solve_lagrangian(kP64, MassVector::ones(2), kHam, 0.0);
  CHECK(pt0.R.value() == 0.0);
  CHECK(pt0.I_star == 0.0);
  CHECK(pt0.D == doctest::Approx(0.4).epsilon(1e-15));

  // steep slope drives distortion to zero; with M = P the rate vanishes too
  MassVector mp = MassVector::from_mass(kP64.probs());
  RatePoint pt = solve_lagrangian(kP64, mp, kHam, 1000.0);
  CHECK(pt.D == 0.0);
  CHECK(pt.R.value() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pt.I_star == doctest::Approx(0.6730116670092565).epsilon(1e-9));

  CHECK_THROWS_AS(solve_lagrangian(kP64, mp, kHam, -1.0), ConfigError);
}

TEST_CASE("solve_rate: Shannon point, zero-distortion points") {
  MassVector ones = MassVector::ones(2);
  RatePoint pt = solve_rate(kP64, ones, kHam, 0.1);
  CHECK(std::abs(pt.R.value() - 0.3479286936178083) <= 1e-5);
  check_decomposition(pt, ones);
  CHECK(pt.W_opt.expected_cost(kHam) <= 0.1 + 1e-9);
  CHECK(pt.corner_gap == 0.0);

  RatePoint at0 = solve_rate(kP64, ones, kHam, 0.0);
  CHECK(std::abs(at0.R.value() - 0.6730116670092565) <= 1e-9);

  MassVector mp = MassVector::from_mass(kP64.probs());
  RatePoint c0 = solve_rate(kP64, mp, kHam, 0.0);
  CHECK(std::abs(c0.R.value()) <= 1e-9);

  CHECK_THROWS_AS(solve_rate(kP64, ones, kHam, -0.5), ConfigError);
}

TEST_CASE("solve_rate plateau beyond D_max") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  for (double d : {0.6, 0.7, 1.0, 5.0}) {
    RatePoint pt = solve_rate(kP64, mp, kHam, d);
    CHECK(pt.R.value() == std::log(0.4));  // exact
    CHECK(pt.Q_opt[1] == 1.0);             // point mass on the achiever
    CHECK(pt.W_opt.expected_cost(kHam) <= d + 1e-9);
    CHECK(pt.slope == 0.0);
  }
}

TEST_CASE("solve_rate agrees with the exhaustive oracle") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  for (double d : {0.1, 0.2, 0.3}) {
    RatePoint pt = solve_rate(kP64, mp, kHam, d);
    BruteForceResult oracle = brute_force_rate(kP64, mp, kHam, d, 2000);
    REQUIRE(oracle.value.is_finite());
    double modulus = oracle.error_bound + pt.slope * oracle.dist_slack;
    CHECK(std::abs(pt.R.value() - oracle.value.value()) <= modulus + 1e-4);
  }
}

TEST_CASE("oracle sanity on boundary cases") {
  MassVector ones = MassVector::ones(2);
  // D = 0 pins the entropy
  BruteForceResult h = brute_force_rate(kP64, ones, kHam, 0.0, 400);
  CHECK(std::abs(h.value.value() - 0.6730116670092565) <= h.error_bound + 1e-6);
  // beyond D_max the floor is R_min
  MassVector mp = MassVector::from_mass(kP64.probs());
  BruteForceResult f = brute_force_rate(kP64, mp, kHam, 0.8, 400);
  CHECK(std::abs(f.value.value() - std::log(0.4)) <= f.error_bound + 1e-6);
  // instance-size guard
  ProbabilityVector p3({0.2, 0.3, 0.5});
  DistortionMatrix h3 = DistortionMatrix::hamming(3);
  CHECK_THROWS_AS(brute_force_rate(p3, MassVector::ones(3), h3, 0.1, 50), ConfigError);
}

TEST_CASE("rate curve: concentration shape") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.05 * i);
  RateCurve curve = rate_curve(kP64, mp, kHam, grid);
  CHECK(std::abs(curve.points.front().R.value()) <= 1e-9);
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i)
    CHECK(curve.points[i + 1].R.value() <= curve.points[i].R.value() + 1e-9);
  for (const auto& pt : curve.points) {
    CHECK(pt.R.value() >= curve.r_min - 1e-12);
    if (pt.D >= 0.6) CHECK(pt.R.value() == std::log(0.4));
  }
  CHECK(curve.d_max == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("rate curve matches the analytic binary rdf when M = 1") {
  MassVector ones = MassVector::ones(2);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.01 * i);
  RateCurve curve = rate_curve(kP64, ones, kHam, grid, 2);
  for (const auto& pt : curve.points)
    CHECK(std::abs(pt.R.value() - binary_rdf(0.4, pt.D)) <= 1e-5);
}

TEST_CASE("shannon and concentration wrappers") {
  RatePoint s = shannon_rdf(kP64, kHam, 0.1);
  CHECK(std::abs(s.R.value() - 0.3479286936178083) <= 1e-5);
  CHECK(shannon_rdf(kP64, kHam, 0.4).R.value() == 0.0);
  CHECK(shannon_rdf(kP64, kHam, 0.45).R.value() == 0.0);
  CHECK(std::abs(shannon_rdf(kP64, kHam, 0.0).R.value() - 0.6730116670092565) <= 1e-9);

  CHECK(std::abs(concentration_exponent(kP64, kHam, 0.0).R.value()) <= 1e-9);
  CHECK(concentration_exponent(kP64, kHam, 0.7).R.value() == std::log(0.4));

  // uniform source at the plateau edge: the value is exactly -log 2
  ProbabilityVector pu({0.5, 0.5});
  RatePoint u = concentration_exponent(pu, kHam, 0.5);
  CHECK(u.R.value() >= -std::log(2.0) - 1e-12);
  CHECK(u.R.value() <= 0.0);
  MassVector mu = MassVector::from_mass(pu.probs());
  BruteForceResult oracle = brute_force_rate(pu, mu, kHam, 0.5, 2000);
  CHECK(std::abs(u.R.value() - oracle.value.value()) <=
        oracle.error_bound + u.slope * oracle.dist_slack + 1e-4);
}

TEST_CASE("stein exponent") {
  ProbabilityVector p1({0.5, 0.5}), p2({0.9, 0.1});
  CHECK(std::abs(stein_exponent(p1, p2, 0.0) - 0.5108256237659906) <= 1e-6);
  CHECK(std::abs(stein_exponent(p1, p1, 0.0)) <= 1e-9);

  double e0 = stein_exponent(p1, p2, 0.0);
  double emid = stein_exponent(p1, p2, 0.3);
  double e1 = stein_exponent(p1, p2, 1.0);
  CHECK(e1 == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
  CHECK(e0 <= emid + 1e-9);  // nondecreasing in the tolerated level
  CHECK(emid <= e1 + 1e-9);

  ProbabilityVector bad({1.0, 0.0});
  CHECK_THROWS_AS(stein_exponent(p1, bad, 0.0), ConfigError);
}

TEST_CASE("oracle reports infinity when nothing is feasible") {
  // without row zeros the cost floor is positive, so D = 0 has no coupling
  DistortionMatrix shifted(2, 2, {1, 2, 2, 1});
  BruteForceResult r = brute_force_rate(kP64, MassVector::ones(2), shifted, 0.0, 100);
  CHECK(!r.value.is_finite());
}

TEST_CASE("supporting line from any slope lower-bounds the curve") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.06 * i);
  RateCurve curve = rate_curve(kP64, mp, kHam, grid);
  for (double s : {0.25, 0.5, 1.0, 2.0, 8.0}) {
    RatePoint tr = solve_lagrangian(kP64, mp, kHam, s);
    for (const auto& pt : curve.points) {
      double line = tr.R.value() + s * (tr.D - pt.D);
      CHECK(pt.R.value() >= line - 1e-8);
    }
  }
}

TEST_CASE("curve solves are reproducible across thread counts") {
  MassVector mp = MassVector::from_mass(kP64.probs());
  std::vector<double> grid;
  for (int i = 0; i <= 25; ++i) grid.push_back(0.04 * i);
  RateCurve a = rate_curve(kP64, mp, kHam, grid, 1);
  RateCurve b = rate_curve(kP64, mp, kHam, grid, 4);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].R.value() == b.points[i].R.value());
    CHECK(a.points[i].slope == b.points[i].slope);
  }
}

TEST_CASE("decomposition invariants hold along a mixed-mass sweep") {
  MassVector m = MassVector::from_mass({1.5, 0.25});
  for (double d : {0.05, 0.15, 0.3, 0.5}) {
    RatePoint pt = solve_rate(kP64, m, kHam, d);
    check_decomposition(pt, m);
    CHECK(pt.W_opt.expected_cost(kHam) <= d + 1e-9);
    for (std::size_t x = 0; x < 2; ++x)
      CHECK(pt.W_opt.row_marginal()[x] == doctest::Approx(kP64[x]).epsilon(1e-9));
  }
}

TEST_CASE("instances with zero-probability source symbols are rejected") {
  ProbabilityVector withzero({0.5, 0.0, 0.5});
  DistortionMatrix h3 = DistortionMatrix::hamming(3);
  CHECK_THROWS_AS(solve_rate(withzero, MassVector::ones(3), h3, 0.1), ConfigError);
}
