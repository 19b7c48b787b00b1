#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "masscover/blockrate.hpp"
#include "masscover/errors.hpp"
#include "masscover/probcore.hpp"
#include "masscover/ratesolver.hpp"

using namespace masscover;

namespace {

const std::vector<double> kChain{0.9, 0.1, 0.2, 0.8};
const DistortionMatrix kHam = DistortionMatrix::hamming(2);

MarkovSource iid_source(const ProbabilityVector& p) {
  std::vector<double> t;
  for (std::size_t i = 0; i < p.size(); ++i)
    t.insert(t.end(), p.probs().begin(), p.probs().end());
  return MarkovSource::stationary(p.size(), t);
}

}  // namespace

TEST_CASE("stationary law of the two-state chain") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  CHECK(src.initial()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(src.initial()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // periodic flip chain still has a unique stationary law
  MarkovSource flip = MarkovSource::stationary(2, {0.0, 1.0, 1.0, 0.0});
  CHECK(flip.initial()[0] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(MarkovSource::stationary(2, {0.5, 0.4, 0.2, 0.8}), ConfigError);
  ProbabilityVector notpi({0.5, 0.5});
  CHECK_THROWS_AS(MarkovSource::with_initial(2, kChain, notpi, true), ConfigError);
  CHECK_NOTHROW(MarkovSource::with_initial(2, kChain, notpi, false));
}

TEST_CASE("block marginal") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  ProbabilityVector p1 = block_marginal(src, 1);
  CHECK(p1[0] == src.initial()[0]);
  CHECK(p1[1] == src.initial()[1]);

  // hand-solved two-step joint for the stationary chain
  ProbabilityVector p2 = block_marginal(src, 2);
  CHECK(p2[0] == doctest::Approx(2.0 / 3.0 * 0.9).epsilon(1e-12));  // 00
  CHECK(p2[1] == doctest::Approx(2.0 / 3.0 * 0.1).epsilon(1e-12));  // 01
  CHECK(p2[2] == doctest::Approx(1.0 / 3.0 * 0.2).epsilon(1e-12));  // 10
  CHECK(p2[3] == doctest::Approx(1.0 / 3.0 * 0.8).epsilon(1e-12));  // 11

  // IID rows give the product measure
  ProbabilityVector p({0.3, 0.7});
  MarkovSource iid = iid_source(p);
  ProbabilityVector q3 = block_marginal(iid, 3);
  for (std::size_t idx = 0; idx < 8; ++idx) {
    double expect = 1.0;
    for (std::size_t i = 0; i < 3; ++i) expect *= p[(idx >> (2 - i)) & 1];
    CHECK(q3[idx] == doctest::Approx(expect).epsilon(1e-12));
  }

  CHECK_THROWS_AS(block_marginal(src, 20), ConfigError);  // over the state cap
}

TEST_CASE("lifted cost splits exactly across sub-blocks") {
  DistortionMatrix rho(2, 2, {0, 1, 2, 0});  // integer entries keep sums exact
  DistortionMatrix r1 = lift_distortion(rho, 1);
  DistortionMatrix r2 = lift_distortion(rho, 2);
  DistortionMatrix r3 = lift_distortion(rho, 3);
  DistortionMatrix r4 = lift_distortion(rho, 4);

  auto digits = [](std::size_t idx, std::size_t k) {
    std::vector<std::size_t> d(k);
    for (std::size_t i = k; i-- > 0;) {
      d[i] = idx & 1;
      idx >>= 1;
    }
    return d;
  };
  auto join = [](std::size_t hi, std::size_t lo, std::size_t lo_bits) {
    return (hi << lo_bits) | lo;
  };

  for (std::size_t x1 = 0; x1 < 2; ++x1)
    for (std::size_t y1 = 0; y1 < 2; ++y1)
      for (std::size_t x2 = 0; x2 < 4; ++x2)
        for (std::size_t y2 = 0; y2 < 4; ++y2) {
          // (k1, k2) = (1, 2): both partial sums are divisor-exact
          double combined = r3.at(join(x1, x2, 2), join(y1, y2, 2));
          double split = (r1.at(x1, y1) * 1.0 + r2.at(x2, y2) * 2.0) / 3.0;
          CHECK(combined == split);
        }
  for (std::size_t x1 = 0; x1 < 4; ++x1)
    for (std::size_t y1 = 0; y1 < 4; ++y1)
      for (std::size_t x2 = 0; x2 < 4; ++x2)
        for (std::size_t y2 = 0; y2 < 4; ++y2) {
          double combined = r4.at(join(x1, x2, 2), join(y1, y2, 2));
          double split = (r2.at(x1, y1) * 2.0 + r2.at(x2, y2) * 2.0) / 4.0;
          CHECK(combined == split);
        }
  (void)digits;
}

TEST_CASE("lifted mass attains k times the per-letter floor") {
  MassVector m = MassVector::from_mass({0.6, 0.4});
  for (std::size_t k : {1, 2, 3}) {
    MassVector mk = lift_mass(m, k);
    CHECK(mk.r_min() ==
          doctest::Approx(static_cast<double>(k) * m.r_min()).epsilon(1e-12));
  }
}

TEST_CASE("block rate: k = 1 reduces to the plain solver") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  MassVector ones = MassVector::ones(2);
  BlockRatePoint b1 = block_rate(src, ones, kHam, 0.1, 1);
  RatePoint direct = solve_rate(src.initial(), ones, kHam, 0.1);
  CHECK(b1.per_letter_rate.value() ==
        doctest::Approx(direct.R.value()).epsilon(1e-12));
}

TEST_CASE("block rate: IID sources have flat per-letter rates") {
  ProbabilityVector p({0.6, 0.4});
  MarkovSource iid = iid_source(p);
  MassVector ones = MassVector::ones(2);
  double r1 = block_rate(iid, ones, kHam, 0.1, 1).per_letter_rate.value();
  for (std::size_t k : {2, 3}) {
    double rk = block_rate(iid, ones, kHam, 0.1, k).per_letter_rate.value();
    CHECK(std::abs(rk - r1) <= 1e-5);
  }
}

TEST_CASE("block rate: memory helps the Markov chain") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  MassVector ones = MassVector::ones(2);
  double r1 = block_rate(src, ones, kHam, 0.1, 1).per_letter_rate.value();
  double r2 = block_rate(src, ones, kHam, 0.1, 2).per_letter_rate.value();
  double r4 = block_rate(src, ones, kHam, 0.1, 4).per_letter_rate.value();
  CHECK(r2 <= r1 + 1e-6);
  CHECK(r4 <= r2 + 1e-5);  // doubling subsequence never increases
}

TEST_CASE("subadditivity of the unnormalized block rates") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  MassVector ones = MassVector::ones(2);
  std::vector<std::pair<std::size_t, std::size_t>> pairs{{1, 1}, {1, 2}, {2, 2}};
  SubadditivityReport rep = subadditivity_check(src, ones, kHam, 0.1, pairs);
  CHECK(rep.all_hold);
  for (const auto& row : rep.rows) CHECK(row.r_mn <= row.r_m + row.r_n + 1e-5);

  // IID: equality within tolerance
  ProbabilityVector p({0.6, 0.4});
  MarkovSource iid = iid_source(p);
  SubadditivityReport eq = subadditivity_check(iid, ones, kHam, 0.1, pairs);
  for (const auto& row : eq.rows)
    CHECK(std::abs(row.r_mn - (row.r_m + row.r_n)) <= 1e-5 * (row.r_m + row.r_n) + 1e-5);
}

TEST_CASE("block plateau: beyond the one-block D_max all rates are R_min") {
  MarkovSource src = MarkovSource::stationary(2, kChain);
  MassVector m = MassVector::from_mass({0.6, 0.4});
  RminDmax rd = rmin_dmax(src.initial(), m, kHam);
  for (std::size_t k : {1, 2, 3}) {
    BlockRatePoint pt = block_rate(src, m, kHam, rd.d_max + 0.05, k);
    CHECK(pt.per_letter_rate.value() == doctest::Approx(m.r_min()).epsilon(1e-9));
  }
}
