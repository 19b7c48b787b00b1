#include <cmath>
#include <string>

#include "doctest.h"
#include "masscover/errors.hpp"
#include "masscover/model_io.hpp"

using namespace masscover;

TEST_CASE("minimal binary model") {
  Model m = parse_model("p = 0.6 0.4\nm = 0.6 0.4\nrho = 0 1 / 1 0\n");
  REQUIRE(m.p.size() == 2);
  CHECK(m.p[0] == 0.6);
  CHECK(m.p[1] == 0.4);
  CHECK(m.m.mass()[1] == 0.4);
  CHECK(m.rho.at(0, 1) == 1.0);
  CHECK(m.rho.at(1, 1) == 0.0);
  CHECK(m.had_mass);
  CHECK(!m.transition.has_value());
}

TEST_CASE("mass defaults to ones") {
  Model m = parse_model("p = 0.5 0.5\nrho = 0 1 / 1 0\n");
  CHECK(!m.had_mass);
  CHECK(m.m.log_at(0) == 0.0);
  CHECK(m.m.log_at(1) == 0.0);
}

TEST_CASE("rows without zeros are normalized and offsets recorded") {
  Model m = parse_model("p = 0.5 0.5\nrho = 1 2 / 3 1\n");
  CHECK(m.rho.at(0, 0) == 0.0);
  CHECK(m.rho.at(0, 1) == 1.0);
  CHECK(m.rho.at(1, 0) == 2.0);
  CHECK(m.rho.at(1, 1) == 0.0);
  REQUIRE(m.rho_offsets.size() == 2);
  CHECK(m.rho_offsets[0] == 1.0);
  CHECK(m.rho_offsets[1] == 1.0);
}

TEST_CASE("zero-probability symbols are stripped with a remap") {
  Model m = parse_model("p = 0.25 0 0.75\nrho = 0 1 / 1 0 / 2 0\n");
  REQUIRE(m.p.size() == 2);
  CHECK(m.p[1] == 0.75);
  REQUIRE(m.kept_symbols.size() == 2);
  CHECK(m.kept_symbols[0] == 0);
  CHECK(m.kept_symbols[1] == 2);
  CHECK(m.rho.rows() == 2);
  CHECK(m.rho.at(1, 0) == 2.0);
}

TEST_CASE("markov section") {
  Model m = parse_model(
      "m = 1 1\nrho = 0 1 / 1 0\ntrans = 0.9 0.1 / 0.2 0.8\n");
  REQUIRE(m.transition.has_value());
  CHECK((*m.transition)[1] == 0.1);
  CHECK(!m.initial.has_value());

  Model withp = parse_model(
      "p = 0.5 0.5\nrho = 0 1 / 1 0\ntrans = 0.9 0.1 / 0.2 0.8\n");
  CHECK(withp.initial.has_value());
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_model("p = 0.6 0.4\nrho = 0 one / 1 0\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_model("p = 0.6 0.4\n"), ConfigError);          // no rho
  CHECK_THROWS_AS(parse_model("rho = 0 1 / 1 0\n"), ConfigError);      // no p/trans
  CHECK_THROWS_AS(parse_model("p = 0.6 0.4\nrho = 0 1 / 1\n"), ConfigError);  // ragged
  CHECK_THROWS_AS(parse_model("p = 0.6 0.4\nbogus = 1\nrho = 0 1 / 1 0\n"),
                  ConfigError);  // unknown section
  CHECK_THROWS_AS(parse_model("p = 0.6\nrho = 0 1 / 1 0\n"), ConfigError);  // dim
  CHECK_THROWS_AS(
      parse_model("p = 0.5 0.5\nrho = 0 1 / 1 0\ntrans = 1 0 0 / 0 1 0 / 0 0 1\n"),
      ConfigError);  // trans not square over the alphabet
}

TEST_CASE("comments and blank lines are ignored") {
  Model m = parse_model("# source\n\np = 0.6 0.4   # inline\nrho = 0 1 / 1 0\n");
  CHECK(m.p[0] == 0.6);
}

TEST_CASE("emit and reload reproduce the model exactly") {
  Model a = parse_model(
      "p = 0.3 0.45 0.25\nm = 0.9 1.7 0.2\nrho = 1 2 3 / 3 1 2 / 0.5 0.25 4\n");
  Model b = parse_model(emit_model(a));
  REQUIRE(a.p.size() == b.p.size());
  for (std::size_t i = 0; i < a.p.size(); ++i) CHECK(a.p[i] == b.p[i]);
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    CHECK(a.m.log_at(i) == b.m.log_at(i));
    CHECK(a.m.mass()[i] == b.m.mass()[i]);
  }
  CHECK(a.rho.entries() == b.rho.entries());
  CHECK(a.had_mass == b.had_mass);

  Model ma = parse_model("m = 1 1\nrho = 0 1 / 1 0\ntrans = 0.9 0.1 / 0.2 0.8\n");
  Model mb = parse_model(emit_model(ma));
  CHECK(*ma.transition == *mb.transition);
  CHECK(ma.initial.has_value() == mb.initial.has_value());
}
