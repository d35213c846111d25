#include <doctest.h>

#include "driverlet/tpl/constraint.hpp"

using namespace driverlet;
using tpl::Constraint;

TEST_CASE("satisfies covers every constraint form") {
  CHECK(tpl::satisfies(Constraint::eq(5), 5));
  CHECK_FALSE(tpl::satisfies(Constraint::eq(5), 6));
  CHECK(tpl::satisfies(Constraint::ne(5), 6));
  CHECK(tpl::satisfies(Constraint::le(8), 8));
  CHECK_FALSE(tpl::satisfies(Constraint::le(8), 9));
  CHECK(tpl::satisfies(Constraint::lt(8), 7));
  CHECK_FALSE(tpl::satisfies(Constraint::lt(8), 8));
  CHECK(tpl::satisfies(Constraint::ge(8), 8));
  CHECK(tpl::satisfies(Constraint::gt(8), 9));
  CHECK(tpl::satisfies(Constraint::mask(0x1, 0x1), 0x3));
  CHECK_FALSE(tpl::satisfies(Constraint::mask(0x1, 0x1), 0x2));
  CHECK(tpl::satisfies(Constraint::range(0, 65535), 65535));
  CHECK_FALSE(tpl::satisfies(Constraint::range(1, 65535), 0));
  CHECK(tpl::satisfies(Constraint::aligned(8), 40));
  CHECK_FALSE(tpl::satisfies(Constraint::aligned(8), 41));
  CHECK(tpl::satisfies(Constraint::all({Constraint::gt(0), Constraint::le(8)}), 6));
  CHECK_FALSE(tpl::satisfies(Constraint::all({Constraint::gt(0), Constraint::le(8)}), 9));
  CHECK(tpl::satisfies(Constraint::any_of({Constraint::eq(1), Constraint::eq(3)}), 3));
  CHECK_FALSE(tpl::satisfies(Constraint::any_of({Constraint::eq(1), Constraint::eq(3)}), 2));
  CHECK(tpl::satisfies(Constraint::always(), 0xdeadbeef));
  CHECK_FALSE(tpl::satisfies(Constraint::never(), 0));
}

TEST_CASE("surface syntax round trips") {
  const char* forms[] = {"=0x1",   "!=0x2", "<=8",         "<8",     ">=8",
                         ">8",     "&0x1=0x1", "align8",   "in[0,65535]",
                         "all(>0;<=256)", "any(=0x1;=0x3)", "true",  "false"};
  for (const char* f : forms) {
    Constraint c = tpl::parse_constraint(f);
    CHECK(tpl::to_string(c) == f);
    CHECK(tpl::parse_constraint(tpl::to_string(c)) == c);
  }
  CHECK_THROWS(tpl::parse_constraint("~5"));
  CHECK_THROWS(tpl::parse_constraint("all(>0"));
  CHECK_THROWS(tpl::parse_constraint(""));
}

TEST_CASE("negate inverts comparisons and refuses the rest") {
  u64 probes[] = {0, 1, 7, 8, 9, 255, 1ull << 40, ~0ull};
  Constraint cs[] = {Constraint::eq(8), Constraint::ne(8), Constraint::le(8),
                     Constraint::lt(8), Constraint::ge(8), Constraint::gt(8)};
  for (const auto& c : cs) {
    auto n = tpl::negate(c);
    REQUIRE(n.has_value());
    for (u64 x : probes) CHECK(tpl::satisfies(*n, x) == !tpl::satisfies(c, x));
  }
  CHECK_FALSE(tpl::negate(Constraint::mask(1, 1)).has_value());
  CHECK_FALSE(tpl::negate(Constraint::aligned(8)).has_value());
  CHECK_FALSE(tpl::negate(Constraint::all({Constraint::gt(0)})).has_value());
}

TEST_CASE("smallest_satisfying is minimal") {
  auto check_min = [](const Constraint& c, u64 lo, u64 hi) {
    auto m = tpl::smallest_satisfying(c, lo, hi);
    REQUIRE(m.has_value());
    CHECK(tpl::satisfies(c, *m));
    CHECK(*m >= lo);
    CHECK(*m <= hi);
    // no smaller in-domain witness in a window below m
    for (u64 x = lo; x < *m && x < lo + 4096; x++) CHECK_FALSE(tpl::satisfies(c, x));
  };
  check_min(Constraint::gt(8), 0, 256);
  check_min(Constraint::aligned(8), 1, 256);
  check_min(Constraint::all({Constraint::gt(8), Constraint::le(256)}), 0, 1000);
  check_min(Constraint::mask(0x80, 0x80), 0, 1ull << 32);
  CHECK_FALSE(tpl::smallest_satisfying(Constraint::gt(10), 0, 5).has_value());
  CHECK_FALSE(tpl::smallest_satisfying(Constraint::never(), 0, 100).has_value());
}

TEST_CASE("sample_satisfying stays inside the constraint and domain") {
  u64 rng = 42;
  Constraint c = tpl::parse_constraint("all(>0;<=256;align8)");
  for (int i = 0; i < 500; i++) {
    auto v = tpl::sample_satisfying(c, 0, 1ull << 32, rng);
    REQUIRE(v.has_value());
    CHECK(tpl::satisfies(c, *v));
  }
  CHECK_FALSE(tpl::sample_satisfying(Constraint::never(), 0, 100, rng).has_value());
}

TEST_CASE("probably_intersects separates disjoint block-count regions") {
  Constraint rd1 = tpl::parse_constraint("all(>0;<=8;<8;<=1)");
  Constraint rd8 = tpl::parse_constraint("all(>0;<=8;>=8)");
  Constraint rd32 = tpl::parse_constraint("all(>8;<=32)");
  CHECK_FALSE(tpl::probably_intersects(rd1, rd8, 0, 1ull << 32));
  CHECK_FALSE(tpl::probably_intersects(rd8, rd32, 0, 1ull << 32));
  CHECK(tpl::probably_intersects(rd8, rd8, 0, 1ull << 32));
  CHECK(tpl::probably_intersects(Constraint::le(10), Constraint::ge(5), 0, 100));
}
