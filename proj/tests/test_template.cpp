#include <doctest.h>

#include "fixtures.hpp"

using namespace driverlet;
using namespace driverlet::testfix;
using tpl::Constraint;
using tpl::Event;
using tpl::InteractionTemplate;

namespace {

InteractionTemplate tiny_template(const Constraint& read_cons, u64 poll_timeout = 64) {
  InteractionTemplate t;
  t.name = "T";
  t.entry = "blk_rw";
  t.device_id = "mockblk";
  t.reset_name = "blk_reset";
  t.params.push_back({"blkcnt", tpl::TemplateParam::kScalar, Constraint::le(8)});
  Event rd;
  rd.kind = Event::kRead;
  rd.reg = 0x0C;
  rd.cons = read_cons;
  rd.binds = "dev_in_0";
  rd.src_loc = "x:1";
  t.events.push_back(rd);
  Event pl;
  pl.kind = Event::kPoll;
  pl.reg = 0x14;
  pl.cons = Constraint::mask(0x80, 0x80);
  pl.timeout = poll_timeout;
  pl.src_loc = "x:2";
  t.events.push_back(pl);
  return t;
}

} // namespace

TEST_CASE("parse(serialize(t)) reproduces campaign templates exactly") {
  for (const auto& t : block_campaign().templates) {
    std::string text = tpl::serialize(t, true);
    InteractionTemplate back = tpl::parse_template(text);
    CHECK(tpl::serialize(back, true) == text);
    CHECK(back.name == t.name);
    CHECK(back.entry == t.entry);
    CHECK(back.reset_name == t.reset_name);
    CHECK(back.has_mac == t.has_mac);
    CHECK(back.mac == t.mac);
    REQUIRE(back.events.size() == t.events.size());
    CHECK(back.snapshots == t.snapshots);
    CHECK(tpl::structurally_equal(back, t));
  }
}

TEST_CASE("parse errors carry line numbers and reject malformed input") {
  std::string good = tpl::serialize(block_campaign().templates[0], true);
  // truncated file
  CHECK_THROWS_AS(tpl::parse_template(good.substr(0, good.size() / 2)), tpl::ParseError);
  // garbage line
  try {
    tpl::parse_template("template T entry=e device=mockblk reset=r\nbogus line here\n");
    FAIL("expected ParseError");
  } catch (const tpl::ParseError& e) {
    CHECK(e.line_no == 2);
  }
  CHECK_THROWS_AS(tpl::parse_template(""), tpl::ParseError);
  CHECK_THROWS_AS(tpl::parse_template("event read(SDCMD, \"=0x0\", 4) -> s\n"),
                  tpl::ParseError); // event before header
}

TEST_CASE("sign then verify round trips; any byte flip is detected") {
  InteractionTemplate t = tiny_template(Constraint::eq(1));
  CHECK_FALSE(tpl::verify(t, test_key()));
  tpl::sign(t, test_key());
  CHECK(tpl::verify(t, test_key()));
  tpl::Key other{'o', 't', 'h', 'e', 'r'};
  CHECK_FALSE(tpl::verify(t, other));

  std::string file = tpl::serialize(t, true);
  CHECK(tpl::verify_file_bytes(file, test_key()));
  for (size_t i = 0; i < file.size(); i++) {
    std::string bad = file;
    bad[i] ^= 0x20;
    CHECK_FALSE(tpl::verify_file_bytes(bad, test_key()));
  }
  CHECK_FALSE(tpl::verify_file_bytes(tpl::serialize(t, false), test_key())); // no mac line
}

TEST_CASE("merging widens constraints and takes the larger timeout") {
  InteractionTemplate a = tiny_template(Constraint::eq(1), 64);
  InteractionTemplate b = tiny_template(Constraint::eq(2), 200);
  b.params[0].cons = Constraint::le(4);
  tpl::sign(a, test_key());
  CHECK(tpl::structurally_equal(a, b));
  auto m = tpl::merge(a, b);
  REQUIRE(m.has_value());
  CHECK_FALSE(m->has_mac); // merging invalidates the signature
  CHECK(m->params[0].cons == Constraint::any_of({Constraint::le(8), Constraint::le(4)}));
  CHECK(m->events[0].cons == Constraint::any_of({Constraint::eq(1), Constraint::eq(2)}));
  CHECK(m->events[1].timeout == 200);
  // merging with itself changes nothing but the widening is deduplicated
  auto mm = tpl::merge(*m, *m);
  REQUIRE(mm.has_value());
  CHECK(mm->params[0].cons == m->params[0].cons);
  CHECK(mm->events[0].cons == m->events[0].cons);
}

TEST_CASE("structurally different skeletons refuse to merge") {
  // PIO and DMA templates of the same entry differ in shape
  const auto& rd1 = find_template(block_campaign(), "RD_1");
  const auto& rd8 = find_template(block_campaign(), "RD_8");
  CHECK_FALSE(tpl::structurally_equal(rd1, rd8));
  CHECK_FALSE(tpl::merge(rd1, rd8).has_value());
  // a different poll condition also blocks merging
  InteractionTemplate a = tiny_template(Constraint::eq(1));
  InteractionTemplate c = tiny_template(Constraint::eq(1));
  c.events[1].cons = Constraint::mask(0x1, 0x1);
  CHECK_FALSE(tpl::merge(a, c).has_value());
}

TEST_CASE("merge_all reaches a fixpoint over equal skeletons") {
  std::vector<InteractionTemplate> ts;
  for (u64 v : {1, 2, 3}) ts.push_back(tiny_template(Constraint::eq(v)));
  ts.push_back(find_template(block_campaign(), "RD_1"));
  auto merged = tpl::merge_all(ts);
  CHECK(merged.size() == 2);
  CHECK(merged[0].events[0].cons ==
        Constraint::any_of({Constraint::eq(1), Constraint::eq(2), Constraint::eq(3)}));
}

TEST_CASE("coverage report") {
  CHECK(tpl::coverage_report({}) == "no coverage\n");
  std::string report = tpl::coverage_report(block_campaign().templates);
  CHECK(report.find("RD_8") != std::string::npos);
  CHECK(report.find("align8") != std::string::npos);
  CHECK(report.find("union blkcnt") != std::string::npos);
}

TEST_CASE("register names round trip through serialization") {
  const auto& rd8 = find_template(block_campaign(), "RD_8");
  std::string text = tpl::serialize(rd8, false);
  CHECK(text.find("SDARG") != std::string::npos);
  CHECK(text.find("DMA_ADDR") != std::string::npos);
  CHECK(text.find("(AND blkid (NOT 7))") != std::string::npos);
}
