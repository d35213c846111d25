#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "driverlet/rep/oracle.hpp"
#include "driverlet/sim/mockblk.hpp"
#include "fixtures.hpp"

using namespace driverlet;
using namespace driverlet::testfix;
using rep::Invocation;
using rep::Replayer;
using rep::ReplayOutcome;
using tpl::Constraint;
using tpl::Event;

namespace {

std::unique_ptr<sim::Device> blk_dev(u64 seed = 1,
                                     sim::FaultPlan plan = sim::FaultPlan::none()) {
  return sim::make_device("mockblk", seed, plan);
}

Invocation blk_inv(u64 rw, u64 blkid, u64 blkcnt) {
  Invocation inv;
  inv.entry = "blk_rw";
  inv.args = {{"rw", rw}, {"blkid", blkid}, {"blkcnt", blkcnt}};
  return inv;
}

} // namespace

TEST_CASE("selection picks the unique template whose constraints accept the args") {
  auto dev = blk_dev();
  Replayer rp(block_campaign().templates, *dev);
  auto inv = blk_inv(0, 40, 8);
  auto out = rp.run(inv);
  CHECK(out.status == ReplayOutcome::OK);
  CHECK(out.attempts == 1);
  CHECK(rep::to_string(out) == "OK attempts=1");
  CHECK(inv.data.size() == 8 * kBlockSize);
}

TEST_CASE("out-of-coverage arguments are rejected without touching the device") {
  auto dev = blk_dev();
  Replayer rp(block_campaign().templates, *dev);
  auto inv9 = blk_inv(0, 8, 9); // between the recorded regions
  CHECK(rp.run(inv9).status == ReplayOutcome::NO_TEMPLATE);
  auto inv_mis = blk_inv(0, 17, 8); // misaligned DMA block id
  CHECK(rp.run(inv_mis).status == ReplayOutcome::NO_TEMPLATE);
  auto inv0 = blk_inv(0, 8, 0);
  CHECK(rp.run(inv0).status == ReplayOutcome::NO_TEMPLATE);
  CHECK(dev->access_count() == 0);
}

TEST_CASE("planted overlapping templates make selection ambiguous") {
  auto ts = block_campaign().templates;
  for (auto t : ts)
    if (t.name == "RD_8") {
      t.name = "RD_8_copy";
      ts.push_back(t);
      break;
    }
  auto dev = blk_dev();
  Replayer rp(ts, *dev);
  auto inv = blk_inv(0, 40, 8);
  auto out = rp.run(inv);
  CHECK(out.status == ReplayOutcome::AMBIGUOUS);
  CHECK(out.message.find("RD_8") != std::string::npos);
  CHECK(out.message.find("RD_8_copy") != std::string::npos);
  CHECK(dev->access_count() == 0);
}

TEST_CASE("write then read round trips through the replayed driver") {
  auto dev = blk_dev(77);
  Replayer rp(block_campaign().templates, *dev);
  std::vector<u8> pattern(32 * kBlockSize);
  for (size_t i = 0; i < pattern.size(); i++) pattern[i] = (u8)(i * 131 + 7);

  auto wr = blk_inv(1, 64, 32);
  wr.data = pattern;
  CHECK(rp.run(wr).status == ReplayOutcome::OK);

  auto rd = blk_inv(0, 64, 32);
  CHECK(rp.run(rd).status == ReplayOutcome::OK);
  CHECK(rd.data == pattern);
}

TEST_CASE("a transient fault is absorbed by reset-and-retry") {
  auto dev = blk_dev(3, sim::FaultPlan::at_job(sim::FaultKind::TransientBadStatus, 0));
  Replayer rp(block_campaign().templates, *dev);
  auto inv = blk_inv(0, 8, 8);
  auto out = rp.run(inv);
  CHECK(out.status == ReplayOutcome::OK);
  CHECK(out.attempts == 2);
}

TEST_CASE("a transient delay shows up as a timeout divergence, then recovery") {
  auto dev = blk_dev(3, sim::FaultPlan::at_job(sim::FaultKind::TransientDelay, 0));
  Replayer rp(block_campaign().templates, *dev);
  auto inv = blk_inv(0, 8, 8);
  auto out = rp.run(inv);
  CHECK(out.status == ReplayOutcome::OK);
  CHECK(out.attempts == 2);
}

TEST_CASE("a persistent fault exhausts the retry budget with a divergence record") {
  auto dev = blk_dev(3, sim::FaultPlan::at_job(sim::FaultKind::PersistentMediumRemoved, 0));
  Replayer rp(block_campaign().templates, *dev);
  auto inv = blk_inv(0, 8, 8);
  auto out = rp.run(inv);
  CHECK(out.status == ReplayOutcome::DIVERGED);
  CHECK(out.attempts == 3);
  REQUIRE(out.divergence.has_value());
  CHECK(out.divergence->src_loc.find("blk_driver.cpp") != std::string::npos);
  std::string text = rep::to_string(out);
  CHECK(text.find("DIVERGED ev=") == 0);
  CHECK(text.find("src=") != std::string::npos);
}

TEST_CASE("divergence reporting names event, expectation, observation and site") {
  rep::ReplayOutcome o;
  o.status = ReplayOutcome::DIVERGED;
  o.attempts = 1;
  o.divergence = rep::Divergence{37, Constraint::eq(1), 2, "blk.rs:214"};
  CHECK(rep::to_string(o) == "DIVERGED ev=37 expect=\"=0x1\" got=0x2 src=blk.rs:214");
}

TEST_CASE("verify_package authenticates before parsing and flags corruption") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "driverlet_test_pkg";
  fs::create_directories(dir);
  std::vector<std::string> files;
  for (const auto& t : block_campaign().templates) {
    fs::path p = dir / (t.name + ".tpl");
    std::ofstream(p, std::ios::binary) << tpl::serialize(t, true);
    files.push_back(p.string());
  }
  CHECK(rep::verify_package(files, test_key()).size() == files.size());
  CHECK_THROWS_AS(rep::verify_package(files, tpl::Key{'w', 'r', 'o', 'n', 'g'}),
                  rep::PackageVerifyError);
  // corrupt one byte of one file
  {
    std::ifstream in(files[0], std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes[bytes.size() / 3] ^= 0x01;
    std::ofstream(files[0], std::ios::binary) << bytes;
  }
  CHECK_THROWS_AS(rep::verify_package(files, test_key()), rep::PackageVerifyError);
  fs::remove_all(dir);
}

TEST_CASE("malicious templates are rejected before any device access") {
  auto make_rp = [&](tpl::InteractionTemplate t, std::unique_ptr<sim::Device>& dev) {
    auto ts = block_campaign().templates;
    // replace RD_8 with the tampered variant
    for (auto& x : ts)
      if (x.name == "RD_8") x = std::move(t);
    dev = blk_dev();
    return Replayer(ts, *dev);
  };
  auto base = find_template(block_campaign(), "RD_8");

  SUBCASE("undeclared register offset") {
    auto t = base;
    for (auto& e : t.events)
      if (e.kind == Event::kWrite) e.reg = 0xFFF0;
    std::unique_ptr<sim::Device> dev;
    auto rp = make_rp(t, dev);
    auto inv = blk_inv(0, 8, 8);
    CHECK_THROWS_AS(rp.run(inv), rep::MalformedTemplate);
  }
  SUBCASE("out-of-region memory write") {
    auto t = base;
    for (auto& e : t.events)
      if (e.kind == Event::kLoadMem) {
        e.kind = Event::kMemWrite;
        e.offset = 1 << 20;
        e.value = hal::cst(1);
        e.snapshot_id.clear();
        e.fixups.clear();
      }
    std::unique_ptr<sim::Device> dev;
    auto rp = make_rp(t, dev);
    auto inv = blk_inv(0, 8, 8);
    CHECK_THROWS_AS(rp.run(inv), rep::BoundsViolation);
  }
  SUBCASE("unbound symbol in an expression") {
    auto t = base;
    for (auto& e : t.events)
      if (e.kind == Event::kWrite && e.value) e.value = hal::sym("evil");
    std::unique_ptr<sim::Device> dev;
    auto rp = make_rp(t, dev);
    auto inv = blk_inv(0, 8, 8);
    CHECK_THROWS_AS(rp.run(inv), rep::MalformedTemplate);
  }
  SUBCASE("oversized allocation") {
    auto t = base;
    for (auto& e : t.events)
      if (e.kind == Event::kDmaAlloc) e.value = hal::cst(kMaxDmaAlloc + 1);
    std::unique_ptr<sim::Device> dev;
    auto rp = make_rp(t, dev);
    auto inv = blk_inv(0, 8, 8);
    CHECK_THROWS_AS(rp.run(inv), rep::BoundsViolation);
  }
}

TEST_CASE("differential oracle sees no mismatch on honest templates") {
  auto report = rep::diff_oracle(block_campaign().templates, "blk_rw", 40, 99);
  CHECK(report.trials == 40);
  CHECK(report.mismatches == 0);
}

TEST_CASE("differential oracle catches an injected taint defect") {
  auto ts = block_campaign().templates;
  for (auto& t : ts)
    if (t.name == "RD_8")
      for (auto& e : t.events)
        if (e.kind == Event::kWrite && e.value && hal::to_prefix(e.value) == "(AND blkid (NOT 7))")
          e.value = hal::bin(hal::BinOp::Add, hal::sym("blkid"), hal::cst(512)); // wrong address
  auto report = rep::diff_oracle(ts, "blk_rw", 60, 4);
  CHECK(report.mismatches >= 1);
  CHECK_FALSE(report.first_mismatch.empty());
}

TEST_CASE("selection is unique across the whole recorded input space") {
  const auto& ts = block_campaign().templates;
  const auto& spec = rec::find_entry("blk_rw");
  u64 rng = 31337;
  auto next = [&rng] {
    rng += 0x9e3779b97f4a7c15ULL;
    u64 z = rng;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (int i = 0; i < 10000; i++) {
    rec::Args args;
    for (const auto& a : spec.args) args[a.name] = a.lo + next() % (a.hi - a.lo + 1);
    int matches = 0;
    for (const auto& t : ts) {
      if (t.entry != "blk_rw") continue;
      bool ok = true;
      for (const auto& p : t.params)
        if (p.role == tpl::TemplateParam::kScalar && !tpl::satisfies(p.cons, args[p.name]))
          ok = false;
      matches += ok;
    }
    CHECK(matches <= 1);
  }
}
