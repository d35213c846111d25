// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are structural and property-based checks over the block
// and stream campaigns, the replayer, and the differential oracle.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "driverlet/gold/drivers.hpp"
#include "driverlet/rec/recorder.hpp"
#include "driverlet/rep/oracle.hpp"
#include "driverlet/sim/mockblk.hpp"
#include "driverlet/sim/mockstream.hpp"

using namespace driverlet;
using tpl::Constraint;
using tpl::Event;

namespace {

const tpl::Key kKey{'a', 'c', 'c', 'e', 'p', 't', '-', 'k', 'e', 'y'};
constexpr u64 kSeed = 20240817;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EXPECT(cond, msg)                                                                        \
  do {                                                                                           \
    if (!(cond)) throw Failure(std::string(msg) + " [" #cond "]");                               \
  } while (0)

std::vector<std::pair<std::string, rec::Args>> block_manifest() {
  std::vector<std::pair<std::string, rec::Args>> runs;
  for (u64 rw : {0, 1})
    for (u64 blkcnt : {1, 8, 32, 128, 256})
      runs.push_back({"blk_rw", {{"rw", rw}, {"blkid", 8}, {"blkcnt", blkcnt}}});
  return runs;
}

std::vector<std::pair<std::string, rec::Args>> stream_manifest() {
  std::vector<std::pair<std::string, rec::Args>> runs;
  for (u64 frames : {1, 10, 100})
    for (u64 res : {0, 1, 2})
      runs.push_back({"stream_capture", {{"resolution", res}, {"frames", frames}}});
  return runs;
}

rec::CampaignResult g_block;  // filled by criterion 1
rec::CampaignResult g_stream; // filled by criterion 10 prerequisites

const tpl::InteractionTemplate& by_name(const rec::CampaignResult& c, const std::string& name) {
  for (const auto& t : c.templates)
    if (t.name == name) return t;
  throw Failure("missing template " + name);
}

u64 count_allocs(const tpl::InteractionTemplate& t, u64 size) {
  u64 n = 0;
  for (const auto& e : t.events)
    if (e.kind == Event::kDmaAlloc && e.value && e.value->kind == hal::SymExpr::kConst &&
        e.value->value == size)
      n++;
  return n;
}

rep::Invocation blk_inv(u64 rw, u64 blkid, u64 blkcnt) {
  rep::Invocation inv;
  inv.entry = "blk_rw";
  inv.args = {{"rw", rw}, {"blkid", blkid}, {"blkcnt", blkcnt}};
  return inv;
}

u64 splitmix(u64& st) {
  st += 0x9e3779b97f4a7c15ULL;
  u64 z = st;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// --- criteria ---------------------------------------------------------------

void c1_campaign_shape() {
  auto start = std::chrono::steady_clock::now();
  g_block = rec::campaign(block_manifest(), kSeed, kKey);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  u64 request_templates = 0;
  for (const auto& t : g_block.templates)
    if (t.entry == "blk_rw") request_templates++;
  EXPECT(request_templates == 10, "expected 10 request templates");
  EXPECT(g_block.templates.size() == 12, "expected 10 + init + reset templates");
  by_name(g_block, "blk_init");
  by_name(g_block, "blk_reset");

  for (const char* n : {"RD_1", "WR_1"}) {
    const auto& t = by_name(g_block, n);
    for (const auto& e : t.events)
      EXPECT(e.kind != Event::kDmaAlloc, std::string(n) + " must not allocate");
  }
  // ceil(32/8) = 4 data pages + 4 descriptor blocks
  for (const char* n : {"RD_32", "WR_32"}) {
    const auto& t = by_name(g_block, n);
    EXPECT(count_allocs(t, kPageSize) == 4, std::string(n) + ": 4 data-page allocations");
    EXPECT(count_allocs(t, 32) == 4, std::string(n) + ": 4 descriptor allocations");
  }
  EXPECT(secs < 10.0, "campaign must finish in under 10 s, took " + std::to_string(secs));
}

void c2_constraint_discovery() {
  // the blkcnt=6 exploration emits Le(8) with divergence evidence
  rec::RecordRun run = rec::record_run("blk_rw", {{"rw", 0}, {"blkid", 8}, {"blkcnt", 6}}, kSeed);
  bool le8 = false;
  for (const auto& b : rec::explore(run))
    if (b.symbol == "blkcnt" && b.cons == Constraint::le(8) && b.divergent) {
      EXPECT(b.note.find("dma_alloc count") != std::string::npos,
             "Le(8) evidence must record the allocation-count difference");
      le8 = true;
    }
  EXPECT(le8, "exploration must emit Le(8) on blkcnt with divergence evidence");

  // exact file assertions on the emitted templates
  std::string rd8 = tpl::serialize(by_name(g_block, "RD_8"), true);
  EXPECT(rd8.find("param blkid scalar \"all(<=65280;align8)\"") != std::string::npos,
         "RD_8 file must pin AlignedTo(8) on blkid");
  EXPECT(rd8.find("param blkcnt scalar \"all(>0;<=256;<=8;>=8)\"") != std::string::npos,
         "RD_8 file must carry the Le(8) path condition");
  for (const char* n : {"RD_32", "RD_128", "RD_256", "WR_8", "WR_32", "WR_128", "WR_256"}) {
    std::string text = tpl::serialize(by_name(g_block, n), true);
    EXPECT(text.find("align8") != std::string::npos,
           std::string(n) + " (DMA path) must pin blkid alignment");
  }
  std::string rd1 = tpl::serialize(by_name(g_block, "RD_1"), true);
  EXPECT(rd1.find("align8") == std::string::npos, "RD_1 (PIO path) must not pin alignment");
  EXPECT(rd1.find("<=8") != std::string::npos, "RD_1 file must carry the Le(8) path condition");
}

void c3_differential_faithfulness() {
  auto start = std::chrono::steady_clock::now();
  const auto& init = by_name(g_block, "blk_init");
  const auto& reset = by_name(g_block, "blk_reset");
  for (const auto& t : g_block.templates) {
    if (t.entry != "blk_rw") continue;
    auto report = rep::diff_oracle({init, reset, t}, "blk_rw", 200, kSeed ^ t.name.size());
    EXPECT(report.trials == 200, t.name + ": 200 trials");
    EXPECT(report.mismatches == 0, t.name + ": " + report.first_mismatch);
  }
  // explicit write-then-read round trip through the replayer
  auto dev = sim::make_device("mockblk", 5, sim::FaultPlan::none());
  rep::Replayer rp(g_block.templates, *dev);
  std::vector<u8> pattern(128 * kBlockSize);
  for (size_t i = 0; i < pattern.size(); i++) pattern[i] = (u8)(i * 37 + 11);
  auto wr = blk_inv(1, 128, 128);
  wr.data = pattern;
  EXPECT(rp.run(wr).status == rep::ReplayOutcome::OK, "write replay must succeed");
  auto rd = blk_inv(0, 128, 128);
  EXPECT(rp.run(rd).status == rep::ReplayOutcome::OK, "read replay must succeed");
  EXPECT(rd.data == pattern, "write-then-read must be byte-exact");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT(secs < 30.0, "criterion must finish in under 30 s, took " + std::to_string(secs));
}

void c4_poll_nondeterminism() {
  const auto& rd8 = by_name(g_block, "RD_8");
  std::set<std::string> poll_sites;
  u64 polls = 0;
  for (const auto& e : rd8.events)
    if (e.kind == Event::kPoll) {
      polls++;
      EXPECT(poll_sites.insert(e.src_loc).second,
             "exactly one POLL event per wait site (duplicate at " + e.src_loc + ")");
    }
  EXPECT(polls >= 1, "RD_8 must contain a POLL event");

  for (u64 seed = 1; seed <= 1000; seed++) {
    auto dev = sim::make_device("mockblk", seed, sim::FaultPlan::none());
    rep::Replayer rp(g_block.templates, *dev);
    auto inv = blk_inv(0, 8, 8);
    auto out = rp.run(inv);
    EXPECT(out.status == rep::ReplayOutcome::OK,
           "replay with seed " + std::to_string(seed) + ": " + rep::to_string(out));
  }
}

void c5_fault_recovery() {
  auto start = std::chrono::steady_clock::now();
  for (auto kind : {sim::FaultKind::TransientBadStatus, sim::FaultKind::TransientDelay}) {
    auto dev = sim::make_device("mockblk", 9, sim::FaultPlan::random(kind, 0.2, kSeed));
    rep::Replayer rp(g_block.templates, *dev);
    for (u64 job = 0; job < (kind == sim::FaultKind::TransientBadStatus ? 1000u : 200u); job++) {
      auto inv = blk_inv(job & 1, 8 * (job % 64), 8);
      if (job & 1) inv.data.assign(8 * kBlockSize, (u8)job);
      auto out = rp.run(inv);
      EXPECT(out.status == rep::ReplayOutcome::OK,
             "job " + std::to_string(job) + ": " + rep::to_string(out));
      EXPECT(out.attempts <= 3, "retry budget exceeded");
    }
  }
  {
    auto dev = sim::make_device(
        "mockblk", 9, sim::FaultPlan::at_job(sim::FaultKind::PersistentMediumRemoved, 0));
    rep::Replayer rp(g_block.templates, *dev);
    auto inv = blk_inv(0, 8, 8);
    auto out = rp.run(inv);
    EXPECT(out.status == rep::ReplayOutcome::DIVERGED, "persistent fault must diverge");
    EXPECT(out.attempts == 3, "persistent fault must exhaust all 3 attempts");
    EXPECT(out.divergence.has_value(), "divergence record required");
    EXPECT(out.divergence->src_loc.find(":") != std::string::npos,
           "divergence must name the recording site");
    EXPECT(rep::to_string(out).find("ev=") != std::string::npos,
           "divergence must name the event index");
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT(secs < 60.0, "criterion must finish in under 60 s, took " + std::to_string(secs));
}

void c6_out_of_coverage() {
  auto dev = sim::make_device("mockblk", 1, sim::FaultPlan::none());
  rep::Replayer rp(g_block.templates, *dev);
  auto inv9 = blk_inv(0, 8, 9);
  EXPECT(rp.run(inv9).status == rep::ReplayOutcome::NO_TEMPLATE, "blkcnt=9 must be rejected");
  auto inv_mis = blk_inv(1, 13, 32);
  EXPECT(rp.run(inv_mis).status == rep::ReplayOutcome::NO_TEMPLATE,
         "misaligned blkid must be rejected");
  EXPECT(dev->access_count() == 0, "rejection must not touch the device");
}

void c7_template_integrity() {
  std::vector<std::string> files;
  for (const auto& t : g_block.templates) files.push_back(tpl::serialize(t, true));
  for (const auto& t : g_stream.templates) files.push_back(tpl::serialize(t, true));
  for (const auto& f : files)
    EXPECT(tpl::verify_file_bytes(f, kKey), "uncorrupted file must verify");
  u64 rng = kSeed;
  for (int trial = 0; trial < 10000; trial++) {
    std::string bad = files[splitmix(rng) % files.size()];
    size_t pos = splitmix(rng) % bad.size();
    u8 repl = (u8)splitmix(rng);
    if (repl == (u8)bad[pos]) repl ^= 0x1;
    bad[pos] = (char)repl;
    EXPECT(!tpl::verify_file_bytes(bad, kKey),
           "corruption at byte " + std::to_string(pos) + " went undetected");
  }
}

void c8_determinism() {
  auto again = rec::campaign(block_manifest(), kSeed, kKey);
  EXPECT(again.templates.size() == g_block.templates.size(), "template count must match");
  for (size_t i = 0; i < again.templates.size(); i++)
    EXPECT(tpl::serialize(again.templates[i], true) == tpl::serialize(g_block.templates[i], true),
           "template files must be byte-identical across reruns");
  EXPECT(again.coverage == g_block.coverage, "coverage report must be byte-identical");
  auto stream_again = rec::campaign(stream_manifest(), kSeed, kKey);
  EXPECT(stream_again.coverage == g_stream.coverage,
         "stream coverage report must be byte-identical");
  for (size_t i = 0; i < stream_again.templates.size(); i++)
    EXPECT(tpl::serialize(stream_again.templates[i], true) ==
               tpl::serialize(g_stream.templates[i], true),
           "stream template files must be byte-identical across reruns");
}

void c9_taint_exactness() {
  for (u64 blkcnt : {8, 32, 128, 256}) {
    for (u64 blkid = 0; blkid <= 1024; blkid += 8) {
      u64 dev_seed = 0x5eed ^ (blkid * 31 + blkcnt);
      rec::Args args{{"rw", 0}, {"blkid", blkid}, {"blkcnt", blkcnt}};

      auto gold_dev = sim::make_device("mockblk", dev_seed, sim::FaultPlan::none());
      {
        hal::Context pre(*gold_dev);
        gold::blk_init(pre);
        hal::Context pre2(*gold_dev);
        gold::blk_reset(pre2);
        hal::Context ctx(*gold_dev);
        gold::blk_rw(ctx, {ctx.bind_arg("rw", 0), ctx.bind_arg("blkid", blkid),
                           ctx.bind_arg("blkcnt", blkcnt)});
      }

      auto rep_dev = sim::make_device("mockblk", dev_seed, sim::FaultPlan::none());
      rep::Replayer rp(g_block.templates, *rep_dev);
      auto inv = blk_inv(0, blkid, blkcnt);
      auto out = rp.run(inv);
      EXPECT(out.status == rep::ReplayOutcome::OK,
             "blkid=" + std::to_string(blkid) + " blkcnt=" + std::to_string(blkcnt) + ": " +
                 rep::to_string(out));

      // SDARG values (block address + block count writes) must be identical
      auto sdarg = [](const sim::ObservedLog& log) {
        std::vector<u32> v;
        for (const auto& [off, val] : log.reg_writes)
          if (off == sim::blkreg::SDARG) v.push_back(val);
        return v;
      };
      EXPECT(sdarg(gold_dev->observed()) == sdarg(rep_dev->observed()),
             "SDARG values differ at blkid=" + std::to_string(blkid) +
                 " blkcnt=" + std::to_string(blkcnt));
      // descriptor-resolved DMA transfers must be identical
      const auto& gc = gold_dev->observed().dma_chains;
      const auto& rc = rep_dev->observed().dma_chains;
      EXPECT(gc.size() == rc.size(), "DMA chain count differs");
      for (size_t i = 0; i < gc.size(); i++) {
        EXPECT(gc[i].size() == rc[i].size(), "descriptor count differs");
        for (size_t j = 0; j < gc[i].size(); j++)
          EXPECT(gc[i][j].src == rc[i][j].src && gc[i][j].dst == rc[i][j].dst &&
                     gc[i][j].len == rc[i][j].len,
                 "descriptor values differ at blkid=" + std::to_string(blkid) +
                     " blkcnt=" + std::to_string(blkcnt));
      }
    }
  }
}

void c10_stream_device() {
  g_stream = rec::campaign(stream_manifest(), kSeed, kKey);
  u64 capture_templates = 0;
  for (const auto& t : g_stream.templates)
    if (t.entry == "stream_capture") capture_templates++;
  EXPECT(capture_templates == 3, "campaign must yield exactly 3 capture templates");

  const auto& burst = by_name(g_stream, "ShortBurst");
  u64 frame_allocs = 0;
  for (const auto& e : burst.events)
    if (e.kind == Event::kDmaAlloc && e.value && e.value->kind == hal::SymExpr::kSym) {
      frame_allocs++;
      // the size symbol is a device input constrained to the frame-size table
      bool constrained = false;
      for (const auto& r : burst.events)
        if (r.binds == e.value->name && r.kind == Event::kMemRead)
          constrained = r.cons == Constraint::any_of({Constraint::eq(0x30000),
                                                      Constraint::eq(0x5A000),
                                                      Constraint::eq(0x90000)});
      EXPECT(constrained, "img_size allocation must be pinned to the frame-size table");
    }
  EXPECT(frame_allocs == 10, "ShortBurst must perform 10 img_size-driven allocations");

  // replayed frames equal the gold driver's frame bytes at every resolution
  for (u64 res = 0; res <= 2; res++) {
    u64 dev_seed = 0xcafe + res;
    auto gold_dev = sim::make_device("mockstream", dev_seed, sim::FaultPlan::none());
    std::vector<u8> gold_frames;
    {
      hal::Context pre(*gold_dev);
      gold::stream_init(pre);
      hal::Context pre2(*gold_dev);
      gold::stream_reset(pre2);
      hal::Context ctx(*gold_dev);
      gold::stream_capture(ctx, {ctx.bind_arg("resolution", res), ctx.bind_arg("frames", 10)});
      gold_frames = std::move(ctx.payload);
    }
    auto rep_dev = sim::make_device("mockstream", dev_seed, sim::FaultPlan::none());
    rep::Replayer rp(g_stream.templates, *rep_dev);
    rep::Invocation inv;
    inv.entry = "stream_capture";
    inv.args = {{"resolution", res}, {"frames", 10}};
    auto out = rp.run(inv);
    EXPECT(out.status == rep::ReplayOutcome::OK, "ShortBurst replay: " + rep::to_string(out));
    EXPECT(inv.data.size() == 10 * sim::stream_frame_size(res),
           "allocation sizes must follow the frame-size table");
    EXPECT(inv.data == gold_frames, "replayed frames must equal the gold driver's");
  }

  // a size-mismatch fault is detected as divergence at the confirmation read
  auto dev = sim::make_device("mockstream", 4,
                              sim::FaultPlan::at_job(sim::FaultKind::TransientBadStatus, 0));
  rep::Replayer rp(g_stream.templates, *dev);
  rep::Invocation inv;
  inv.entry = "stream_capture";
  inv.args = {{"resolution", 1}, {"frames", 10}};
  inv.max_attempts = 1;
  auto out = rp.run(inv);
  EXPECT(out.status == rep::ReplayOutcome::DIVERGED, "size mismatch must diverge");
  EXPECT(out.divergence.has_value() &&
             out.divergence->src_loc.find("stream_driver") != std::string::npos,
         "divergence must point at the stream driver's confirmation read");
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> fn;
  };
  // c10 runs before c7/c8 so the stream campaign exists for them.
  const Criterion criteria[] = {
      {"campaign shape (10 templates + init + reset, PIO/DMA split)", c1_campaign_shape},
      {"constraint discovery (Le(8) evidence, align8 in files)", c2_constraint_discovery},
      {"differential faithfulness (200 trials per template)", c3_differential_faithfulness},
      {"poll nondeterminism (1000 replays, one POLL per site)", c4_poll_nondeterminism},
      {"fault recovery (p=0.2 transients, persistent divergence)", c5_fault_recovery},
      {"out-of-coverage rejection (zero device accesses)", c6_out_of_coverage},
      {"stream device (3 templates, frame-size table, size mismatch)", c10_stream_device},
      {"template integrity (10000 corruptions detected)", c7_template_integrity},
      {"determinism (byte-identical re-campaign)", c8_determinism},
      {"taint exactness (SDARG/descriptors over the small domain)", c9_taint_exactness},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (error.empty() ? "PASS" : "FAIL") << ": " << c.name << " (" << (int)(secs * 1000)
         << " ms)";
    if (!error.empty()) {
      line << " — " << error;
      failures++;
    }
    std::cout << line.str() << "\n" << std::flush;
  }
  if (failures) std::cout << failures << " criterion(s) failed\n";
  return failures ? 1 : 0;
}
