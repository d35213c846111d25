#include <sstream>

#include "driverlet/rec/recorder.hpp"
#include "driverlet/rep/oracle.hpp"
#include "driverlet/sim/mockblk.hpp"

namespace driverlet::rep {

namespace {

u64 splitmix64(u64& st) {
  st += 0x9e3779b97f4a7c15ULL;
  u64 z = st;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string compare_logs(const sim::ObservedLog& gold, const sim::ObservedLog& replay) {
  size_t n = std::min(gold.reg_writes.size(), replay.reg_writes.size());
  for (size_t i = 0; i < n; i++)
    if (gold.reg_writes[i] != replay.reg_writes[i]) {
      std::ostringstream os;
      os << "register write " << i << " differs: gold " << hex(gold.reg_writes[i].first)
         << "=" << hex(gold.reg_writes[i].second) << " vs replay "
         << hex(replay.reg_writes[i].first) << "=" << hex(replay.reg_writes[i].second);
      return os.str();
    }
  if (gold.reg_writes.size() != replay.reg_writes.size())
    return "register write count " + std::to_string(gold.reg_writes.size()) + " vs " +
           std::to_string(replay.reg_writes.size());
  if (gold.dma_chains.size() != replay.dma_chains.size())
    return "dma chain count " + std::to_string(gold.dma_chains.size()) + " vs " +
           std::to_string(replay.dma_chains.size());
  for (size_t i = 0; i < gold.dma_chains.size(); i++) {
    const auto& g = gold.dma_chains[i];
    const auto& r = replay.dma_chains[i];
    if (g.size() != r.size()) return "dma chain " + std::to_string(i) + " length differs";
    for (size_t j = 0; j < g.size(); j++)
      if (g[j].src != r[j].src || g[j].dst != r[j].dst || g[j].len != r[j].len)
        return "dma transfer " + std::to_string(i) + "/" + std::to_string(j) + " differs";
  }
  if (gold.irqs.size() != replay.irqs.size())
    return "irq count " + std::to_string(gold.irqs.size()) + " vs " +
           std::to_string(replay.irqs.size());
  for (size_t i = 0; i < gold.irqs.size(); i++)
    if (gold.irqs[i].line != replay.irqs[i].line || gold.irqs[i].step != replay.irqs[i].step)
      return "irq " + std::to_string(i) + " differs";
  return "";
}

} // namespace

OracleReport diff_oracle(const std::vector<tpl::InteractionTemplate>& templates,
                         const std::string& entry, u64 trials, u64 seed) {
  const rec::EntrySpec& spec = rec::find_entry(entry);
  std::vector<const tpl::InteractionTemplate*> group;
  for (const auto& t : templates)
    if (t.entry == entry) group.push_back(&t);
  if (group.empty() && trials > 0)
    throw std::runtime_error("no templates for entry " + entry);

  OracleReport report;
  u64 rng = seed ^ 0xa5a5a5a5deadbeefULL;
  for (u64 trial = 0; trial < trials; trial++) {
    const auto& t = *group[group.size() > 1 ? splitmix64(rng) % group.size() : 0];
    rec::Args args;
    bool sampled = true;
    for (const auto& a : spec.args) {
      const auto* p = t.param(a.name);
      auto v = tpl::sample_satisfying(p ? p->cons : tpl::Constraint::always(), a.lo, a.hi, rng);
      if (!v) {
        sampled = false;
        break;
      }
      args[a.name] = *v;
    }
    report.trials++;
    auto fail = [&](const std::string& why) {
      report.mismatches++;
      if (report.first_mismatch.empty())
        report.first_mismatch = "trial " + std::to_string(trial) + " (" + t.name + "): " + why;
    };
    if (!sampled) {
      fail("could not sample in-coverage arguments");
      continue;
    }
    u64 dev_seed = splitmix64(rng);

    // Gold run on its own device.
    auto gold_dev = sim::make_device(spec.device, dev_seed, sim::FaultPlan::none());
    std::vector<u8> gold_payload;
    try {
      hal::Context pre(*gold_dev);
      rec::find_entry(spec.init_name).run(pre, {});
      hal::Context pre2(*gold_dev);
      rec::find_entry(spec.reset_name).run(pre2, {});
      hal::Context ctx(*gold_dev);
      rec::TrackedArgs targs;
      for (const auto& [k, v] : args) targs.emplace(k, ctx.bind_arg(k, v));
      if (spec.payload_dir(args) == rec::PayloadDir::In)
        ctx.payload = rec::record_payload(dev_seed, spec.payload_size(args));
      spec.run(ctx, targs);
      gold_payload = std::move(ctx.payload);
    } catch (const std::exception& e) {
      fail(std::string("gold driver failed: ") + e.what());
      continue;
    }

    // Replay on a twin-seeded device.
    auto rep_dev = sim::make_device(spec.device, dev_seed, sim::FaultPlan::none());
    Replayer rp(templates, *rep_dev);
    Invocation inv;
    inv.entry = entry;
    inv.args = args;
    if (spec.payload_dir(args) == rec::PayloadDir::In)
      inv.data = rec::record_payload(dev_seed, spec.payload_size(args));
    ReplayOutcome out;
    try {
      out = rp.run(inv);
    } catch (const std::exception& e) {
      fail(std::string("replayer error: ") + e.what());
      continue;
    }
    if (out.status != ReplayOutcome::OK) {
      fail("replay outcome " + to_string(out));
      continue;
    }

    std::string diff = compare_logs(gold_dev->observed(), rep_dev->observed());
    if (!diff.empty()) {
      fail(diff);
      continue;
    }
    // Payload faithfulness: captured data must match, and written data must
    // land identically on both media.
    if (spec.payload_dir(args) == rec::PayloadDir::Out && inv.data != gold_payload) {
      fail("output payload differs from gold driver");
      continue;
    }
    auto* gblk = dynamic_cast<sim::MockBlk*>(gold_dev.get());
    auto* rblk = dynamic_cast<sim::MockBlk*>(rep_dev.get());
    if (gblk && rblk && args.count("blkid") && args.count("blkcnt")) {
      std::vector<u8> gm(args["blkcnt"] * kBlockSize), rm(gm.size());
      gblk->medium_peek(args["blkid"], gm);
      rblk->medium_peek(args["blkid"], rm);
      if (gm != rm) {
        fail("medium contents differ after the job");
        continue;
      }
    }
  }
  return report;
}

} // namespace driverlet::rep
