#include <sstream>

#include "driverlet/rec/recorder.hpp"

namespace driverlet::rec {

namespace {

std::string run_tag(const std::string& entry, const Args& args) {
  std::string s = entry;
  for (const auto& [k, v] : args) s += "_" + k + "=" + std::to_string(v);
  return s;
}

std::string evidence_text(const RecordRun& run, const std::vector<BranchEvidence>& ev) {
  std::ostringstream os;
  os << "run " << run.entry;
  for (const auto& [k, v] : run.args) os << " " << k << "=" << v;
  os << " seed=" << run.seed << "\n";
  run.trace.dump(os);
  os << "exploration (" << ev.size() << " probes)\n";
  for (const auto& b : ev)
    os << "branch seq=" << b.seq << " sym=" << b.symbol
       << (b.device_input ? " device" : " program") << " cons=\"" << to_string(b.cons)
       << "\" witness=" << b.witness << " divergent=" << (b.divergent ? 1 : 0) << " note=\""
       << b.note << "\" src=" << b.src_loc << "\n";
  return os.str();
}

void record_one(const std::string& entry, const Args& args, u64 seed, const std::string& name,
                CampaignResult& result, std::vector<tpl::InteractionTemplate>& out) {
  RecordRun run = record_run(entry, args, seed);
  auto ev = explore(run);
  out.push_back(distill(run, ev, name));
  result.evidence.emplace_back(run_tag(entry, args), evidence_text(run, ev));
}

} // namespace

CampaignResult campaign(const std::vector<std::pair<std::string, Args>>& runs, u64 seed,
                        const tpl::Key& key) {
  CampaignResult result;
  std::vector<tpl::InteractionTemplate> all;
  std::set<std::string> devices_seen;
  std::vector<std::string> errors;

  for (const auto& [entry, args] : runs) {
    const EntrySpec& spec = find_entry(entry);
    if (devices_seen.insert(spec.device).second) {
      // Bring-up routines are recorded once per device; their failure is fatal.
      try {
        record_one(spec.init_name, {}, seed, spec.init_name, result, all);
        if (spec.reset_name != spec.init_name)
          record_one(spec.reset_name, {}, seed, spec.reset_name, result, all);
      } catch (const std::exception& e) {
        throw CampaignError("init/reset recording for " + spec.device + " failed: " + e.what());
      }
    }
    if (entry == spec.init_name || entry == spec.reset_name) continue; // already recorded
    try {
      record_one(entry, args, seed, template_tag(entry, args), result, all);
    } catch (const std::exception& e) {
      errors.push_back(run_tag(entry, args) + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string joined;
    for (const auto& e : errors) joined += (joined.empty() ? "" : "; ") + e;
    throw CampaignError(std::to_string(errors.size()) + " run(s) failed: " + joined);
  }

  result.templates = tpl::merge_all(std::move(all));

  // Selection uniqueness: no two templates for one entry may accept a common
  // argument vector.
  for (size_t i = 0; i < result.templates.size(); i++) {
    for (size_t j = i + 1; j < result.templates.size(); j++) {
      const auto& a = result.templates[i];
      const auto& b = result.templates[j];
      if (a.entry != b.entry) continue;
      const EntrySpec& spec = find_entry(a.entry);
      bool overlap = true;
      for (const auto& arg : spec.args) {
        const auto* pa = a.param(arg.name);
        const auto* pb = b.param(arg.name);
        if (!pa || !pb) continue;
        if (!tpl::probably_intersects(pa->cons, pb->cons, arg.lo, arg.hi)) {
          overlap = false;
          break;
        }
      }
      if (overlap && !spec.args.empty())
        throw CampaignError("templates " + a.name + " and " + b.name + " for entry " +
                            a.entry + " overlap");
    }
  }

  for (auto& t : result.templates) tpl::sign(t, key);
  result.coverage = tpl::coverage_report(result.templates);
  return result;
}

} // namespace driverlet::rec
