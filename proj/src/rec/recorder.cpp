#include <algorithm>
#include <sstream>

#include "driverlet/rec/recorder.hpp"
#include "driverlet/sim/mockblk.hpp"

namespace driverlet::rec {

using hal::TraceKind;
using tpl::Constraint;

std::vector<u8> record_payload(u64 seed, u64 size) {
  std::vector<u8> out(size);
  u64 st = seed ^ 0x9e3779b97f4a7c15ULL;
  for (u64 i = 0; i < size; i++) {
    st = st * 6364136223846793005ULL + 1442695040888963407ULL;
    out[i] = (u8)(st >> 33);
  }
  return out;
}

namespace {

RecordRun run_with(const std::string& entry, const Args& args, u64 seed,
                   std::optional<hal::Forcing> forcing) {
  const EntrySpec& spec = find_entry(entry);
  auto dev = sim::make_device(spec.device, seed, sim::FaultPlan::none());

  // Warm up to the replayer's clean-slate precondition: init once, then reset.
  try {
    if (entry != spec.init_name) {
      hal::Context pre(*dev);
      find_entry(spec.init_name).run(pre, {});
      if (entry != spec.reset_name) {
        hal::Context pre2(*dev);
        find_entry(spec.reset_name).run(pre2, {});
      }
    }
  } catch (const std::exception& e) {
    throw DriverError(std::string("device bring-up failed: ") + e.what());
  }

  hal::Context ctx(*dev);
  ctx.forcing = forcing;
  TrackedArgs targs;
  for (const auto& a : spec.args) {
    auto it = args.find(a.name);
    if (it == args.end()) throw DriverError("missing argument " + a.name);
    targs.emplace(a.name, ctx.bind_arg(a.name, it->second));
  }
  if (args.size() != spec.args.size()) throw DriverError("unexpected extra arguments");
  if (spec.payload_dir(args) == PayloadDir::In)
    ctx.payload = record_payload(seed, spec.payload_size(args));

  try {
    spec.run(ctx, targs);
  } catch (const std::exception& e) {
    throw DriverError(e.what());
  }
  return {entry, args, seed, ctx.trace(), ctx.bindings(), std::move(ctx.payload)};
}

std::string expr_or_const(const hal::ExprPtr& e, u64 concrete) {
  return e ? hal::to_prefix(e) : "#" + hex(concrete);
}

bool is_device_sym(const std::string& s) { return s.rfind("dev_in_", 0) == 0; }

// Nearest in-domain value whose side of `cond` differs from the recorded arm.
std::optional<u64> nearest_flip(const Constraint& cond, bool taken, u64 v, u64 lo, u64 hi) {
  auto flips = [&](u64 w) { return w >= lo && w <= hi && tpl::satisfies(cond, w) != taken; };
  for (u64 d = 0; d <= (1ull << 20); d++) {
    if (v + d >= v && v + d <= hi && flips(v + d)) return v + d;
    if (d <= v && flips(v - d)) return v - d;
  }
  auto neg = negate(cond);
  auto fallback = taken ? (neg ? tpl::smallest_satisfying(*neg, lo, hi) : std::nullopt)
                        : tpl::smallest_satisfying(cond, lo, hi);
  if (fallback && flips(*fallback)) return fallback;
  return std::nullopt;
}

// Injected device value that makes the branch condition evaluate differently.
std::optional<u64> device_flip(const hal::ExprPtr& expr, const Constraint& cond, bool taken,
                               const hal::Bindings& bindings, const std::string& sym) {
  hal::Bindings b = bindings;
  u64 v = b.at(sym);
  auto flips = [&](u64 w) {
    b[sym] = w;
    try {
      return tpl::satisfies(cond, hal::eval(expr, b)) != taken;
    } catch (const std::exception&) {
      return false;
    }
  };
  for (u64 w : {v + 1, v - 1, v ^ 1, (u64)0, (u64)1, (u64)0xFFFFFFFF})
    if (flips(w)) return w;
  for (u64 d = 2; d <= 4096; d++) {
    if (flips(v + d)) return v + d;
    if (d <= v && flips(v - d)) return v - d;
  }
  return std::nullopt;
}

// Symbols in expression order (stable across occurrences of one branch site,
// unlike set order, since symbol names differ per occurrence).
void collect_syms_ordered(const hal::ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == hal::SymExpr::kSym) {
    if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
    return;
  }
  collect_syms_ordered(e->a, out);
  collect_syms_ordered(e->b, out);
}

std::string skeleton_diff_note(const std::vector<std::string>& base,
                               const std::vector<std::string>& forced) {
  auto count_allocs = [](const std::vector<std::string>& sk) {
    return std::count_if(sk.begin(), sk.end(),
                         [](const std::string& s) { return s.rfind("A ", 0) == 0; });
  };
  auto a0 = count_allocs(base), a1 = count_allocs(forced);
  if (a0 != a1)
    return "dma_alloc count " + std::to_string(a0) + " -> " + std::to_string(a1) +
           " in the forced run";
  size_t n = std::min(base.size(), forced.size());
  for (size_t i = 0; i < n; i++)
    if (base[i] != forced[i])
      return "output event " + std::to_string(i) + " differs: '" + base[i] + "' vs '" +
             forced[i] + "'";
  if (base.size() != forced.size())
    return "output event count " + std::to_string(base.size()) + " -> " +
           std::to_string(forced.size());
  return "";
}

} // namespace

RecordRun record_run(const std::string& entry, const Args& args, u64 seed) {
  return run_with(entry, args, seed, std::nullopt);
}

std::vector<std::string> output_skeleton(const hal::RawTrace& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace.entries) {
    switch (e.kind) {
    case TraceKind::RegWrite:
      out.push_back("W " + hex(e.offset) + " " + expr_or_const(e.value_expr, e.value));
      break;
    case TraceKind::MemWrite: {
      std::string line = "M " + e.region + " ";
      line += e.offset_expr ? hal::to_prefix(e.offset_expr) : std::to_string(e.offset);
      line += " ";
      if (e.slice)
        line += e.slice->src + "[" + hal::to_prefix(e.slice->off) + ":" +
                hal::to_prefix(e.slice->len) + "]";
      else
        line += expr_or_const(e.value_expr, e.value);
      out.push_back(line);
      break;
    }
    case TraceKind::DmaAlloc:
      out.push_back("A " + e.sym + " " + (e.value_expr ? hal::to_prefix(e.value_expr)
                                                       : std::to_string(e.count)));
      break;
    default:
      break;
    }
  }
  return out;
}

std::vector<BranchEvidence> explore(const RecordRun& run) {
  const EntrySpec& spec = find_entry(run.entry);
  const auto base_skeleton = output_skeleton(run.trace);
  std::vector<BranchEvidence> out;
  std::set<std::string> seen;
  struct SiteVerdict {
    bool divergent;
    u64 witness;
    u64 seq; // trace index of the probed occurrence
  };
  std::map<std::string, SiteVerdict> site_verdicts;

  auto probe = [&](BranchEvidence& ev, const std::string& forced_entry, const Args& forced_args,
                   std::optional<hal::Forcing> forcing) {
    try {
      RecordRun forced = run_with(forced_entry, forced_args, run.seed, forcing);
      auto sk = output_skeleton(forced.trace);
      ev.note = skeleton_diff_note(base_skeleton, sk);
      ev.divergent = !ev.note.empty();
      if (!ev.divergent) ev.note = "forced run produced an identical output skeleton";
    } catch (const std::exception& e) {
      ev.divergent = true;
      ev.note = std::string("forced run aborted: ") + e.what();
    }
  };

  for (const auto& e : run.trace.entries) {
    if (e.kind != TraceKind::Branch) continue;
    std::set<std::string> syms;
    hal::collect_syms(e.branch_expr, syms);
    bool any_device = std::any_of(syms.begin(), syms.end(),
                                  [](const std::string& s) { return is_device_sym(s); });

    if (!any_device) {
      // Taken-polarity constraint over a single program-input symbol.
      std::optional<Constraint> c_taken =
          e.taken ? std::optional<Constraint>(e.cond) : negate(e.cond);
      bool single = syms.size() == 1 && e.branch_expr->kind == hal::SymExpr::kSym;
      if (single && c_taken && spec.arg(*syms.begin())) {
        const std::string& s = *syms.begin();
        const EntryArg* arg = spec.arg(s);
        BranchEvidence ev;
        ev.seq = e.seq;
        ev.symbol = s;
        ev.cons = *c_taken;
        ev.src_loc = e.src_loc;
        if (!seen.insert("p|" + s + "|" + to_string(ev.cons)).second) continue;
        auto w = nearest_flip(e.cond, e.taken, run.bindings.at(s), arg->lo, arg->hi);
        if (!w) continue; // the branch cannot flip within the domain
        ev.witness = *w;
        Args forced_args = run.args;
        forced_args[s] = *w;
        probe(ev, run.entry, forced_args, std::nullopt);
        out.push_back(ev);
      } else {
        // Outside the constraint language: conservative narrowing.
        for (const auto& s : syms) {
          BranchEvidence ev;
          ev.seq = e.seq;
          ev.symbol = s;
          ev.cons = Constraint::eq(run.bindings.at(s));
          ev.divergent = true;
          ev.witness = run.bindings.at(s);
          ev.note = "condition outside the constraint language; narrowed to the "
                    "recorded value";
          ev.src_loc = e.src_loc;
          if (seen.insert("p|" + s + "|" + to_string(ev.cons)).second) out.push_back(ev);
        }
      }
    } else {
      // Device-input condition: probe one witness injection per recording site,
      // condition and symbol position; every occurrence of the site gets
      // evidence with the probe's verdict, so later loop iterations are pinned
      // exactly like the probed one.
      std::string site_key = "d|" + e.src_loc + "|" + to_string(e.cond) +
                             (e.taken ? "|t" : "|f");
      std::vector<std::string> osyms;
      collect_syms_ordered(e.branch_expr, osyms);
      for (size_t pos = 0; pos < osyms.size(); pos++) {
        const std::string& s = osyms[pos];
        if (!is_device_sym(s)) continue;
        BranchEvidence ev;
        ev.seq = e.seq;
        ev.symbol = s;
        ev.device_input = true;
        ev.cons = Constraint::eq(run.bindings.at(s));
        ev.src_loc = e.src_loc;
        std::string vkey = site_key + "|" + std::to_string(pos);
        auto it = site_verdicts.find(vkey);
        if (it != site_verdicts.end()) {
          ev.divergent = it->second.divergent;
          ev.witness = it->second.witness;
          ev.note = "verdict of the probe at seq " + std::to_string(it->second.seq) +
                    " applies (same recording site)";
        } else {
          auto w = device_flip(e.branch_expr, e.cond, e.taken, run.bindings, s);
          if (!w) {
            ev.divergent = true;
            ev.witness = run.bindings.at(s);
            ev.note = "no flipping witness found; conservatively pinned";
          } else {
            ev.witness = *w;
            int idx = std::stoi(s.substr(7));
            probe(ev, run.entry, run.args, hal::Forcing{idx, *w});
          }
          site_verdicts[vkey] = {ev.divergent, ev.witness, e.seq};
        }
        out.push_back(ev);
      }
    }
  }
  return out;
}

} // namespace driverlet::rec
