#include <algorithm>

#include "driverlet/rec/recorder.hpp"

namespace driverlet::rec {

using hal::TraceKind;
using tpl::Constraint;
using tpl::Event;

namespace {

constexpr u64 kWidenedHi = 0xFFFFFFFFull;

void add_sink_syms(const hal::ExprPtr& e, std::set<std::string>& out) {
  if (e) hal::collect_syms(e, out);
}

// Device symbols whose values feed later output events (state-changing).
// Scalar values stored into the caller's data buffer are payload, not device
// state, so they do not count as sinks.
std::set<std::string> output_sink_syms(const hal::RawTrace& trace) {
  std::set<std::string> syms;
  for (const auto& e : trace.entries) {
    switch (e.kind) {
    case TraceKind::RegWrite:
      add_sink_syms(e.value_expr, syms);
      break;
    case TraceKind::MemWrite:
      if (e.region != "data") add_sink_syms(e.value_expr, syms);
      add_sink_syms(e.offset_expr, syms);
      if (e.slice) {
        add_sink_syms(e.slice->off, syms);
        add_sink_syms(e.slice->len, syms);
      }
      break;
    case TraceKind::DmaAlloc:
      add_sink_syms(e.value_expr, syms);
      break;
    default:
      break;
    }
  }
  return syms;
}

struct ScopeChecker {
  std::set<std::string> bound;
  bool has_data = false;

  bool known(const std::string& s) const {
    if (bound.count(s)) return true;
    return has_data && s.rfind("data:", 0) == 0;
  }
  void check_expr(const hal::ExprPtr& e, const Event& ev) const {
    if (!e) return;
    std::set<std::string> syms;
    hal::collect_syms(e, syms);
    for (const auto& s : syms)
      if (!known(s))
        throw DistillError("unbound symbol " + s + " in event at " + ev.src_loc);
  }
  void check_region(const std::string& r, const Event& ev) const {
    if (r != "data" && !known(r))
      throw DistillError("unbound region " + r + " in event at " + ev.src_loc);
  }
};

} // namespace

tpl::InteractionTemplate distill(const RecordRun& run, const std::vector<BranchEvidence>& ev,
                                 const std::string& name) {
  const EntrySpec& spec = find_entry(run.entry);
  tpl::InteractionTemplate t;
  t.name = name;
  t.entry = run.entry;
  t.device_id = spec.device;
  t.reset_name = spec.reset_name;

  // Parameters: discovered constraints in evidence order.
  for (const auto& a : spec.args) {
    std::vector<Constraint> conjuncts;
    for (const auto& b : ev)
      if (b.divergent && !b.device_input && b.symbol == a.name &&
          std::find(conjuncts.begin(), conjuncts.end(), b.cons) == conjuncts.end())
        conjuncts.push_back(b.cons);
    tpl::TemplateParam p;
    p.name = a.name;
    p.cons = conjuncts.empty() ? Constraint::always()
             : conjuncts.size() == 1 ? conjuncts[0]
                                     : Constraint::all(conjuncts);
    t.params.push_back(std::move(p));
  }
  PayloadDir dir = spec.payload_dir(run.args);
  if (dir != PayloadDir::None) {
    tpl::TemplateParam p;
    p.name = "data";
    p.role = dir == PayloadDir::In ? tpl::TemplateParam::kDataIn : tpl::TemplateParam::kDataOut;
    t.params.push_back(std::move(p));
  }

  // Pinned device inputs: exploration divergence or use in an output sink.
  std::set<std::string> pinned = output_sink_syms(run.trace);
  for (const auto& b : ev)
    if (b.divergent && b.device_input) pinned.insert(b.symbol);

  // Scalar region writes superseded by a later snapshot fold into LOAD_MEM.
  const auto& entries = run.trace.entries;
  std::set<u64> folded;
  std::map<u64, std::vector<tpl::Fixup>> fixups_at; // snapshot seq -> fixups
  std::map<std::string, u64> last_snapshot_of;
  for (const auto& e : entries) {
    if (e.kind != TraceKind::MemSnapshot) continue;
    u64 since = last_snapshot_of.count(e.region) ? last_snapshot_of[e.region] : 0;
    for (const auto& w : entries) {
      if (w.seq >= e.seq) break;
      if (w.kind != TraceKind::MemWrite || w.region != e.region || w.slice) continue;
      if (last_snapshot_of.count(e.region) && w.seq <= since) continue;
      folded.insert(w.seq);
      if (w.value_expr) fixups_at[e.seq].push_back({w.offset, w.value_expr});
    }
    last_snapshot_of[e.region] = e.seq;
  }

  auto read_cons = [&](const hal::TraceEntry& e) {
    return pinned.count(e.sym) ? Constraint::eq(e.value) : Constraint::range(0, kWidenedHi);
  };

  ScopeChecker scope;
  for (const auto& p : t.params) {
    if (p.role == tpl::TemplateParam::kScalar)
      scope.bound.insert(p.name);
    else
      scope.has_data = true;
  }

  int snap_counter = 0;
  for (size_t i = 0; i < entries.size(); i++) {
    const auto& e = entries[i];
    Event out;
    out.src_loc = e.src_loc;
    switch (e.kind) {
    case TraceKind::RegRead:
      out.kind = Event::kRead;
      out.reg = e.offset;
      out.width = e.width;
      out.binds = e.sym;
      out.cons = read_cons(e);
      break;
    case TraceKind::RegWrite:
      out.kind = Event::kWrite;
      out.reg = e.offset;
      out.width = e.width;
      out.value = e.value_expr ? e.value_expr : hal::cst(e.value);
      scope.check_expr(out.value, out);
      break;
    case TraceKind::MemRead:
      out.kind = Event::kMemRead;
      out.region = e.region;
      out.offset = e.offset;
      out.width = e.width;
      out.binds = e.sym;
      out.cons = read_cons(e);
      scope.check_region(out.region, out);
      break;
    case TraceKind::MemWrite:
      if (folded.count(e.seq)) continue;
      out.kind = Event::kMemWrite;
      out.region = e.region;
      // A symbolic offset fully determines the target; keep the concrete field
      // zero so structurally identical runs compare equal.
      out.offset = e.offset_expr ? 0 : e.offset;
      out.offset_expr = e.offset_expr;
      out.width = e.width;
      if (e.slice)
        out.slice = e.slice;
      else
        out.value = e.value_expr ? e.value_expr : hal::cst(e.value);
      scope.check_region(out.region, out);
      scope.check_expr(out.value, out);
      scope.check_expr(out.offset_expr, out);
      if (out.slice) {
        scope.check_region(out.slice->src, out);
        scope.check_expr(out.slice->off, out);
        scope.check_expr(out.slice->len, out);
      }
      break;
    case TraceKind::MemSnapshot: {
      out.kind = Event::kLoadMem;
      out.region = e.region;
      out.snapshot_id = "snap" + std::to_string(snap_counter++);
      t.snapshots[out.snapshot_id] = e.bytes;
      if (fixups_at.count(e.seq)) out.fixups = fixups_at[e.seq];
      scope.check_region(out.region, out);
      for (const auto& f : out.fixups) scope.check_expr(f.expr, out);
      break;
    }
    case TraceKind::DmaAlloc:
      out.kind = Event::kDmaAlloc;
      out.binds = e.sym;
      out.value = e.value_expr ? e.value_expr : hal::cst(e.count);
      scope.check_expr(out.value, out);
      break;
    case TraceKind::IrqWait:
      out.kind = Event::kWaitIrq;
      out.line = e.line;
      out.timeout = std::max<u64>(64, 4 * e.count);
      break;
    case TraceKind::Delay:
      out.kind = Event::kDelay;
      out.steps = e.count;
      break;
    case TraceKind::PollEnter: {
      size_t j = i + 1;
      while (j < entries.size() && entries[j].kind == TraceKind::RegRead &&
             entries[j].offset == e.offset)
        j++;
      if (j >= entries.size() || entries[j].kind != TraceKind::PollExit ||
          entries[j].offset != e.offset)
        throw DistillError("unbracketed poll at " + e.src_loc);
      out.kind = Event::kPoll;
      out.reg = e.offset;
      out.cons = e.cond;
      out.timeout = std::max<u64>(64, 4 * entries[j].count);
      i = j;
      break;
    }
    case TraceKind::PollExit:
      throw DistillError("poll exit without enter at " + e.src_loc);
    case TraceKind::Branch:
    case TraceKind::Rand:
    case TraceKind::Time:
      continue;
    }
    if (!out.binds.empty()) scope.bound.insert(out.binds);
    t.events.push_back(std::move(out));
  }
  return t;
}

std::string template_tag(const std::string& entry, const Args& args) {
  if (entry == "blk_rw") {
    std::string rw = args.count("rw") && args.at("rw") != 0 ? "WR" : "RD";
    return rw + "_" + std::to_string(args.count("blkcnt") ? args.at("blkcnt") : 0);
  }
  if (entry == "stream_capture") {
    u64 frames = args.count("frames") ? args.at("frames") : 0;
    if (frames == 1) return "OneShot";
    if (frames == 10) return "ShortBurst";
    if (frames == 100) return "LongBurst";
    return "Burst_" + std::to_string(frames);
  }
  return entry; // init/reset entries take the entry's own name
}

} // namespace driverlet::rec
