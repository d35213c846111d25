#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "driverlet/rep/replayer.hpp"

namespace driverlet::rep {

using tpl::Constraint;
using tpl::Event;

namespace {

constexpr u64 kMaxPayloadBytes = 1ull << 26; // 64 MiB guard for output buffers

const char* kind_str(Event::Kind k) { return tpl::event_kind_name(k); }

// "data:<offset>:<width>" payload-word symbols referenced by a template.
std::optional<std::pair<u64, int>> parse_data_sym(const std::string& s) {
  if (s.rfind("data:", 0) != 0) return std::nullopt;
  size_t second = s.find(':', 5);
  if (second == std::string::npos) return std::nullopt;
  try {
    return std::make_pair(std::stoull(s.substr(5, second - 5)),
                          (int)std::stoul(s.substr(second + 1)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void collect_template_syms(const tpl::InteractionTemplate& t, std::set<std::string>& out) {
  for (const auto& e : t.events) {
    hal::collect_syms(e.value, out);
    hal::collect_syms(e.offset_expr, out);
    if (e.slice) {
      hal::collect_syms(e.slice->off, out);
      hal::collect_syms(e.slice->len, out);
    }
    for (const auto& f : e.fixups) hal::collect_syms(f.expr, out);
  }
}

u64 eval_checked(const hal::ExprPtr& e, const hal::Bindings& b, const Event& ev) {
  try {
    return hal::eval(e, b);
  } catch (const std::exception& ex) {
    throw MalformedTemplate(std::string(kind_str(ev.kind)) + " at " + ev.src_loc + ": " +
                            ex.what());
  }
}

} // namespace

const char* status_name(ReplayOutcome::Status s) {
  switch (s) {
  case ReplayOutcome::OK: return "OK";
  case ReplayOutcome::NO_TEMPLATE: return "NO_TEMPLATE";
  case ReplayOutcome::AMBIGUOUS: return "AMBIGUOUS";
  case ReplayOutcome::DIVERGED: return "DIVERGED";
  case ReplayOutcome::VERIFY_FAILED: return "VERIFY_FAILED";
  }
  return "?";
}

std::string to_string(const ReplayOutcome& o) {
  std::ostringstream os;
  os << status_name(o.status);
  if (o.status == ReplayOutcome::OK) os << " attempts=" << o.attempts;
  if (o.divergence)
    os << " ev=" << o.divergence->event_index << " expect=\""
       << tpl::to_string(o.divergence->expected) << "\" got=" << hex(o.divergence->observed)
       << " src=" << o.divergence->src_loc;
  if (!o.message.empty()) os << " (" << o.message << ")";
  return os.str();
}

std::vector<tpl::InteractionTemplate> verify_package(const std::vector<std::string>& files,
                                                     const tpl::Key& key) {
  std::vector<std::string> contents;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PackageVerifyError("cannot read " + path);
    contents.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  // Authenticate every file before parsing (or otherwise using) any of them.
  for (size_t i = 0; i < files.size(); i++)
    if (!tpl::verify_file_bytes(contents[i], key))
      throw PackageVerifyError(files[i] + " failed authentication");
  std::vector<tpl::InteractionTemplate> out;
  for (size_t i = 0; i < files.size(); i++) {
    try {
      out.push_back(tpl::parse_template(contents[i]));
    } catch (const std::exception& e) {
      throw MalformedTemplate("authenticated file " + files[i] + " failed to parse: " + e.what());
    }
  }
  return out;
}

Replayer::Replayer(std::vector<tpl::InteractionTemplate> templates, sim::Device& dev)
    : templates_(std::move(templates)), dev_(dev) {}

const tpl::InteractionTemplate* Replayer::by_name(const std::string& name) const {
  for (const auto& t : templates_)
    if (t.name == name) return &t;
  return nullptr;
}

bool Replayer::exec_template(const tpl::InteractionTemplate& t,
                             const std::map<std::string, u64>& args,
                             const std::vector<u8>& data_in, std::vector<u8>& data_out,
                             std::optional<Divergence>& div) {
  hal::Bindings b;
  for (const auto& p : t.params) {
    if (p.role != tpl::TemplateParam::kScalar) continue;
    auto it = args.find(p.name);
    if (it == args.end()) throw MalformedTemplate("missing argument " + p.name);
    b[p.name] = it->second;
  }
  // Pre-bind payload words the template reads.
  std::set<std::string> syms;
  collect_template_syms(t, syms);
  for (const auto& s : syms) {
    auto ds = parse_data_sym(s);
    if (!ds) continue;
    auto [off, width] = *ds;
    if (width < 1 || width > 8 || off + (u64)width > data_in.size())
      throw std::runtime_error("supplied payload too small for template (needs byte " +
                               std::to_string(off + (u64)width) + ")");
    u64 v = 0;
    std::memcpy(&v, data_in.data() + off, width);
    b[s] = v;
  }

  std::map<std::string, int> regions;
  std::vector<int> owned;
  std::deque<sim::IrqEvent> irqs;
  data_out.clear();

  auto release_owned = [&] {
    for (int id : owned) dev_.mem().free(id);
    owned.clear();
  };
  auto step_dev = [&](u64 n) {
    for (auto& ev : dev_.step(n)) irqs.push_back(ev);
  };
  auto region_of = [&](const std::string& sym, const Event& e) -> int {
    auto it = regions.find(sym);
    if (it == regions.end())
      throw MalformedTemplate("unknown region " + sym + " at " + e.src_loc);
    return it->second;
  };
  auto region_span = [&](const std::string& sym, u64 off, u64 len, const Event& e)
      -> std::span<u8> {
    int id = region_of(sym, e);
    if (!dev_.mem().live(id)) throw BoundsViolation("dead region " + sym + " at " + e.src_loc);
    u64 size = dev_.mem().size(id);
    if (off > size || len > size - off)
      throw BoundsViolation(sym + "+" + std::to_string(off) + " len " + std::to_string(len) +
                            " exceeds region size " + std::to_string(size) + " at " +
                            e.src_loc);
    return dev_.mem().bytes(id).subspan(off, len);
  };
  auto check_reg = [&](const Event& e) {
    if (!dev_.declared(e.reg))
      throw BoundsViolation("undeclared register " + hex(e.reg) + " at " + e.src_loc);
  };
  auto diverge = [&](size_t idx, const Event& e, const Constraint& c, u64 observed) {
    div = Divergence{idx, c, observed, e.src_loc};
    release_owned();
    return false;
  };

  for (size_t idx = 0; idx < t.events.size(); idx++) {
    const Event& e = t.events[idx];
    switch (e.kind) {
    case Event::kRead: {
      check_reg(e);
      u64 v = dev_.reg_read(e.reg);
      if (!tpl::satisfies(e.cons, v)) return diverge(idx, e, e.cons, v);
      b[e.binds] = v;
      break;
    }
    case Event::kWrite: {
      check_reg(e);
      dev_.reg_write(e.reg, (u32)eval_checked(e.value, b, e));
      break;
    }
    case Event::kMemRead: {
      if (e.width < 1 || e.width > 8)
        throw MalformedTemplate("bad mem_read width at " + e.src_loc);
      auto span = region_span(e.region, e.offset, (u64)e.width, e);
      u64 v = 0;
      std::memcpy(&v, span.data(), e.width);
      if (!tpl::satisfies(e.cons, v)) return diverge(idx, e, e.cons, v);
      b[e.binds] = v;
      break;
    }
    case Event::kMemWrite: {
      u64 off = e.offset_expr ? eval_checked(e.offset_expr, b, e) : e.offset;
      if (e.region == "data") {
        u64 len;
        std::vector<u8> src;
        if (e.slice) {
          u64 soff = eval_checked(e.slice->off, b, e);
          len = eval_checked(e.slice->len, b, e);
          auto span = region_span(e.slice->src, soff, len, e);
          src.assign(span.begin(), span.end());
        } else {
          if (e.width < 1 || e.width > 8)
            throw MalformedTemplate("bad mem_write width at " + e.src_loc);
          len = (u64)e.width;
          u64 v = eval_checked(e.value, b, e);
          src.resize(len);
          std::memcpy(src.data(), &v, len);
        }
        if (off > kMaxPayloadBytes || len > kMaxPayloadBytes)
          throw BoundsViolation("output payload bound exceeded at " + e.src_loc);
        if (data_out.size() < off + len) data_out.resize(off + len);
        std::memcpy(data_out.data() + off, src.data(), len);
      } else if (e.slice) {
        u64 soff = eval_checked(e.slice->off, b, e);
        u64 len = eval_checked(e.slice->len, b, e);
        auto dst = region_span(e.region, off, len, e);
        if (e.slice->src == "data") {
          if (soff + len > data_in.size() || soff + len < soff)
            throw std::runtime_error("supplied payload too small for template copy");
          std::memcpy(dst.data(), data_in.data() + soff, len);
        } else {
          auto srcspan = region_span(e.slice->src, soff, len, e);
          std::memmove(dst.data(), srcspan.data(), len);
        }
      } else {
        if (e.width < 1 || e.width > 8)
          throw MalformedTemplate("bad mem_write width at " + e.src_loc);
        u64 v = eval_checked(e.value, b, e);
        auto dst = region_span(e.region, off, (u64)e.width, e);
        std::memcpy(dst.data(), &v, e.width);
      }
      break;
    }
    case Event::kPoll: {
      check_reg(e);
      u64 last = 0;
      bool done = false;
      for (u64 i = 0; i < e.timeout; i++) {
        step_dev(1);
        last = dev_.reg_read(e.reg);
        if (tpl::satisfies(e.cons, last)) {
          done = true;
          break;
        }
      }
      if (!done) return diverge(idx, e, e.cons, last);
      break;
    }
    case Event::kDelay:
      step_dev(e.steps);
      break;
    case Event::kDmaAlloc: {
      u64 size = eval_checked(e.value, b, e);
      if (size == 0 || size > kMaxDmaAlloc)
        throw BoundsViolation("allocation size " + std::to_string(size) + " at " + e.src_loc);
      int id = dev_.mem().alloc(size);
      owned.push_back(id);
      regions[e.binds] = id;
      b[e.binds] = dev_.mem().base(id);
      break;
    }
    case Event::kWaitIrq: {
      bool got = false;
      for (u64 waited = 0; !got; waited++) {
        while (!irqs.empty()) {
          sim::IrqEvent iv = irqs.front();
          irqs.pop_front();
          if (iv.line == e.line) {
            got = true;
            break;
          }
        }
        if (got || waited >= e.timeout) break;
        step_dev(1);
      }
      if (!got) return diverge(idx, e, e.cons, 0);
      break;
    }
    case Event::kLoadMem: {
      auto it = t.snapshots.find(e.snapshot_id);
      if (it == t.snapshots.end())
        throw MalformedTemplate("missing snapshot " + e.snapshot_id + " at " + e.src_loc);
      const auto& bytes = it->second;
      auto dst = region_span(e.region, 0, bytes.size(), e);
      std::memcpy(dst.data(), bytes.data(), bytes.size());
      for (const auto& f : e.fixups) {
        u32 v = (u32)eval_checked(f.expr, b, e);
        auto fdst = region_span(e.region, f.offset, 4, e);
        std::memcpy(fdst.data(), &v, 4);
      }
      break;
    }
    }
  }
  return true;
}

ReplayOutcome Replayer::run(Invocation& inv) {
  // Selection never touches the device.
  std::vector<const tpl::InteractionTemplate*> cands;
  for (const auto& t : templates_) {
    if (t.entry != inv.entry) continue;
    bool ok = true;
    for (const auto& p : t.params) {
      if (p.role != tpl::TemplateParam::kScalar) continue;
      auto it = inv.args.find(p.name);
      if (it == inv.args.end() || !tpl::satisfies(p.cons, it->second)) {
        ok = false;
        break;
      }
    }
    if (ok) cands.push_back(&t);
  }
  if (cands.empty()) return {ReplayOutcome::NO_TEMPLATE, 0, {}, "inputs are out of coverage"};
  if (cands.size() > 1)
    return {ReplayOutcome::AMBIGUOUS, 0, {},
            "templates " + cands[0]->name + " and " + cands[1]->name + " both match"};
  const tpl::InteractionTemplate& t = *cands[0];

  const tpl::InteractionTemplate* reset_t = by_name(t.reset_name);
  if (!reset_t) throw MalformedTemplate("missing reset template " + t.reset_name);
  // Convention: <prefix>_reset pairs with <prefix>_init for device bring-up.
  const tpl::InteractionTemplate* init_t = nullptr;
  std::string rn = t.reset_name;
  if (rn.size() > 6 && rn.compare(rn.size() - 6, 6, "_reset") == 0)
    init_t = by_name(rn.substr(0, rn.size() - 6) + "_init");

  std::map<std::string, u64> no_args;
  std::vector<u8> scratch;
  std::optional<Divergence> last_div;

  bool wants_out = false;
  for (const auto& p : t.params)
    if (p.role == tpl::TemplateParam::kDataOut) wants_out = true;

  for (u64 attempt = 1; attempt <= inv.max_attempts; attempt++) {
    std::optional<Divergence> div;
    if (!init_done_ && init_t) {
      if (!exec_template(*init_t, no_args, {}, scratch, div)) {
        last_div = div;
        continue;
      }
      init_done_ = true;
    }
    // Clean-slate precondition before every execution; a failed reset still
    // counts toward the attempt (the execution will diverge immediately).
    exec_template(*reset_t, no_args, {}, scratch, div);
    div.reset();
    std::vector<u8> out;
    if (exec_template(t, inv.args, inv.data, out, div)) {
      if (wants_out) inv.data = std::move(out);
      return {ReplayOutcome::OK, attempt, {}, ""};
    }
    last_div = div;
  }
  return {ReplayOutcome::DIVERGED, inv.max_attempts, last_div, ""};
}

} // namespace driverlet::rep
