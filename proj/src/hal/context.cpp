#include "driverlet/hal/context.hpp"

#include <cstring>

namespace driverlet::hal {

const char* trace_kind_name(TraceKind k) {
  switch (k) {
  case TraceKind::RegRead: return "REG_READ";
  case TraceKind::RegWrite: return "REG_WRITE";
  case TraceKind::MemRead: return "MEM_READ";
  case TraceKind::MemWrite: return "MEM_WRITE";
  case TraceKind::MemSnapshot: return "MEM_SNAPSHOT";
  case TraceKind::DmaAlloc: return "DMA_ALLOC";
  case TraceKind::Rand: return "RAND";
  case TraceKind::Time: return "TIME";
  case TraceKind::IrqWait: return "IRQ_WAIT";
  case TraceKind::Delay: return "DELAY";
  case TraceKind::PollEnter: return "POLL_ENTER";
  case TraceKind::PollExit: return "POLL_EXIT";
  case TraceKind::Branch: return "BRANCH";
  }
  return "?";
}

void RawTrace::dump(std::ostream& os) const {
  for (const auto& e : entries) {
    os << e.seq << " " << trace_kind_name(e.kind);
    switch (e.kind) {
    case TraceKind::RegRead:
    case TraceKind::RegWrite:
      os << " " << hex(e.offset) << " " << hex(e.value);
      break;
    case TraceKind::MemRead:
    case TraceKind::MemWrite:
      os << " " << e.region << "+" << e.offset << " " << hex(e.value);
      break;
    case TraceKind::MemSnapshot:
      os << " " << e.region << " len=" << e.bytes.size();
      break;
    case TraceKind::DmaAlloc:
      os << " " << e.sym << " size=" << e.count;
      break;
    case TraceKind::IrqWait:
      os << " line=" << e.line << " steps=" << e.count;
      break;
    case TraceKind::Delay:
      os << " steps=" << e.count;
      break;
    case TraceKind::PollEnter:
      os << " " << hex(e.offset) << " cond=\"" << tpl::to_string(e.cond) << "\"";
      break;
    case TraceKind::PollExit:
      os << " iters=" << e.count << " " << hex(e.value);
      break;
    case TraceKind::Branch:
      os << " cond=\"" << tpl::to_string(e.cond) << "\" taken=" << (e.taken ? 1 : 0)
         << " over=" << (e.branch_expr ? to_prefix(e.branch_expr) : "-");
      break;
    default:
      break;
    }
    if (!e.sym.empty() && e.kind != TraceKind::DmaAlloc) os << " -> " << e.sym;
    if (e.value_expr) os << " " << to_prefix(e.value_expr);
    if (e.slice)
      os << " " << e.slice->src << "[" << to_prefix(e.slice->off) << ":"
         << to_prefix(e.slice->len) << "]";
    if (!e.src_loc.empty()) os << " src=" << e.src_loc;
    os << "\n";
  }
}

Tracked Context::bind_arg(const std::string& name, u64 value) {
  bindings_[name] = value;
  return make_sym(value, name);
}

Tracked Context::payload_word(u64 offset) {
  if (offset + 4 > payload.size()) throw std::runtime_error("payload read out of range");
  u32 v = 0;
  std::memcpy(&v, payload.data() + offset, 4);
  std::string name = "data:" + std::to_string(offset) + ":4";
  bindings_[name] = v;
  return make_sym(v, name);
}

Tracked Context::fresh_dev_input(u64 concrete) {
  int idx = dev_in_counter_++;
  u64 v = concrete;
  if (forcing && forcing->dev_in_index == idx) v = forcing->witness;
  std::string name = "dev_in_" + std::to_string(idx);
  bindings_[name] = v;
  return make_sym(v, name);
}

void Context::step_dev(u64 n) {
  for (auto& ev : dev_.step(n)) irq_buffer_.push_back(ev);
}

void Context::note_consumed_regions(const ExprPtr& e, const std::string& loc) {
  if (!e) return;
  std::set<std::string> syms;
  collect_syms(e, syms);
  for (const auto& s : syms) {
    auto it = region_by_symbol_.find(s);
    if (it == region_by_symbol_.end()) continue;
    if (!scalar_dirty_[it->second]) continue;
    auto& entry = trace_.append(TraceKind::MemSnapshot);
    entry.region = s;
    auto bytes = dev_.mem().bytes(it->second);
    entry.bytes.assign(bytes.begin(), bytes.end());
    entry.src_loc = loc;
    scalar_dirty_[it->second] = false;
  }
}

Tracked Context::read_reg(u64 offset, const std::string& loc) {
  u32 v = dev_.reg_read(offset);
  Tracked t = fresh_dev_input(v);
  auto& e = trace_.append(TraceKind::RegRead);
  e.offset = offset;
  e.value = t.c;
  e.sym = t.e->name;
  e.src_loc = loc;
  return t;
}

void Context::write_reg(u64 offset, const Tracked& v, const std::string& loc) {
  if (v.tainted() && eval(v.e, bindings_) != v.c)
    throw ConsistencyError("reg write " + hex(offset) + " expr " + to_prefix(v.e));
  note_consumed_regions(v.e, loc);
  dev_.reg_write(offset, (u32)v.c);
  auto& e = trace_.append(TraceKind::RegWrite);
  e.offset = offset;
  e.value = (u32)v.c;
  e.value_expr = v.e;
  e.src_loc = loc;
}

Region Context::dma_alloc(const Tracked& size, const std::string& loc) {
  int id = dev_.mem().alloc(size.c); // throws ZeroSize / OutOfMemory
  Region r;
  r.id = id;
  r.symbol = "dma_" + std::to_string(dma_counter_++);
  r.size = size.c;
  u64 base = dev_.mem().base(id);
  bindings_[r.symbol] = base;
  r.base = make_sym(base, r.symbol);
  regions_.push_back(r);
  region_by_symbol_[r.symbol] = id;
  auto& e = trace_.append(TraceKind::DmaAlloc);
  e.sym = r.symbol;
  e.count = size.c;
  e.value_expr = size.e;
  e.src_loc = loc;
  return r;
}

Tracked Context::mem_read(const Region& r, u64 offset, int width, const std::string& loc) {
  if (offset + (u64)width > dev_.mem().size(r.id))
    throw std::runtime_error("mem_read out of region bounds");
  u64 v = 0;
  std::memcpy(&v, dev_.mem().bytes(r.id).data() + offset, width);
  Tracked t = fresh_dev_input(v);
  auto& e = trace_.append(TraceKind::MemRead);
  e.region = r.symbol;
  e.offset = offset;
  e.width = width;
  e.value = t.c;
  e.sym = t.e->name;
  e.src_loc = loc;
  return t;
}

void Context::mem_write(const Region& r, u64 offset, const Tracked& v, int width,
                        const std::string& loc) {
  if (offset + (u64)width > dev_.mem().size(r.id))
    throw std::runtime_error("mem_write out of region bounds");
  if (v.tainted() && eval(v.e, bindings_) != v.c)
    throw ConsistencyError("mem write " + r.symbol + "+" + std::to_string(offset));
  note_consumed_regions(v.e, loc);
  std::memcpy(dev_.mem().bytes(r.id).data() + offset, &v.c, width);
  scalar_dirty_[r.id] = true;
  auto& e = trace_.append(TraceKind::MemWrite);
  e.region = r.symbol;
  e.offset = offset;
  e.width = width;
  e.value = v.c;
  e.value_expr = v.e;
  e.src_loc = loc;
}

void Context::copy_from_payload(const Region& r, u64 region_off, u64 payload_off,
                                const Tracked& len, const std::string& loc) {
  if (len.tainted() && eval(len.e, bindings_) != len.c)
    throw ConsistencyError("payload copy length into " + r.symbol);
  if (payload_off + len.c > payload.size())
    throw std::runtime_error("payload slice out of range");
  if (region_off + len.c > dev_.mem().size(r.id))
    throw std::runtime_error("payload copy out of region bounds");
  std::memcpy(dev_.mem().bytes(r.id).data() + region_off, payload.data() + payload_off, len.c);
  auto& e = trace_.append(TraceKind::MemWrite);
  e.region = r.symbol;
  e.offset = region_off;
  e.width = (int)len.c;
  e.slice = SliceRef{"data", cst(payload_off), len.expr()};
  e.src_loc = loc;
}

void Context::copy_to_payload(const Tracked& payload_off, const Region& r, u64 region_off,
                              const Tracked& len, const std::string& loc) {
  if (region_off + len.c > dev_.mem().size(r.id))
    throw std::runtime_error("payload copy out of region bounds");
  if (payload.size() < payload_off.c + len.c) payload.resize(payload_off.c + len.c);
  std::memcpy(payload.data() + payload_off.c, dev_.mem().bytes(r.id).data() + region_off,
              len.c);
  auto& e = trace_.append(TraceKind::MemWrite);
  e.region = "data";
  e.offset = payload_off.c;
  e.offset_expr = payload_off.e;
  e.width = (int)len.c;
  e.slice = SliceRef{r.symbol, cst(region_off), len.expr()};
  e.src_loc = loc;
}

void Context::store_payload_word(u64 offset, const Tracked& v, const std::string& loc) {
  if (payload.size() < offset + 4) payload.resize(offset + 4);
  u32 w = (u32)v.c;
  std::memcpy(payload.data() + offset, &w, 4);
  auto& e = trace_.append(TraceKind::MemWrite);
  e.region = "data";
  e.offset = offset;
  e.width = 4;
  e.value = w;
  e.value_expr = v.e;
  e.src_loc = loc;
}

Tracked Context::poll(u64 offset, const tpl::Constraint& cond, u64 timeout_steps,
                      const std::string& loc) {
  auto& enter = trace_.append(TraceKind::PollEnter);
  enter.offset = offset;
  enter.cond = cond;
  enter.src_loc = loc;
  u64 last = 0;
  for (u64 i = 1; i <= timeout_steps; i++) {
    step_dev(1);
    u32 v = dev_.reg_read(offset);
    auto& rd = trace_.append(TraceKind::RegRead);
    rd.offset = offset;
    rd.value = v;
    rd.src_loc = loc;
    last = v;
    if (tpl::satisfies(cond, v)) {
      auto& exit = trace_.append(TraceKind::PollExit);
      exit.offset = offset;
      exit.count = i;
      exit.value = v;
      exit.src_loc = loc;
      return Tracked{v};
    }
  }
  auto& exit = trace_.append(TraceKind::PollExit);
  exit.offset = offset;
  exit.count = timeout_steps;
  exit.value = last;
  exit.src_loc = loc;
  throw PollTimeout(last);
}

void Context::wait_irq(int line, u64 timeout_steps, const std::string& loc) {
  for (u64 waited = 0; waited <= timeout_steps; waited++) {
    while (!irq_buffer_.empty()) {
      sim::IrqEvent ev = irq_buffer_.front();
      irq_buffer_.pop_front();
      if (ev.line == line) {
        auto& e = trace_.append(TraceKind::IrqWait);
        e.line = line;
        e.count = waited;
        e.src_loc = loc;
        return;
      }
    }
    if (waited == timeout_steps) break;
    step_dev(1);
  }
  throw IrqTimeout();
}

void Context::delay(u64 steps, const std::string& loc) {
  step_dev(steps);
  auto& e = trace_.append(TraceKind::Delay);
  e.count = steps;
  e.src_loc = loc;
}

bool Context::branch(const Tracked& v, const tpl::Constraint& c, const std::string& loc) {
  bool taken = tpl::satisfies(c, v.c);
  if (v.tainted()) {
    auto& e = trace_.append(TraceKind::Branch);
    e.cond = c;
    e.branch_expr = v.e;
    e.value = v.c;
    e.taken = taken;
    e.src_loc = loc;
  }
  return taken;
}

} // namespace driverlet::hal
