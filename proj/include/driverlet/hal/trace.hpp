#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "driverlet/hal/symexpr.hpp"
#include "driverlet/tpl/constraint.hpp"

namespace driverlet::hal {

enum class TraceKind {
  RegRead,
  RegWrite,
  MemRead,
  MemWrite,
  MemSnapshot,
  DmaAlloc,
  Rand,
  Time,
  IrqWait,
  Delay,
  PollEnter,
  PollExit,
  Branch,
};

const char* trace_kind_name(TraceKind k);

// Bulk byte movement: a slice of the invocation payload ("data") or of a DMA
// region, with expression-valued bounds so replays re-derive them.
struct SliceRef {
  std::string src; // "data" or a region symbol
  ExprPtr off;
  ExprPtr len;
};

struct TraceEntry {
  u64 seq = 0;
  TraceKind kind{};
  u64 offset = 0;       // register offset, or concrete region offset
  std::string region;   // region symbol or "data" for mem ops/snapshots
  int width = 4;
  u64 value = 0;        // concrete value observed/written
  ExprPtr value_expr;   // taint expression for writes (null = constant)
  ExprPtr offset_expr;  // tainted offset for mem writes into "data"
  std::optional<SliceRef> slice;
  std::string sym;      // symbol bound by reads / allocs
  tpl::Constraint cond = tpl::Constraint::always(); // poll / branch condition
  ExprPtr branch_expr;
  bool taken = false;
  std::vector<u8> bytes; // snapshot contents
  u64 count = 0;         // poll iterations / delay or wait steps / alloc size
  int line = 0;          // irq line
  std::string src_loc;
};

struct RawTrace {
  std::vector<TraceEntry> entries;

  TraceEntry& append(TraceKind kind) {
    entries.emplace_back();
    entries.back().seq = entries.size() - 1;
    entries.back().kind = kind;
    return entries.back();
  }
  void dump(std::ostream& os) const; // line-oriented evidence format
};

} // namespace driverlet::hal
