#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "driverlet/hal/trace.hpp"

namespace driverlet::tpl {

using hal::ExprPtr;
using hal::SliceRef;

// Patch applied to a memory snapshot before it is loaded: a 32-bit word at
// `offset` is recomputed from the expression under the replay bindings.
struct Fixup {
  u64 offset = 0;
  ExprPtr expr;
};

struct Event {
  enum Kind { kRead, kWrite, kMemRead, kMemWrite, kPoll, kDelay, kDmaAlloc, kWaitIrq, kLoadMem };

  Kind kind{};
  u64 reg = 0;               // register offset (read/write/poll)
  int width = 4;
  std::string binds;         // symbol bound by read/mem_read/dma_alloc
  Constraint cons = Constraint::always(); // read/mem_read/poll expectation
  ExprPtr value;             // write/mem_write value (null when slice is set)
  std::string region;        // mem op target: region symbol or "data"
  u64 offset = 0;            // concrete region offset
  ExprPtr offset_expr;       // expression-valued offset (writes into "data")
  std::optional<SliceRef> slice; // bulk copy source
  u64 timeout = 0;           // poll / wait_irq step budget
  u64 steps = 0;             // delay length
  int line = 0;              // irq line
  std::string snapshot_id;   // load_mem
  std::vector<Fixup> fixups; // load_mem patches
  std::string src_loc;
};

const char* event_kind_name(Event::Kind k);

struct TemplateParam {
  enum Role { kScalar, kDataIn, kDataOut };
  std::string name;
  Role role = kScalar;
  Constraint cons = Constraint::always();
};

struct InteractionTemplate {
  std::string name;
  std::string entry;      // entry-point signature this template serves
  std::string device_id;
  std::string reset_name; // template run to re-quiesce the device
  std::vector<TemplateParam> params;
  std::vector<Event> events;
  std::map<std::string, std::vector<u8>> snapshots;
  std::array<u8, 32> mac{};
  bool has_mac = false;

  const TemplateParam* param(const std::string& n) const;
};

// --- serialize.cpp ---------------------------------------------------------

struct ParseError : std::runtime_error {
  int line_no;
  ParseError(int ln, const std::string& w)
      : std::runtime_error("line " + std::to_string(ln) + ": " + w), line_no(ln) {}
};

// Canonical text form. Register offsets render as names when the device is
// known. parse(serialize(t)) reproduces t exactly.
std::string serialize(const InteractionTemplate& t, bool include_mac = true);
InteractionTemplate parse_template(const std::string& text);

// --- auth.cpp --------------------------------------------------------------

using Key = std::vector<u8>;

// MAC = HMAC-SHA256 over the serialized bytes that precede the "mac " line.
std::array<u8, 32> compute_mac(const std::string& body, const Key& key);
void sign(InteractionTemplate& t, const Key& key);
bool verify(const InteractionTemplate& t, const Key& key);
// Raw-file check: every byte of the stored file is covered, so any single-byte
// corruption fails even if it would survive a parse/re-serialize round trip.
bool verify_file_bytes(const std::string& file_bytes, const Key& key);

// --- merge.cpp -------------------------------------------------------------

// Two templates merge when their event sequences are structurally identical
// (everything but expectations and step budgets). Differing constraints widen
// to any(...), budgets take the max.
bool structurally_equal(const InteractionTemplate& a, const InteractionTemplate& b);
std::optional<InteractionTemplate> merge(const InteractionTemplate& a,
                                         const InteractionTemplate& b);
// Repeatedly merges until a fixpoint; result order follows first appearance.
std::vector<InteractionTemplate> merge_all(std::vector<InteractionTemplate> ts);

// --- coverage.cpp ----------------------------------------------------------

// Human-readable summary of the parameter space the template set covers.
std::string coverage_report(const std::vector<InteractionTemplate>& ts);

} // namespace driverlet::tpl
