#pragma once

#include <functional>

#include "driverlet/hal/context.hpp"
#include "driverlet/tpl/template.hpp"

namespace driverlet::rec {

enum class PayloadDir { None, In, Out };

struct EntryArg {
  std::string name;
  u64 lo = 0;
  u64 hi = 0; // inclusive domain for witness search and sampling
};

using Args = std::map<std::string, u64>;
using TrackedArgs = std::map<std::string, hal::Tracked>;

// A recordable gold-driver entry point.
struct EntrySpec {
  std::string name;
  std::string device;
  std::string init_name;  // entry that brings a fresh device up
  std::string reset_name; // entry that re-quiesces the device
  std::vector<EntryArg> args;
  std::function<PayloadDir(const Args&)> payload_dir;
  std::function<u64(const Args&)> payload_size; // bytes supplied for In payloads
  std::function<void(hal::Context&, const TrackedArgs&)> run;

  const EntryArg* arg(const std::string& n) const;
};

const std::vector<EntrySpec>& entry_registry();
const EntrySpec& find_entry(const std::string& name); // throws on unknown entry

struct DriverError : std::runtime_error {
  explicit DriverError(const std::string& w) : std::runtime_error("record run failed: " + w) {}
};
struct DistillError : std::runtime_error {
  explicit DistillError(const std::string& w) : std::runtime_error("distill: " + w) {}
};
struct CampaignError : std::runtime_error {
  explicit CampaignError(const std::string& w) : std::runtime_error("campaign: " + w) {}
};

struct RecordRun {
  std::string entry;
  Args args;
  u64 seed = 0;
  hal::RawTrace trace;
  hal::Bindings bindings;
  std::vector<u8> payload; // final payload buffer (input or captured output)
};

// Outcome of one forced re-execution probing a branch's alternative arm.
struct BranchEvidence {
  u64 seq = 0;         // trace index of the branch entry
  std::string symbol;  // symbol the constraint applies to
  bool device_input = false;
  tpl::Constraint cons = tpl::Constraint::always(); // taken-polarity constraint
  u64 witness = 0;
  bool divergent = false;
  std::string note; // skeleton-difference summary, kept as evidence
  std::string src_loc;
};

// Deterministic In-direction payload pattern for record runs.
std::vector<u8> record_payload(u64 seed, u64 size);

RecordRun record_run(const std::string& entry, const Args& args, u64 seed);

// Output-event signature list; equality means state-transition equivalence.
std::vector<std::string> output_skeleton(const hal::RawTrace& trace);

std::vector<BranchEvidence> explore(const RecordRun& run);

tpl::InteractionTemplate distill(const RecordRun& run, const std::vector<BranchEvidence>& ev,
                                 const std::string& name);

// Template/file tag for a run, e.g. blk_rw {rw:0, blkcnt:8} -> "RD_8".
std::string template_tag(const std::string& entry, const Args& args);

struct CampaignResult {
  std::vector<tpl::InteractionTemplate> templates; // merged and signed
  std::string coverage;
  // evidence per recorded run: raw trace dump plus exploration outcomes
  std::vector<std::pair<std::string, std::string>> evidence;
};

CampaignResult campaign(const std::vector<std::pair<std::string, Args>>& runs, u64 seed,
                        const tpl::Key& key);

} // namespace driverlet::rec
