#pragma once

#include <deque>

#include "driverlet/hal/tracked.hpp"
#include "driverlet/hal/trace.hpp"
#include "driverlet/sim/device.hpp"

namespace driverlet::hal {

inline std::string src_loc(const char* file, int line) {
  std::string f(file);
  size_t slash = f.find_last_of('/');
  if (slash != std::string::npos) f = f.substr(slash + 1);
  return f + ":" + std::to_string(line);
}
#define DLT_LOC (::driverlet::hal::src_loc(__FILE__, __LINE__))

struct PollTimeout : std::runtime_error {
  u64 last_value;
  explicit PollTimeout(u64 last)
      : std::runtime_error("poll timeout, last value " + hex(last)), last_value(last) {}
};
struct IrqTimeout : std::runtime_error {
  IrqTimeout() : std::runtime_error("irq wait timeout") {}
};
struct ConsistencyError : std::runtime_error {
  explicit ConsistencyError(const std::string& w)
      : std::runtime_error("tracked value inconsistent: " + w) {}
};

// Injected device-input override for a forced exploration run: the Nth fresh
// device-input symbol reads back `witness` instead of the device value.
struct Forcing {
  int dev_in_index;
  u64 witness;
};

// A DMA region handle as seen by the driver: its base address is tainted with
// the region's address symbol, so any use of the address is discoverable.
struct Region {
  int id = -1;
  std::string symbol;
  Tracked base;
  u64 size = 0;
};

// The traced driver/world boundary. Every device register or shared-memory
// access by a gold driver goes through here; record-mode symbols accumulate
// in `bindings`, and the entry log is the raw material for distillation.
class Context {
public:
  explicit Context(sim::Device& dev) : dev_(dev) {}

  sim::Device& device() { return dev_; }

  // program inputs / payload
  Tracked bind_arg(const std::string& name, u64 value);
  Tracked payload_word(u64 offset); // binds symbol "data:<off>:4"
  std::vector<u8> payload;          // request payload (in for writes, out for reads)

  // the three recorded interfaces
  Tracked read_reg(u64 offset, const std::string& loc);
  void write_reg(u64 offset, const Tracked& v, const std::string& loc);
  Region dma_alloc(const Tracked& size, const std::string& loc);
  Tracked mem_read(const Region& r, u64 offset, int width, const std::string& loc);
  void mem_write(const Region& r, u64 offset, const Tracked& v, int width,
                 const std::string& loc);
  void copy_from_payload(const Region& r, u64 region_off, u64 payload_off,
                         const Tracked& len, const std::string& loc);
  void copy_to_payload(const Tracked& payload_off, const Region& r, u64 region_off,
                       const Tracked& len, const std::string& loc);
  void store_payload_word(u64 offset, const Tracked& v, const std::string& loc);
  Tracked poll(u64 offset, const tpl::Constraint& cond, u64 timeout_steps,
               const std::string& loc);
  void wait_irq(int line, u64 timeout_steps, const std::string& loc);
  void delay(u64 steps, const std::string& loc);
  bool branch(const Tracked& v, const tpl::Constraint& c, const std::string& loc);

  const RawTrace& trace() const { return trace_; }
  const Bindings& bindings() const { return bindings_; }
  int dma_alloc_count() const { return dma_counter_; }

  std::optional<Forcing> forcing;

private:
  Tracked fresh_dev_input(u64 concrete);
  void note_consumed_regions(const ExprPtr& e, const std::string& loc);
  void step_dev(u64 n);

  sim::Device& dev_;
  RawTrace trace_;
  Bindings bindings_;
  std::map<std::string, int> region_by_symbol_;
  std::map<int, bool> scalar_dirty_;
  std::vector<Region> regions_;
  std::deque<sim::IrqEvent> irq_buffer_;
  int dev_in_counter_ = 0;
  int dma_counter_ = 0;
};

} // namespace driverlet::hal
