#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "driverlet/sim/fault.hpp"
#include "driverlet/sim/shared_memory.hpp"

namespace driverlet::sim {

struct IrqEvent {
  int line;
  u64 step;
};

// One descriptor-resolved DMA transfer, kept for differential comparison.
struct DmaXfer {
  u64 src;
  u64 dst;
  u64 len;
};

// Device-observed stimulus log. Register writes and DMA topology are the
// state-changing surface the differential oracle compares.
struct ObservedLog {
  std::vector<std::pair<u64, u32>> reg_writes; // (offset, value)
  std::vector<std::vector<DmaXfer>> dma_chains;
  std::vector<IrqEvent> irqs;
};

class Device {
public:
  virtual ~Device() = default;

  u32 reg_read(u64 offset);
  void reg_write(u64 offset, u32 value);
  std::vector<IrqEvent> step(u64 n);

  SharedMemory& mem() { return mem_; }
  u64 now() const { return step_; }
  u64 access_count() const { return access_count_; }
  const ObservedLog& observed() const { return log_; }
  bool declared(u64 offset) const { return reg_offsets_.count(offset) != 0; }

  virtual const std::map<u64, std::string>& reg_names() const = 0;
  virtual std::string id() const = 0;

protected:
  Device(u64 seed, FaultPlan plan, u64 alloc_base);

  virtual u32 do_read(u64 offset) = 0;
  virtual void do_write(u64 offset, u32 value) = 0;
  virtual void do_step() = 0;

  void declare(u64 offset) { reg_offsets_.insert(offset); }
  void raise_irq(int line) {
    pending_irqs_.push_back({line, step_});
    log_.irqs.push_back({line, step_});
  }
  u64 draw_latency() { return kMinLatency + latency_rng_.next() % (kMaxLatency - kMinLatency + 1); }
  u64 jitter() { return jitter_rng_.next(); }

  // One decision per new job; a fired fault suppresses the next draw so a
  // reset-and-retry always sees a clean device (fault locality).
  bool fault_fires_for_job(u64 job_index);

  FaultPlan fault_;
  ObservedLog log_;

private:
  struct Rng {
    u64 state;
    u64 next();
  };

  SharedMemory mem_;
  std::set<u64> reg_offsets_;
  std::vector<IrqEvent> pending_irqs_;
  Rng latency_rng_;
  Rng jitter_rng_;
  Rng fault_rng_;
  u64 step_ = 0;
  u64 access_count_ = 0;
  bool last_job_faulted_ = false;
};

} // namespace driverlet::sim
