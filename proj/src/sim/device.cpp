#include "driverlet/sim/device.hpp"

namespace driverlet::sim {

namespace {
u64 splitmix64(u64& st) {
  st += 0x9e3779b97f4a7c15ULL;
  u64 z = st;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
} // namespace

u64 Device::Rng::next() { return splitmix64(state); }

Device::Device(u64 seed, FaultPlan plan, u64 alloc_base)
    : fault_(plan),
      mem_(alloc_base),
      latency_rng_{seed ^ 0x1111111111111111ULL},
      jitter_rng_{seed ^ 0x2222222222222222ULL},
      fault_rng_{plan.rng_seed ^ 0x3333333333333333ULL} {}

u32 Device::reg_read(u64 offset) {
  if (!declared(offset)) throw UndeclaredRegister(offset);
  access_count_++;
  return do_read(offset);
}

void Device::reg_write(u64 offset, u32 value) {
  if (!declared(offset)) throw UndeclaredRegister(offset);
  access_count_++;
  log_.reg_writes.emplace_back(offset, value);
  do_write(offset, value);
}

std::vector<IrqEvent> Device::step(u64 n) {
  for (u64 i = 0; i < n; i++) {
    step_++;
    do_step();
  }
  std::vector<IrqEvent> fired = std::move(pending_irqs_);
  pending_irqs_.clear();
  return fired;
}

bool Device::fault_fires_for_job(u64 job_index) {
  if (fault_.kind == FaultKind::None) return false;
  if (fault_.kind == FaultKind::PersistentMediumRemoved)
    return job_index >= fault_.trigger_job_index;
  if (last_job_faulted_) {
    last_job_faulted_ = false;
    return false;
  }
  bool fire = false;
  if (fault_.probability > 0.0) {
    double u = (double)(fault_rng_.next() >> 11) / (double)(1ULL << 53);
    fire = u < fault_.probability;
  } else {
    fire = job_index == fault_.trigger_job_index;
  }
  last_job_faulted_ = fire;
  return fire;
}

FaultKind parse_fault_kind(const std::string& name) {
  if (name == "none") return FaultKind::None;
  if (name == "transient-bad-status") return FaultKind::TransientBadStatus;
  if (name == "transient-delay") return FaultKind::TransientDelay;
  if (name == "persistent-medium-removed") return FaultKind::PersistentMediumRemoved;
  throw std::runtime_error("unknown fault kind: " + name);
}

} // namespace driverlet::sim
