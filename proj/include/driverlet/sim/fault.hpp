#pragma once

#include <string>

#include "driverlet/common.hpp"

namespace driverlet::sim {

enum class FaultKind {
  None,
  TransientBadStatus,
  TransientDelay,
  PersistentMediumRemoved,
};

struct FaultPlan {
  FaultKind kind = FaultKind::None;
  u64 trigger_job_index = 0; // used when probability == 0
  double probability = 0.0;  // per-job Bernoulli when > 0
  u64 rng_seed = 0;

  static FaultPlan none() { return {}; }
  static FaultPlan at_job(FaultKind k, u64 job) { return {k, job, 0.0, 0}; }
  static FaultPlan random(FaultKind k, double p, u64 seed) { return {k, 0, p, seed}; }
};

FaultKind parse_fault_kind(const std::string& name); // throws on unknown name

} // namespace driverlet::sim
