#pragma once

#include "driverlet/rep/replayer.hpp"

namespace driverlet::rep {

struct OracleReport {
  u64 trials = 0;
  u64 mismatches = 0;
  std::string first_mismatch; // names the first diverging event or check
};

// Runs `trials` random in-coverage invocations of `entry`: gold driver and
// replayer each on a fresh twin-seeded device, comparing the device-observed
// state-changing stimulus (register writes, DMA chains, interrupts) and the
// data payloads end to end.
OracleReport diff_oracle(const std::vector<tpl::InteractionTemplate>& templates,
                         const std::string& entry, u64 trials, u64 seed);

} // namespace driverlet::rep
