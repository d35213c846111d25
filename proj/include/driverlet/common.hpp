#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace driverlet {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;

constexpr u64 kPageSize = 4096;
constexpr u64 kBlockSize = 512;
constexpr u64 kMaxDmaAlloc = 1u << 20; // 1 MiB

// Completion latency window for simulated devices, in steps.
constexpr u64 kMinLatency = 1;
constexpr u64 kMaxLatency = 50;

inline std::string hex(u64 v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx", (unsigned long long)v);
  return buf;
}

struct UndeclaredRegister : std::runtime_error {
  explicit UndeclaredRegister(u64 off)
      : std::runtime_error("undeclared register offset " + hex(off)) {}
};

} // namespace driverlet
