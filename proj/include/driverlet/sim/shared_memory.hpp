#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driverlet/common.hpp"

namespace driverlet::sim {

// Host-visible memory the device can reach by physical address. Regions are
// page-aligned, never overlap, and can be released (replay retries drop stale
// regions before re-allocating).
class SharedMemory {
public:
  explicit SharedMemory(u64 alloc_base = 0x40000000) : next_base_(alloc_base) {}

  int alloc(u64 size); // throws on size 0 or > kMaxDmaAlloc
  void free(int region);

  u64 base(int region) const { return regions_.at(region).base; }
  u64 size(int region) const { return regions_.at(region).bytes.size(); }
  bool live(int region) const {
    return region >= 0 && region < (int)regions_.size() && regions_[region].live;
  }
  std::span<u8> bytes(int region) { return regions_.at(region).bytes; }

  // Device-side access by physical address; false on any out-of-bounds or
  // dead-region touch (the device goes to an error state, never the host).
  bool phys_read(u64 addr, void* out, u64 len) const;
  bool phys_write(u64 addr, const void* src, u64 len);
  std::optional<u32> phys_read32(u64 addr) const;

private:
  struct Region {
    u64 base = 0;
    std::vector<u8> bytes;
    bool live = false;
  };
  const Region* find(u64 addr, u64 len) const;

  std::vector<Region> regions_;
  u64 next_base_;
};

struct ZeroSize : std::runtime_error {
  ZeroSize() : std::runtime_error("zero-size DMA allocation") {}
};
struct OutOfMemory : std::runtime_error {
  OutOfMemory() : std::runtime_error("DMA allocation too large") {}
};

} // namespace driverlet::sim
