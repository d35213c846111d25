#include "driverlet/sim/shared_memory.hpp"

#include <cstring>

namespace driverlet::sim {

int SharedMemory::alloc(u64 size) {
  if (size == 0) throw ZeroSize();
  if (size > kMaxDmaAlloc) throw OutOfMemory();
  Region r;
  r.base = next_base_;
  r.bytes.assign(size, 0);
  r.live = true;
  u64 pages = (size + kPageSize - 1) / kPageSize;
  next_base_ += pages * kPageSize;
  regions_.push_back(std::move(r));
  return (int)regions_.size() - 1;
}

void SharedMemory::free(int region) {
  if (region < 0 || region >= (int)regions_.size()) return;
  regions_[region].live = false;
  regions_[region].bytes.clear();
}

const SharedMemory::Region* SharedMemory::find(u64 addr, u64 len) const {
  for (const auto& r : regions_) {
    if (!r.live) continue;
    if (addr >= r.base && addr + len <= r.base + r.bytes.size()) return &r;
  }
  return nullptr;
}

bool SharedMemory::phys_read(u64 addr, void* out, u64 len) const {
  if (len == 0) return true;
  if (addr + len < addr) return false;
  const Region* r = find(addr, len);
  if (!r) return false;
  std::memcpy(out, r->bytes.data() + (addr - r->base), len);
  return true;
}

bool SharedMemory::phys_write(u64 addr, const void* src, u64 len) {
  if (len == 0) return true;
  if (addr + len < addr) return false;
  const Region* r = find(addr, len);
  if (!r) return false;
  std::memcpy(const_cast<u8*>(r->bytes.data()) + (addr - r->base), src, len);
  return true;
}

std::optional<u32> SharedMemory::phys_read32(u64 addr) const {
  u32 v = 0;
  if (!phys_read(addr, &v, 4)) return std::nullopt;
  return v;
}

} // namespace driverlet::sim
