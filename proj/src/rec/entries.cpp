#include "driverlet/gold/drivers.hpp"
#include "driverlet/rec/recorder.hpp"

namespace driverlet::rec {

namespace {

constexpr u64 kU32Max = 0xFFFFFFFFull;

u64 arg_of(const Args& a, const std::string& n) {
  auto it = a.find(n);
  if (it == a.end()) throw std::runtime_error("missing argument " + n);
  return it->second;
}

hal::Tracked targ(const TrackedArgs& a, const std::string& n) {
  auto it = a.find(n);
  if (it == a.end()) throw std::runtime_error("missing argument " + n);
  return it->second;
}

std::vector<EntrySpec> build_registry() {
  std::vector<EntrySpec> reg;

  auto no_payload = [](const Args&) { return PayloadDir::None; };
  auto zero_size = [](const Args&) -> u64 { return 0; };

  reg.push_back({"blk_init", "mockblk", "blk_init", "blk_reset", {}, no_payload, zero_size,
                 [](hal::Context& c, const TrackedArgs&) { gold::blk_init(c); }});
  reg.push_back({"blk_reset", "mockblk", "blk_init", "blk_reset", {}, no_payload, zero_size,
                 [](hal::Context& c, const TrackedArgs&) { gold::blk_reset(c); }});
  reg.push_back({"blk_rw",
                 "mockblk",
                 "blk_init",
                 "blk_reset",
                 {{"rw", 0, 1}, {"blkid", 0, kU32Max}, {"blkcnt", 0, kU32Max}},
                 [](const Args& a) {
                   return arg_of(a, "rw") == 0 ? PayloadDir::Out : PayloadDir::In;
                 },
                 [](const Args& a) { return arg_of(a, "blkcnt") * kBlockSize; },
                 [](hal::Context& c, const TrackedArgs& a) {
                   gold::blk_rw(c, {targ(a, "rw"), targ(a, "blkid"), targ(a, "blkcnt")});
                 }});

  reg.push_back({"stream_init", "mockstream", "stream_init", "stream_reset", {}, no_payload,
                 zero_size, [](hal::Context& c, const TrackedArgs&) { gold::stream_init(c); }});
  reg.push_back({"stream_reset", "mockstream", "stream_init", "stream_reset", {}, no_payload,
                 zero_size, [](hal::Context& c, const TrackedArgs&) { gold::stream_reset(c); }});
  reg.push_back({"stream_capture",
                 "mockstream",
                 "stream_init",
                 "stream_reset",
                 {{"resolution", 0, kU32Max}, {"frames", 0, 100000}},
                 [](const Args&) { return PayloadDir::Out; },
                 zero_size,
                 [](hal::Context& c, const TrackedArgs& a) {
                   gold::stream_capture(c, {targ(a, "resolution"), targ(a, "frames")});
                 }});
  return reg;
}

} // namespace

const EntryArg* EntrySpec::arg(const std::string& n) const {
  for (const auto& a : args)
    if (a.name == n) return &a;
  return nullptr;
}

const std::vector<EntrySpec>& entry_registry() {
  static const std::vector<EntrySpec> reg = build_registry();
  return reg;
}

const EntrySpec& find_entry(const std::string& name) {
  for (const auto& e : entry_registry())
    if (e.name == name) return e;
  throw std::runtime_error("unknown entry point " + name);
}

} // namespace driverlet::rec
