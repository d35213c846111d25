#pragma once

#include "driverlet/sim/device.hpp"

namespace driverlet::sim {

namespace streamreg {
constexpr u64 MBOX_WRITE = 0x00; // queue base address; 0 resets the device
constexpr u64 BELL0 = 0x40;      // device->host doorbell (read pending, write 0 to ack)
constexpr u64 BELL2 = 0x48;      // host->device doorbell
} // namespace streamreg

// Message queue layout: 4 KB slots inside one shared region.
//   slot 0: metadata {slot_count, host_wptr, dev_wptr}
//   slot 1: host -> device message, slot 2: device -> host response
// Message: header {type:32, len:32} followed by len bytes of body.
namespace streammsg {
constexpr u32 kOpenPort = 0x1;
constexpr u32 kConfigure = 0x2; // body: {resolution}
constexpr u32 kEnable = 0x3;
constexpr u32 kFrameReq = 0x4;
constexpr u32 kFrameRecv = 0x5; // body: {buf_addr, buf_len}
constexpr u32 kAck = 0x81;      // body: {status}
constexpr u32 kFrameInfo = 0x84; // body: {img_size}
constexpr u32 kXferDone = 0x85;  // body: {confirmed_size}
} // namespace streammsg

constexpr u64 kStreamSlotSize = 4096;
constexpr u64 kStreamSlotCount = 4;

// Device-chosen frame sizes per resolution index (0=720p, 1=1080p, 2=1440p).
u64 stream_frame_size(u64 resolution);

class MockStream : public Device {
public:
  MockStream(u64 seed, FaultPlan plan, u64 alloc_base = 0x40000000);

  const std::map<u64, std::string>& reg_names() const override;
  std::string id() const override { return "mockstream"; }
  u64 frames_sent() const { return frames_sent_; }

protected:
  u32 do_read(u64 offset) override;
  void do_write(u64 offset, u32 value) override;
  void do_step() override;

private:
  void process_message();
  void respond(u32 type, const std::vector<u32>& body);

  u64 queue_base_ = 0;
  bool port_open_ = false;
  bool enabled_ = false;
  u64 resolution_ = 0;
  u32 bell0_ = 0;
  u64 pending_latency_ = 0; // > 0 while a BELL2 ring is being processed
  bool dead_ = false;       // persistent fault tripped
  u64 frames_sent_ = 0;
  u64 xfer_jobs_ = 0;
};

} // namespace driverlet::sim
