#include "driverlet/sim/mockstream.hpp"

#include <cstring>

namespace driverlet::sim {

using namespace streamreg;
using namespace streammsg;

u64 stream_frame_size(u64 resolution) {
  switch (resolution) {
  case 0: return 0x30000; // 720p
  case 1: return 0x5A000; // 1080p
  case 2: return 0x90000; // 1440p
  }
  return 0;
}

MockStream::MockStream(u64 seed, FaultPlan plan, u64 alloc_base)
    : Device(seed, plan, alloc_base) {
  for (u64 off : {MBOX_WRITE, BELL0, BELL2}) declare(off);
}

const std::map<u64, std::string>& MockStream::reg_names() const {
  static const std::map<u64, std::string> names = {
      {MBOX_WRITE, "MBOX_WRITE"}, {BELL0, "BELL0"}, {BELL2, "BELL2"}};
  return names;
}

u32 MockStream::do_read(u64 offset) {
  switch (offset) {
  case MBOX_WRITE: return (u32)queue_base_;
  case BELL0: return bell0_;
  case BELL2: return 0;
  }
  return 0;
}

void MockStream::do_write(u64 offset, u32 value) {
  switch (offset) {
  case MBOX_WRITE:
    if (value == 0) {
      queue_base_ = 0;
      port_open_ = enabled_ = false;
      resolution_ = 0;
      bell0_ = 0;
      pending_latency_ = 0;
      frames_sent_ = 0;
    } else {
      queue_base_ = value;
    }
    break;
  case BELL0:
    bell0_ = value;
    break;
  case BELL2:
    if (queue_base_ == 0 || dead_) break; // no queue bound: stay inert
    pending_latency_ = draw_latency();
    break;
  }
}

void MockStream::respond(u32 type, const std::vector<u32>& body) {
  u64 slot2 = queue_base_ + 2 * kStreamSlotSize;
  u32 hdr[2] = {type, (u32)(body.size() * 4)};
  mem().phys_write(slot2, hdr, sizeof(hdr));
  if (!body.empty()) mem().phys_write(slot2 + 8, body.data(), body.size() * 4);
  // bump dev_wptr in slot 0 metadata
  u32 meta[3];
  if (mem().phys_read(queue_base_, meta, sizeof(meta))) {
    meta[2]++;
    mem().phys_write(queue_base_, meta, sizeof(meta));
  }
  bell0_ = 1;
  raise_irq(0);
}

void MockStream::process_message() {
  u32 meta[3];
  if (!mem().phys_read(queue_base_, meta, sizeof(meta))) return; // bad queue: inert
  u64 slot1 = queue_base_ + kStreamSlotSize;
  u32 hdr[2];
  if (!mem().phys_read(slot1, hdr, sizeof(hdr))) return;
  u32 type = hdr[0], len = hdr[1];
  u32 body[8] = {0};
  if (len > 0 && len <= sizeof(body)) mem().phys_read(slot1 + 8, body, len);
  switch (type) {
  case kOpenPort:
    port_open_ = true;
    respond(kAck, {0});
    break;
  case kConfigure:
    if (!port_open_) {
      respond(kAck, {1});
      break;
    }
    resolution_ = body[0];
    respond(kAck, {0});
    break;
  case kEnable:
    if (!port_open_) {
      respond(kAck, {1});
      break;
    }
    enabled_ = true;
    respond(kAck, {0});
    break;
  case kFrameReq: {
    if (!enabled_) {
      respond(kAck, {1});
      break;
    }
    u64 sz = stream_frame_size(resolution_);
    respond(kFrameInfo, {(u32)sz});
    break;
  }
  case kFrameRecv: {
    if (!enabled_) {
      respond(kAck, {1});
      break;
    }
    u64 buf = body[0], blen = body[1];
    u64 sz = stream_frame_size(resolution_);
    bool faulted = fault_fires_for_job(xfer_jobs_++);
    if (faulted && fault_.kind == FaultKind::PersistentMediumRemoved) {
      dead_ = true;
      break; // never responds again
    }
    if (faulted && fault_.kind == FaultKind::TransientDelay) break; // drop one transfer
    if (blen < sz) {
      respond(kAck, {1});
      break;
    }
    std::vector<u8> frame(sz);
    for (u64 i = 0; i < sz; i++)
      frame[i] = (u8)((frames_sent_ * 131 + i * 7 + resolution_ * 17) & 0xFF);
    if (!mem().phys_write(buf, frame.data(), sz)) {
      respond(kAck, {1});
      break;
    }
    u64 confirmed = sz;
    if (faulted && fault_.kind == FaultKind::TransientBadStatus) confirmed = sz + 512;
    frames_sent_++;
    respond(kXferDone, {(u32)confirmed});
    break;
  }
  default:
    respond(kAck, {1});
  }
}

void MockStream::do_step() {
  if (pending_latency_ > 0 && --pending_latency_ == 0) process_message();
}

} // namespace driverlet::sim
