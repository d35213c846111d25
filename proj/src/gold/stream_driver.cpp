#include "driverlet/gold/drivers.hpp"

#include <vector>

#include "driverlet/sim/mockstream.hpp"

namespace driverlet::gold {

using hal::Context;
using hal::Region;
using hal::Tracked;
using tpl::Constraint;
using namespace sim::streamreg;
using namespace sim::streammsg;

namespace {

constexpr u64 kIrqBudget = 400;
constexpr u64 kSlot1 = sim::kStreamSlotSize;     // host -> device message
constexpr u64 kSlot2 = 2 * sim::kStreamSlotSize; // device -> host response

struct Port {
  Context& c;
  Region queue;
  u64 host_seq = 0;

  // Post one message, ring the doorbell, wait for the response interrupt and
  // check the response type. Returns the first body word (0 if none).
  Tracked exchange(u32 type, const std::vector<Tracked>& body, u32 expect_type,
                   bool has_body_word) {
    c.mem_write(queue, kSlot1, Tracked{type}, 4, DLT_LOC);
    c.mem_write(queue, kSlot1 + 4, Tracked{(u64)body.size() * 4}, 4, DLT_LOC);
    for (size_t i = 0; i < body.size(); i++)
      c.mem_write(queue, kSlot1 + 8 + 4 * i, body[i], 4, DLT_LOC);
    host_seq++;
    c.mem_write(queue, 4, Tracked{host_seq}, 4, DLT_LOC); // host_wptr
    c.write_reg(BELL2, Tracked{1}, DLT_LOC);
    c.wait_irq(0, kIrqBudget, DLT_LOC);
    Tracked rtype = c.mem_read(queue, kSlot2, 4, DLT_LOC);
    if (!c.branch(rtype, Constraint::eq(expect_type), DLT_LOC))
      throw DeviceError("unexpected response type " + hex(rtype.c));
    Tracked word{0};
    if (has_body_word) word = c.mem_read(queue, kSlot2 + 8, 4, DLT_LOC);
    c.write_reg(BELL0, Tracked{0}, DLT_LOC); // ack the doorbell
    return word;
  }

  void command(u32 type, const std::vector<Tracked>& body) {
    Tracked status = exchange(type, body, kAck, true);
    if (!c.branch(status, Constraint::eq(0), DLT_LOC))
      throw DeviceError("command refused, status " + hex(status.c));
  }
};

void quiesce(Context& c) {
  c.write_reg(MBOX_WRITE, Tracked{0}, DLT_LOC);
  Tracked bell = c.read_reg(BELL0, DLT_LOC);
  if (!c.branch(bell, Constraint::eq(0), DLT_LOC))
    throw DeviceError("doorbell stuck after reset");
}

} // namespace

void stream_init(Context& c) { quiesce(c); }

void stream_reset(Context& c) { quiesce(c); }

void stream_capture(Context& c, const CaptureRequest& req) {
  if (!c.branch(req.frames, Constraint::gt(0), DLT_LOC))
    throw InvalidRequest("frame count must be positive");
  if (!c.branch(req.resolution, Constraint::le(2), DLT_LOC))
    throw InvalidRequest("unknown resolution index");

  Port port{c, c.dma_alloc(Tracked{sim::kStreamSlotCount * sim::kStreamSlotSize}, DLT_LOC)};
  c.mem_write(port.queue, 0, Tracked{sim::kStreamSlotCount}, 4, DLT_LOC);
  c.mem_write(port.queue, 4, Tracked{0}, 4, DLT_LOC); // host_wptr
  c.mem_write(port.queue, 8, Tracked{0}, 4, DLT_LOC); // dev_wptr
  c.write_reg(MBOX_WRITE, port.queue.base, DLT_LOC);

  port.command(kOpenPort, {});
  port.command(kConfigure, {req.resolution});
  port.command(kEnable, {});

  Tracked out_off{0};
  for (u64 f = 0; c.branch(req.frames, Constraint::gt(f), DLT_LOC); f++) {
    Tracked img = port.exchange(kFrameReq, {}, kFrameInfo, true);
    Region buf = c.dma_alloc(img, DLT_LOC);
    Tracked confirmed = port.exchange(kFrameRecv, {buf.base, img}, kXferDone, true);
    if (!c.branch(confirmed - img, Constraint::eq(0), DLT_LOC))
      throw SizeMismatch(img.c, confirmed.c);
    c.copy_to_payload(out_off, buf, 0, img, DLT_LOC);
    out_off = out_off + img;
  }
}

} // namespace driverlet::gold
