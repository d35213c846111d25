#include "driverlet/gold/drivers.hpp"

#include <vector>

#include "driverlet/sim/mockblk.hpp"

namespace driverlet::gold {

using hal::Context;
using hal::Region;
using hal::Tracked;
using tpl::Constraint;
using namespace sim::blkreg;

namespace {

constexpr u64 kPollBudget = 400; // generous; distilled timeouts shrink to observed
constexpr u64 kIrqBudget = 400;
constexpr u32 kHostConfig = 0xE0;

void ack_status(Context& c) { c.write_reg(SDHSTS, Tracked{0}, DLT_LOC); }

void check_done(Context& c) {
  Tracked st = c.read_reg(SDHSTS, DLT_LOC);
  if (!c.branch(st, Constraint::eq(sim::kStatusDone), DLT_LOC))
    throw DeviceError("transfer failed, status " + hex(st.c));
  ack_status(c);
}

void pio_transfer(Context& c, const BlockRequest& req, bool is_read) {
  c.write_reg(SDARG, req.blkid, DLT_LOC);
  c.write_reg(SDCMD, Tracked{is_read ? sim::blkcmd::kReadPio : sim::blkcmd::kWritePio},
              DLT_LOC);
  c.poll(SDEDM, Constraint::mask(0x80, 0x80), kPollBudget, DLT_LOC);
  u64 off = 0;
  for (u64 b = 0; c.branch(req.blkcnt, Constraint::gt(b), DLT_LOC); b++) {
    for (u64 w = 0; w < kBlockSize / 4; w++, off += 4) {
      if (is_read)
        c.store_payload_word(off, c.read_reg(SDDATA, DLT_LOC), DLT_LOC);
      else
        c.write_reg(SDDATA, c.payload_word(off), DLT_LOC);
    }
  }
  check_done(c);
}

void dma_transfer(Context& c, const BlockRequest& req, bool is_read) {
  // DMA engages whole 8-block stripes, so the start id must be stripe-aligned.
  if (!c.branch(req.blkid, Constraint::aligned(8), DLT_LOC))
    throw InvalidRequest("DMA transfers require 8-block alignment");
  Tracked seven{7, hal::cst(7)};
  Tracked blkid = req.blkid & ~seven; // defensive stripe mask

  u64 pages = 0;
  while (c.branch(req.blkcnt, Constraint::gt(8 * pages), DLT_LOC)) pages++;

  // One data page per 8-block stripe, plus a descriptor per page.
  std::vector<Region> data(pages), descs(pages);
  auto len_of = [&](u64 q) -> Tracked {
    if (q + 1 < pages) return Tracked{kPageSize};
    return req.blkcnt * Tracked{kBlockSize} - Tracked{kPageSize * (pages - 1)};
  };
  for (u64 q = 0; q < pages; q++) {
    data[q] = c.dma_alloc(Tracked{kPageSize}, DLT_LOC);
    if (!is_read) c.copy_from_payload(data[q], 0, q * kPageSize, len_of(q), DLT_LOC);
  }
  for (u64 q = 0; q < pages; q++) descs[q] = c.dma_alloc(Tracked{32}, DLT_LOC);

  // Fill tail-first so every chain link points at a fully built descriptor.
  for (u64 q = pages; q-- > 0;) {
    const Region& d = descs[q];
    c.mem_write(d, 0, Tracked{1}, 4, DLT_LOC); // info: valid
    c.mem_write(d, 4, is_read ? Tracked{0} : data[q].base, 4, DLT_LOC);
    c.mem_write(d, 8, is_read ? data[q].base : Tracked{0}, 4, DLT_LOC);
    c.mem_write(d, 12, len_of(q), 4, DLT_LOC);
    c.mem_write(d, 16, Tracked{0}, 4, DLT_LOC); // stride
    c.mem_write(d, 20, q + 1 < pages ? descs[q + 1].base : Tracked{0}, 4, DLT_LOC);
    c.mem_write(d, 24, Tracked{0}, 4, DLT_LOC);
    c.mem_write(d, 28, Tracked{0}, 4, DLT_LOC);
  }

  c.write_reg(DMA_ADDR, descs[0].base, DLT_LOC);
  c.write_reg(SDARG, blkid, DLT_LOC);
  c.write_reg(SDCMD, Tracked{is_read ? sim::blkcmd::kReadDma : sim::blkcmd::kWriteDma},
              DLT_LOC);
  c.write_reg(DMA_CS, Tracked{1}, DLT_LOC);
  c.wait_irq(0, kIrqBudget, DLT_LOC);
  c.poll(DMA_CS, Constraint::mask(0x1, 0x0), kPollBudget, DLT_LOC);
  check_done(c);

  if (is_read)
    for (u64 q = 0; q < pages; q++)
      c.copy_to_payload(Tracked{q * kPageSize}, data[q], 0, len_of(q), DLT_LOC);
}

} // namespace

void blk_init(Context& c) {
  c.write_reg(SDRST, Tracked{1}, DLT_LOC);
  c.poll(SDRST, Constraint::eq(0), kPollBudget, DLT_LOC);
  c.write_reg(SDHCFG, Tracked{kHostConfig}, DLT_LOC);
  c.read_reg(SDEDM, DLT_LOC); // calibration read; any value is acceptable
  ack_status(c);
}

void blk_reset(Context& c) {
  c.write_reg(SDRST, Tracked{1}, DLT_LOC);
  c.poll(SDRST, Constraint::eq(0), kPollBudget, DLT_LOC);
  ack_status(c);
}

void blk_rw(Context& c, const BlockRequest& req) {
  if (!c.branch(req.blkcnt, Constraint::gt(0), DLT_LOC))
    throw InvalidRequest("block count must be positive");
  if (!c.branch(req.blkcnt, Constraint::le(256), DLT_LOC))
    throw InvalidRequest("block count above transfer cap");
  if (!c.branch(req.blkid, Constraint::le(sim::kBlkCapacity - 256), DLT_LOC))
    throw InvalidRequest("block id out of range");
  bool is_read = c.branch(req.rw, Constraint::eq(0), DLT_LOC);

  Tracked cmd = c.read_reg(SDCMD, DLT_LOC);
  if (!c.branch(cmd, Constraint::eq(0), DLT_LOC)) throw DeviceError("controller busy");

  c.write_reg(SDARG, req.blkcnt, DLT_LOC);
  c.write_reg(SDCMD, Tracked{sim::blkcmd::kSetBlkcnt}, DLT_LOC);

  // Short transfers go over the FIFO; anything spanning a full stripe uses DMA.
  if (c.branch(req.blkcnt, Constraint::le(8), DLT_LOC) &&
      c.branch(req.blkcnt, Constraint::lt(8), DLT_LOC))
    pio_transfer(c, req, is_read);
  else
    dma_transfer(c, req, is_read);
}

} // namespace driverlet::gold
