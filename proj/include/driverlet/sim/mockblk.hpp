#pragma once

#include <array>
#include <memory>
#include <span>

#include "driverlet/sim/device.hpp"

namespace driverlet::sim {

// Register map (all 32-bit).
namespace blkreg {
constexpr u64 SDCMD = 0x00;   // 0x10 rd-PIO, 0x11 wr-PIO, 0x18 rd-DMA, 0x19 wr-DMA, 0x17 set-blkcnt
constexpr u64 SDARG = 0x04;
constexpr u64 SDHCFG = 0x08;
constexpr u64 SDHSTS = 0x0C;  // 0x1 done, 0x2 error; write 0x0 to ack
constexpr u64 SDDATA = 0x10;
constexpr u64 SDEDM = 0x14;   // watermark bits 0..7 (0x80 = ready), config bits 8..31
constexpr u64 SDRST = 0x18;
constexpr u64 DMA_ADDR = 0x20;
constexpr u64 DMA_CS = 0x24;  // bit0 = go
} // namespace blkreg

namespace blkcmd {
constexpr u32 kReadPio = 0x10;
constexpr u32 kWritePio = 0x11;
constexpr u32 kSetBlkcnt = 0x17;
constexpr u32 kReadDma = 0x18;
constexpr u32 kWriteDma = 0x19;
} // namespace blkcmd

constexpr u64 kBlkCapacity = 1ull << 16; // blocks
constexpr u32 kStatusDone = 0x1;
constexpr u32 kStatusError = 0x2;

class MockBlk : public Device {
public:
  MockBlk(u64 seed, FaultPlan plan, u64 alloc_base = 0x40000000);

  enum class Fsm { Idle, CmdIssued, Xfer, Done, Error };
  Fsm fsm() const { return state_; }
  u64 jobs_completed() const { return jobs_completed_; }

  // test access to the medium
  void medium_peek(u64 blk, std::span<u8> out) const;
  void medium_poke(u64 blk, std::span<const u8> in);

  const std::map<u64, std::string>& reg_names() const override;
  std::string id() const override { return "mockblk"; }

protected:
  u32 do_read(u64 offset) override;
  void do_write(u64 offset, u32 value) override;
  void do_step() override;

private:
  void issue(u32 cmd);
  void complete_pio();
  void run_dma();
  void fail_job();
  void read_block(u64 blk, u8* out) const;
  void write_block(u64 blk, const u8* in);

  Fsm state_ = Fsm::Idle;
  u32 sdarg_ = 0, sdhcfg_ = 0, sdhsts_ = 0, dma_addr_ = 0, dma_cs_ = 0;
  u32 pending_cmd_ = 0;
  u64 blkcnt_ = 0, blkid_ = 0;
  u64 latency_remaining_ = 0;
  bool resetting_ = false;
  u64 reset_remaining_ = 0;
  bool job_faulted_ = false;
  u64 job_index_ = 0;
  u64 jobs_completed_ = 0;

  std::vector<u32> fifo_;
  size_t fifo_pos_ = 0;

  std::map<u64, std::array<u8, kBlockSize>> medium_; // sparse, zero default
};

std::unique_ptr<Device> make_device(const std::string& id, u64 seed, FaultPlan plan,
                                    u64 alloc_base = 0x40000000);

// Register-name table for a device id, for serialization without an instance.
const std::map<u64, std::string>& device_reg_names(const std::string& id);

} // namespace driverlet::sim
