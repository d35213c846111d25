#include "driverlet/sim/mockblk.hpp"

#include <cstring>

#include "driverlet/sim/mockstream.hpp"

namespace driverlet::sim {

using namespace blkreg;

MockBlk::MockBlk(u64 seed, FaultPlan plan, u64 alloc_base)
    : Device(seed, plan, alloc_base) {
  for (u64 off : {SDCMD, SDARG, SDHCFG, SDHSTS, SDDATA, SDEDM, SDRST, DMA_ADDR, DMA_CS})
    declare(off);
}

const std::map<u64, std::string>& MockBlk::reg_names() const {
  static const std::map<u64, std::string> names = {
      {SDCMD, "SDCMD"},   {SDARG, "SDARG"}, {SDHCFG, "SDHCFG"},
      {SDHSTS, "SDHSTS"}, {SDDATA, "SDDATA"}, {SDEDM, "SDEDM"},
      {SDRST, "SDRST"},   {DMA_ADDR, "DMA_ADDR"}, {DMA_CS, "DMA_CS"}};
  return names;
}

void MockBlk::read_block(u64 blk, u8* out) const {
  auto it = medium_.find(blk);
  if (it == medium_.end())
    std::memset(out, 0, kBlockSize);
  else
    std::memcpy(out, it->second.data(), kBlockSize);
}

void MockBlk::write_block(u64 blk, const u8* in) {
  std::memcpy(medium_[blk].data(), in, kBlockSize);
}

void MockBlk::medium_peek(u64 blk, std::span<u8> out) const {
  u8 tmp[kBlockSize];
  for (u64 i = 0; i * kBlockSize < out.size(); i++) {
    read_block(blk + i, tmp);
    u64 n = std::min<u64>(kBlockSize, out.size() - i * kBlockSize);
    std::memcpy(out.data() + i * kBlockSize, tmp, n);
  }
}

void MockBlk::medium_poke(u64 blk, std::span<const u8> in) {
  u8 tmp[kBlockSize];
  for (u64 i = 0; i * kBlockSize < in.size(); i++) {
    read_block(blk + i, tmp);
    u64 n = std::min<u64>(kBlockSize, in.size() - i * kBlockSize);
    std::memcpy(tmp, in.data() + i * kBlockSize, n);
    write_block(blk + i, tmp);
  }
}

u32 MockBlk::do_read(u64 offset) {
  switch (offset) {
  case SDCMD:
    return (state_ == Fsm::CmdIssued || state_ == Fsm::Xfer) ? pending_cmd_ : 0;
  case SDARG: return sdarg_;
  case SDHCFG: return sdhcfg_;
  case SDHSTS: return sdhsts_;
  case SDEDM: {
    u32 ready = state_ == Fsm::Xfer ? 0x80u : 0u;
    return 0x00010000u | ready | (u32)(jitter() & 0x7F);
  }
  case SDRST: return resetting_ ? 1 : 0;
  case DMA_ADDR: return dma_addr_;
  case DMA_CS: return dma_cs_;
  case SDDATA: {
    if (state_ == Fsm::Xfer && pending_cmd_ == blkcmd::kReadPio && fifo_pos_ < fifo_.size()) {
      u32 w = fifo_[fifo_pos_++];
      if (fifo_pos_ == fifo_.size()) complete_pio();
      return w;
    }
    return 0;
  }
  }
  return 0;
}

void MockBlk::fail_job() {
  state_ = Fsm::Error;
  sdhsts_ = kStatusError;
}

void MockBlk::issue(u32 cmd) {
  if (resetting_) {
    fail_job();
    return;
  }
  if (cmd == blkcmd::kSetBlkcnt) {
    if (state_ != Fsm::Idle) {
      fail_job();
      return;
    }
    blkcnt_ = sdarg_;
    return;
  }
  if (cmd != blkcmd::kReadPio && cmd != blkcmd::kWritePio && cmd != blkcmd::kReadDma &&
      cmd != blkcmd::kWriteDma) {
    fail_job();
    return;
  }
  if (state_ != Fsm::Idle) {
    // protocol violation: a command while a job is in flight
    fail_job();
    return;
  }
  blkid_ = sdarg_;
  if (blkcnt_ == 0 || blkid_ + blkcnt_ > kBlkCapacity) {
    fail_job();
    return;
  }
  pending_cmd_ = cmd;
  job_index_ = jobs_completed_;
  job_faulted_ = fault_fires_for_job(job_index_);
  state_ = Fsm::CmdIssued;
  latency_remaining_ = draw_latency();
  if (job_faulted_ && fault_.kind == FaultKind::TransientDelay) latency_remaining_ += 100000;
  // DMA commands arm on DMA_CS; the countdown still starts now so a template
  // that kicks promptly sees the same latency window.
}

void MockBlk::complete_pio() {
  bool bad = job_faulted_ && fault_.kind != FaultKind::TransientDelay;
  if (pending_cmd_ == blkcmd::kWritePio && !bad) {
    std::vector<u8> bytes(fifo_.size() * 4);
    std::memcpy(bytes.data(), fifo_.data(), bytes.size());
    for (u64 b = 0; b < blkcnt_; b++) write_block(blkid_ + b, bytes.data() + b * kBlockSize);
  }
  sdhsts_ = bad ? kStatusError : kStatusDone;
  state_ = Fsm::Done;
  jobs_completed_++;
  fifo_.clear();
  fifo_pos_ = 0;
}

void MockBlk::run_dma() {
  bool bad = job_faulted_ && fault_.kind != FaultKind::TransientDelay;
  std::vector<DmaXfer> chain;
  u64 addr = dma_addr_;
  u64 total = 0;
  bool ok = true;
  bool read_job = pending_cmd_ == blkcmd::kReadDma;
  std::vector<std::vector<u8>> staged; // write-job pages staged before commit
  std::vector<u64> staged_blk;
  for (int hop = 0; hop < 64 && addr != 0; hop++) {
    u32 words[8];
    if (!mem().phys_read(addr, words, sizeof(words))) {
      ok = false;
      break;
    }
    u64 src = words[1], dst = words[2], len = words[3], next = words[5];
    if (len == 0 || len % kBlockSize != 0 || total + len > blkcnt_ * kBlockSize) {
      ok = false;
      break;
    }
    u64 blk = blkid_ + total / kBlockSize;
    if (read_job) {
      std::vector<u8> buf(len);
      for (u64 b = 0; b * kBlockSize < len; b++) read_block(blk + b, buf.data() + b * kBlockSize);
      if (!mem().phys_write(dst, buf.data(), len)) {
        ok = false;
        break;
      }
      chain.push_back({0, dst, len});
    } else {
      std::vector<u8> buf(len);
      if (!mem().phys_read(src, buf.data(), len)) {
        ok = false;
        break;
      }
      staged.push_back(std::move(buf));
      staged_blk.push_back(blk);
      chain.push_back({src, 0, len});
    }
    total += len;
    addr = next;
  }
  if (addr != 0 || total != blkcnt_ * kBlockSize) ok = false;
  if (ok && !bad && !read_job)
    for (size_t i = 0; i < staged.size(); i++)
      for (u64 b = 0; b * kBlockSize < staged[i].size(); b++)
        write_block(staged_blk[i] + b, staged[i].data() + b * kBlockSize);
  log_.dma_chains.push_back(chain);
  sdhsts_ = (ok && !bad) ? kStatusDone : kStatusError;
  dma_cs_ = 0;
  state_ = Fsm::Done;
  jobs_completed_++;
  raise_irq(0);
}

void MockBlk::do_write(u64 offset, u32 value) {
  switch (offset) {
  case SDRST:
    if (value & 1) {
      resetting_ = true;
      reset_remaining_ = draw_latency();
      // a removed medium never comes back; the reset poll times out
      if (fault_.kind == FaultKind::PersistentMediumRemoved &&
          jobs_completed_ >= fault_.trigger_job_index)
        reset_remaining_ = ~0ull;
      state_ = Fsm::Idle;
      sdhsts_ = 0;
      fifo_.clear();
      fifo_pos_ = 0;
      dma_cs_ = 0;
      blkcnt_ = 0;
    }
    break;
  case SDHCFG: sdhcfg_ = value; break;
  case SDARG: sdarg_ = value; break;
  case SDHSTS:
    sdhsts_ = value;
    if (value == 0 && (state_ == Fsm::Done || state_ == Fsm::Error)) state_ = Fsm::Idle;
    break;
  case SDCMD: issue(value); break;
  case SDDATA:
    if (state_ == Fsm::Xfer && pending_cmd_ == blkcmd::kWritePio) {
      fifo_.push_back(value);
      if (fifo_.size() == blkcnt_ * (kBlockSize / 4)) complete_pio();
    }
    break;
  case DMA_ADDR: dma_addr_ = value; break;
  case DMA_CS:
    if ((value & 1) && state_ == Fsm::CmdIssued &&
        (pending_cmd_ == blkcmd::kReadDma || pending_cmd_ == blkcmd::kWriteDma)) {
      dma_cs_ = 1;
      state_ = Fsm::Xfer;
    } else if (value & 1) {
      fail_job();
    }
    break;
  }
}

void MockBlk::do_step() {
  if (resetting_) {
    if (reset_remaining_ != ~0ull && --reset_remaining_ == 0) resetting_ = false;
    return;
  }
  if (state_ == Fsm::CmdIssued &&
      (pending_cmd_ == blkcmd::kReadPio || pending_cmd_ == blkcmd::kWritePio)) {
    if (--latency_remaining_ == 0) {
      state_ = Fsm::Xfer;
      if (pending_cmd_ == blkcmd::kReadPio) {
        fifo_.assign(blkcnt_ * (kBlockSize / 4), 0);
        std::vector<u8> buf(blkcnt_ * kBlockSize);
        for (u64 b = 0; b < blkcnt_; b++) read_block(blkid_ + b, buf.data() + b * kBlockSize);
        std::memcpy(fifo_.data(), buf.data(), buf.size());
        fifo_pos_ = 0;
      }
    }
  } else if (state_ == Fsm::Xfer && dma_cs_ == 1) {
    if (--latency_remaining_ == 0) run_dma();
  }
}

std::unique_ptr<Device> make_device(const std::string& id, u64 seed, FaultPlan plan,
                                    u64 alloc_base) {
  if (id == "mockblk") return std::make_unique<MockBlk>(seed, plan, alloc_base);
  if (id == "mockstream") return std::make_unique<MockStream>(seed, plan, alloc_base);
  throw std::runtime_error("unknown device id: " + id);
}

const std::map<u64, std::string>& device_reg_names(const std::string& id) {
  static const auto* all = [] {
    auto* m = new std::map<std::string, std::map<u64, std::string>>;
    for (const char* d : {"mockblk", "mockstream"})
      (*m)[d] = make_device(d, 0, FaultPlan::none())->reg_names();
    return m;
  }();
  auto it = all->find(id);
  if (it == all->end()) throw std::runtime_error("unknown device id: " + id);
  return it->second;
}

} // namespace driverlet::sim
