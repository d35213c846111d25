#pragma once

#include "driverlet/hal/context.hpp"

namespace driverlet::gold {

struct DeviceError : std::runtime_error {
  explicit DeviceError(const std::string& w) : std::runtime_error("device error: " + w) {}
};
struct InvalidRequest : std::runtime_error {
  explicit InvalidRequest(const std::string& w) : std::runtime_error("invalid request: " + w) {}
};
struct SizeMismatch : std::runtime_error {
  SizeMismatch(u64 want, u64 got)
      : std::runtime_error("size mismatch: expected " + std::to_string(want) + ", device confirmed " +
                           std::to_string(got)) {}
};

// Block driver (MockBlk). Payload travels in ctx.payload: blkcnt*512 bytes,
// input for writes, output for reads.
struct BlockRequest {
  hal::Tracked rw;     // 0 = read, 1 = write
  hal::Tracked blkid;  // block index
  hal::Tracked blkcnt; // block count
};

void blk_init(hal::Context& ctx);
void blk_reset(hal::Context& ctx);
void blk_rw(hal::Context& ctx, const BlockRequest& req);

// Stream driver (MockStream). Captured frames are appended to ctx.payload.
struct CaptureRequest {
  hal::Tracked resolution; // 0 = 720p, 1 = 1080p, 2 = 1440p
  hal::Tracked frames;
};

void stream_init(hal::Context& ctx);
void stream_reset(hal::Context& ctx);
void stream_capture(hal::Context& ctx, const CaptureRequest& req);

} // namespace driverlet::gold
