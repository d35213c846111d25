#include "driverlet/tpl/template.hpp"

namespace driverlet::tpl {

const char* event_kind_name(Event::Kind k) {
  switch (k) {
  case Event::kRead: return "read";
  case Event::kWrite: return "write";
  case Event::kMemRead: return "mem_read";
  case Event::kMemWrite: return "mem_write";
  case Event::kPoll: return "poll";
  case Event::kDelay: return "delay";
  case Event::kDmaAlloc: return "dma_alloc";
  case Event::kWaitIrq: return "wait_irq";
  case Event::kLoadMem: return "load_mem";
  }
  return "?";
}

const TemplateParam* InteractionTemplate::param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

} // namespace driverlet::tpl
