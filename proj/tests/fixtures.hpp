#pragma once

#include "driverlet/rec/recorder.hpp"

namespace driverlet::testfix {

inline const tpl::Key& test_key() {
  static tpl::Key key{'u', 'n', 'i', 't', '-', 'k', 'e', 'y', '-', '0', '1'};
  return key;
}

inline std::vector<std::pair<std::string, rec::Args>> block_runs() {
  std::vector<std::pair<std::string, rec::Args>> runs;
  for (u64 rw : {0, 1})
    for (u64 blkcnt : {1, 8, 32, 128, 256})
      runs.push_back({"blk_rw", {{"rw", rw}, {"blkid", 8}, {"blkcnt", blkcnt}}});
  return runs;
}

inline std::vector<std::pair<std::string, rec::Args>> stream_runs() {
  std::vector<std::pair<std::string, rec::Args>> runs;
  for (u64 frames : {1, 10, 100})
    for (u64 res : {0, 1, 2})
      runs.push_back({"stream_capture", {{"resolution", res}, {"frames", frames}}});
  return runs;
}

// Campaigns are expensive; tests share one instance of each.
inline const rec::CampaignResult& block_campaign() {
  static rec::CampaignResult r = rec::campaign(block_runs(), 1234, test_key());
  return r;
}

inline const rec::CampaignResult& stream_campaign() {
  static rec::CampaignResult r = rec::campaign(stream_runs(), 1234, test_key());
  return r;
}

inline const tpl::InteractionTemplate& find_template(const rec::CampaignResult& c,
                                                     const std::string& name) {
  for (const auto& t : c.templates)
    if (t.name == name) return t;
  throw std::runtime_error("no template named " + name);
}

} // namespace driverlet::testfix
