#pragma once

#include <deque>

#include "driverlet/sim/device.hpp"
#include "driverlet/tpl/template.hpp"

namespace driverlet::rep {

struct Invocation {
  std::string entry;
  std::map<std::string, u64> args;
  std::vector<u8> data; // supplied payload (writes); replaced by output (reads)
  u64 max_attempts = 3;
};

struct Divergence {
  u64 event_index = 0;
  tpl::Constraint expected = tpl::Constraint::always();
  u64 observed = 0;
  std::string src_loc;
};

struct ReplayOutcome {
  enum Status { OK, NO_TEMPLATE, AMBIGUOUS, DIVERGED, VERIFY_FAILED };
  Status status = OK;
  u64 attempts = 0;
  std::optional<Divergence> divergence;
  std::string message;
};

const char* status_name(ReplayOutcome::Status s);
std::string to_string(const ReplayOutcome& o);

// A template that cannot be executed safely: bad references, unbound symbols,
// or an address/size that would leave its declared region. Raised before the
// offending device access.
struct MalformedTemplate : std::runtime_error {
  explicit MalformedTemplate(const std::string& w) : std::runtime_error("template: " + w) {}
};
struct BoundsViolation : MalformedTemplate {
  explicit BoundsViolation(const std::string& w) : MalformedTemplate("bounds violation: " + w) {}
};

// Authentication failure for a template package; raised before any device or
// template-content use.
struct PackageVerifyError : std::runtime_error {
  explicit PackageVerifyError(const std::string& w)
      : std::runtime_error("package verification failed: " + w) {}
};

// Checks the MAC over every file's raw bytes, then parses. Throws
// PackageVerifyError on any authentication failure.
std::vector<tpl::InteractionTemplate> verify_package(const std::vector<std::string>& files,
                                                     const tpl::Key& key);

class Replayer {
public:
  Replayer(std::vector<tpl::InteractionTemplate> templates, sim::Device& dev);

  ReplayOutcome run(Invocation& inv);

private:
  const tpl::InteractionTemplate* by_name(const std::string& name) const;
  bool exec_template(const tpl::InteractionTemplate& t, const std::map<std::string, u64>& args,
                     const std::vector<u8>& data_in, std::vector<u8>& data_out,
                     std::optional<Divergence>& div);

  std::vector<tpl::InteractionTemplate> templates_;
  sim::Device& dev_;
  bool init_done_ = false;
};

} // namespace driverlet::rep
