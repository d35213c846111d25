#include <algorithm>
#include <map>
#include <sstream>

#include "driverlet/tpl/template.hpp"

namespace driverlet::tpl {

std::string coverage_report(const std::vector<InteractionTemplate>& ts) {
  if (ts.empty()) return "no coverage\n";

  // Group by entry, preserving first-appearance order.
  std::vector<std::string> entries;
  std::map<std::string, std::vector<const InteractionTemplate*>> by_entry;
  for (const auto& t : ts) {
    if (!by_entry.count(t.entry)) entries.push_back(t.entry);
    by_entry[t.entry].push_back(&t);
  }

  std::ostringstream os;
  for (const auto& entry : entries) {
    const auto& group = by_entry[entry];
    os << "entry " << entry << " (" << group.size() << " template"
       << (group.size() == 1 ? "" : "s") << ")\n";
    for (const auto* t : group) {
      os << "  " << t->name << ":";
      for (const auto& p : t->params) os << " " << p.name << " \"" << to_string(p.cons) << "\"";
      os << "\n";
    }
    // Per-parameter union of accepted regions across the group.
    std::vector<std::string> pnames;
    std::map<std::string, std::vector<Constraint>> accepted;
    for (const auto* t : group)
      for (const auto& p : t->params) {
        if (!accepted.count(p.name)) pnames.push_back(p.name);
        auto& v = accepted[p.name];
        if (std::find(v.begin(), v.end(), p.cons) == v.end()) v.push_back(p.cons);
      }
    for (const auto& n : pnames) {
      auto& v = accepted[n];
      os << "  union " << n << ": "
         << to_string(v.size() == 1 ? v[0] : Constraint::any_of(v)) << "\n";
    }
  }
  return os.str();
}

} // namespace driverlet::tpl
