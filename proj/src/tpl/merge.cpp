#include <algorithm>

#include "driverlet/tpl/template.hpp"

namespace driverlet::tpl {

namespace {

bool slice_equal(const std::optional<SliceRef>& a, const std::optional<SliceRef>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->src == b->src && hal::expr_equal(a->off, b->off) && hal::expr_equal(a->len, b->len);
}

bool fixups_equal(const std::vector<Fixup>& a, const std::vector<Fixup>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (a[i].offset != b[i].offset || !hal::expr_equal(a[i].expr, b[i].expr)) return false;
  return true;
}

// Structural event identity: everything except expectations (constraints) and
// step budgets, which merging is allowed to widen.
bool event_skeleton_equal(const Event& a, const Event& b) {
  if (a.kind != b.kind || a.reg != b.reg || a.binds != b.binds || a.region != b.region ||
      a.offset != b.offset || a.steps != b.steps || a.line != b.line ||
      a.snapshot_id != b.snapshot_id)
    return false;
  if (a.slice.has_value() != b.slice.has_value()) return false;
  if (!a.slice && a.width != b.width) return false;
  if (!hal::expr_equal(a.value, b.value) || !hal::expr_equal(a.offset_expr, b.offset_expr))
    return false;
  if (!slice_equal(a.slice, b.slice)) return false;
  if (!fixups_equal(a.fixups, b.fixups)) return false;
  // Poll conditions describe the wait site itself, not a learned expectation.
  if (a.kind == Event::kPoll && !(a.cons == b.cons)) return false;
  return true;
}

Constraint widen(const Constraint& a, const Constraint& b) {
  if (a == b) return a;
  std::vector<Constraint> arms;
  auto push = [&](const Constraint& c) {
    if (c.kind == Constraint::kAnyOf) {
      for (const auto& k : c.kids)
        if (std::find(arms.begin(), arms.end(), k) == arms.end()) arms.push_back(k);
    } else if (std::find(arms.begin(), arms.end(), c) == arms.end()) {
      arms.push_back(c);
    }
  };
  push(a);
  push(b);
  return Constraint::any_of(std::move(arms));
}

} // namespace

bool structurally_equal(const InteractionTemplate& a, const InteractionTemplate& b) {
  if (a.entry != b.entry || a.device_id != b.device_id || a.reset_name != b.reset_name)
    return false;
  if (a.params.size() != b.params.size() || a.events.size() != b.events.size()) return false;
  for (size_t i = 0; i < a.params.size(); i++)
    if (a.params[i].name != b.params[i].name || a.params[i].role != b.params[i].role)
      return false;
  for (size_t i = 0; i < a.events.size(); i++)
    if (!event_skeleton_equal(a.events[i], b.events[i])) return false;
  return a.snapshots == b.snapshots;
}

std::optional<InteractionTemplate> merge(const InteractionTemplate& a,
                                         const InteractionTemplate& b) {
  if (!structurally_equal(a, b)) return std::nullopt;
  InteractionTemplate out = a;
  for (size_t i = 0; i < out.params.size(); i++)
    out.params[i].cons = widen(a.params[i].cons, b.params[i].cons);
  for (size_t i = 0; i < out.events.size(); i++) {
    Event& e = out.events[i];
    if (e.kind == Event::kRead || e.kind == Event::kMemRead)
      e.cons = widen(a.events[i].cons, b.events[i].cons);
    e.timeout = std::max(a.events[i].timeout, b.events[i].timeout);
  }
  out.has_mac = false; // widening invalidates any existing signature
  return out;
}

std::vector<InteractionTemplate> merge_all(std::vector<InteractionTemplate> ts) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < ts.size() && !changed; i++) {
      for (size_t j = i + 1; j < ts.size(); j++) {
        auto m = merge(ts[i], ts[j]);
        if (m) {
          ts[i] = std::move(*m);
          ts.erase(ts.begin() + (long)j);
          changed = true;
          break;
        }
      }
    }
  }
  return ts;
}

} // namespace driverlet::tpl
