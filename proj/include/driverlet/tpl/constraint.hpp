#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driverlet/common.hpp"

namespace driverlet::tpl {

// Finite predicate language over 64-bit values. Path conditions that do not
// fit these forms are narrowed to Eq(concrete) by the recorder.
struct Constraint {
  enum Kind { kEq, kNe, kLe, kLt, kGe, kGt, kMask, kRange, kAligned, kAll, kAnyOf };

  Kind kind = kAll;
  u64 a = 0; // value / mask / range lo / alignment
  u64 b = 0; // mask expected value / range hi
  std::vector<Constraint> kids;

  static Constraint eq(u64 v) { return {kEq, v, 0, {}}; }
  static Constraint ne(u64 v) { return {kNe, v, 0, {}}; }
  static Constraint le(u64 v) { return {kLe, v, 0, {}}; }
  static Constraint lt(u64 v) { return {kLt, v, 0, {}}; }
  static Constraint ge(u64 v) { return {kGe, v, 0, {}}; }
  static Constraint gt(u64 v) { return {kGt, v, 0, {}}; }
  static Constraint mask(u64 m, u64 v) { return {kMask, m, v, {}}; }
  static Constraint range(u64 lo, u64 hi) { return {kRange, lo, hi, {}}; }
  static Constraint aligned(u64 k); // k must be a power of two
  static Constraint all(std::vector<Constraint> cs) { return {kAll, 0, 0, std::move(cs)}; }
  static Constraint any_of(std::vector<Constraint> cs) { return {kAnyOf, 0, 0, std::move(cs)}; }
  static Constraint always() { return all({}); }
  static Constraint never() { return any_of({}); }

  bool operator==(const Constraint& o) const;
};

bool satisfies(const Constraint& c, u64 x);

// Negation within the same language where possible; falls back to nullopt
// for forms whose complement is not expressible (Mask, Aligned, composites).
std::optional<Constraint> negate(const Constraint& c);

// Surface syntax: "=0x1", "!=0x2", "<=8", "<8", ">=8", ">8", "&0x1=0x1",
// "align8", "in[0,65535]", "all(...;...)", "any(...;...)", "true", "false".
std::string to_string(const Constraint& c);
Constraint parse_constraint(const std::string& text); // throws std::runtime_error

// Smallest x in [lo, hi] with satisfies(c, x), or nullopt. Used for witness
// selection during exploration; exact for single forms, candidate-based for
// composites.
std::optional<u64> smallest_satisfying(const Constraint& c, u64 lo, u64 hi);

// Uniform-ish sample from { x in [lo, hi] : satisfies(c, x) }. rng_state is
// advanced (splitmix64). Returns nullopt if no satisfying value was found.
std::optional<u64> sample_satisfying(const Constraint& c, u64 lo, u64 hi, u64& rng_state);

// Best-effort overlap check between two constraints over the same domain.
// No false negatives are required by callers beyond the candidate set probed.
bool probably_intersects(const Constraint& a, const Constraint& b, u64 lo, u64 hi);

} // namespace driverlet::tpl
