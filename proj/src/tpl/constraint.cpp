#include "driverlet/tpl/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <set>

namespace driverlet::tpl {

Constraint Constraint::aligned(u64 k) {
  if (k == 0 || (k & (k - 1)) != 0)
    throw std::runtime_error("alignment must be a power of two");
  return {kAligned, k, 0, {}};
}

bool Constraint::operator==(const Constraint& o) const {
  return kind == o.kind && a == o.a && b == o.b && kids == o.kids;
}

bool satisfies(const Constraint& c, u64 x) {
  switch (c.kind) {
  case Constraint::kEq: return x == c.a;
  case Constraint::kNe: return x != c.a;
  case Constraint::kLe: return x <= c.a;
  case Constraint::kLt: return x < c.a;
  case Constraint::kGe: return x >= c.a;
  case Constraint::kGt: return x > c.a;
  case Constraint::kMask: return (x & c.a) == c.b;
  case Constraint::kRange: return x >= c.a && x <= c.b;
  case Constraint::kAligned: return (x & (c.a - 1)) == 0;
  case Constraint::kAll:
    return std::all_of(c.kids.begin(), c.kids.end(),
                       [&](const Constraint& k) { return satisfies(k, x); });
  case Constraint::kAnyOf:
    return std::any_of(c.kids.begin(), c.kids.end(),
                       [&](const Constraint& k) { return satisfies(k, x); });
  }
  return false;
}

std::optional<Constraint> negate(const Constraint& c) {
  switch (c.kind) {
  case Constraint::kEq: return Constraint::ne(c.a);
  case Constraint::kNe: return Constraint::eq(c.a);
  case Constraint::kLe: return Constraint::gt(c.a);
  case Constraint::kLt: return Constraint::ge(c.a);
  case Constraint::kGe: return Constraint::lt(c.a);
  case Constraint::kGt: return Constraint::le(c.a);
  default: return std::nullopt;
  }
}

std::string to_string(const Constraint& c) {
  switch (c.kind) {
  case Constraint::kEq: return "=" + hex(c.a);
  case Constraint::kNe: return "!=" + hex(c.a);
  case Constraint::kLe: return "<=" + std::to_string(c.a);
  case Constraint::kLt: return "<" + std::to_string(c.a);
  case Constraint::kGe: return ">=" + std::to_string(c.a);
  case Constraint::kGt: return ">" + std::to_string(c.a);
  case Constraint::kMask: return "&" + hex(c.a) + "=" + hex(c.b);
  case Constraint::kRange:
    return "in[" + std::to_string(c.a) + "," + std::to_string(c.b) + "]";
  case Constraint::kAligned: return "align" + std::to_string(c.a);
  case Constraint::kAll: {
    if (c.kids.empty()) return "true";
    std::string s = "all(";
    for (size_t i = 0; i < c.kids.size(); i++)
      s += (i ? ";" : "") + to_string(c.kids[i]);
    return s + ")";
  }
  case Constraint::kAnyOf: {
    if (c.kids.empty()) return "false";
    std::string s = "any(";
    for (size_t i = 0; i < c.kids.size(); i++)
      s += (i ? ";" : "") + to_string(c.kids[i]);
    return s + ")";
  }
  }
  return "?";
}

namespace {

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("constraint parse error at " + std::to_string(pos) +
                             " in '" + s + "': " + why);
  }
  bool eat(const char* lit) {
    size_t n = strlen(lit);
    if (s.compare(pos, n, lit) == 0) {
      pos += n;
      return true;
    }
    return false;
  }
  u64 number() {
    size_t start = pos;
    u64 v = 0;
    if (eat("0x") || eat("0X")) {
      size_t digits = 0;
      while (pos < s.size() && isxdigit((unsigned char)s[pos])) {
        v = v * 16 + (u64)std::stoul(std::string(1, s[pos]), nullptr, 16);
        pos++;
        digits++;
      }
      if (!digits) fail("hex digits expected");
    } else {
      while (pos < s.size() && isdigit((unsigned char)s[pos])) {
        v = v * 10 + (u64)(s[pos] - '0');
        pos++;
      }
      if (pos == start) fail("number expected");
    }
    return v;
  }
  Constraint constraint(); // recursive
  std::vector<Constraint> list(char close) {
    std::vector<Constraint> out;
    if (pos < s.size() && s[pos] == close) {
      pos++;
      return out;
    }
    while (true) {
      out.push_back(constraint());
      if (pos >= s.size()) fail("unterminated list");
      if (s[pos] == ';') {
        pos++;
        continue;
      }
      if (s[pos] == close) {
        pos++;
        return out;
      }
      fail("';' or close expected");
    }
  }
};

Constraint Cursor::constraint() {
  if (eat("true")) return Constraint::always();
  if (eat("false")) return Constraint::never();
  if (eat("all(")) return Constraint::all(list(')'));
  if (eat("any(")) return Constraint::any_of(list(')'));
  if (eat("align")) return Constraint::aligned(number());
  if (eat("in[")) {
    u64 lo = number();
    if (!eat(",")) fail("',' expected");
    u64 hi = number();
    if (!eat("]")) fail("']' expected");
    return Constraint::range(lo, hi);
  }
  if (eat("!=")) return Constraint::ne(number());
  if (eat("=")) return Constraint::eq(number());
  if (eat("<=")) return Constraint::le(number());
  if (eat("<")) return Constraint::lt(number());
  if (eat(">=")) return Constraint::ge(number());
  if (eat(">")) return Constraint::gt(number());
  if (eat("&")) {
    u64 m = number();
    if (!eat("=")) fail("'=' expected after mask");
    return Constraint::mask(m, number());
  }
  fail("unknown constraint form");
}

void boundary_candidates(const Constraint& c, std::set<u64>& out) {
  auto add = [&](u64 v) { out.insert(v); };
  switch (c.kind) {
  case Constraint::kEq:
  case Constraint::kNe:
  case Constraint::kLe:
  case Constraint::kLt:
  case Constraint::kGe:
  case Constraint::kGt:
    add(c.a);
    if (c.a > 0) add(c.a - 1);
    add(c.a + 1);
    break;
  case Constraint::kMask:
    add(c.b);
    add(c.b | ~c.a);
    break;
  case Constraint::kRange:
    add(c.a);
    add(c.b);
    if (c.a > 0) add(c.a - 1);
    add(c.b + 1);
    break;
  case Constraint::kAligned:
    add(0);
    add(c.a);
    add(c.a * 2);
    break;
  case Constraint::kAll:
  case Constraint::kAnyOf:
    for (auto& k : c.kids) boundary_candidates(k, out);
    break;
  }
}

u64 splitmix64(u64& st) {
  st += 0x9e3779b97f4a7c15ULL;
  u64 z = st;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

Constraint parse_constraint(const std::string& text) {
  Cursor cur{text};
  Constraint c = cur.constraint();
  if (cur.pos != text.size()) cur.fail("trailing input");
  return c;
}

std::optional<u64> smallest_satisfying(const Constraint& c, u64 lo, u64 hi) {
  std::set<u64> cand;
  cand.insert(lo);
  cand.insert(hi);
  boundary_candidates(c, cand);
  // nudge candidates to the next aligned/satisfying neighborhood
  std::set<u64> extra;
  for (u64 v : cand)
    for (u64 d = 1; d <= 8; d++) {
      extra.insert(v + d);
      if (v >= d) extra.insert(v - d);
    }
  cand.insert(extra.begin(), extra.end());
  std::optional<u64> best;
  for (u64 v : cand)
    if (v >= lo && v <= hi && satisfies(c, v) && (!best || v < *best)) best = v;
  if (best) return best;
  // bounded scan as a fallback
  for (u64 v = lo; v <= hi && v < lo + 65536; v++)
    if (satisfies(c, v)) return v;
  return std::nullopt;
}

std::optional<u64> sample_satisfying(const Constraint& c, u64 lo, u64 hi, u64& rng_state) {
  if (hi < lo) return std::nullopt;
  u64 span = hi - lo + 1;
  for (int tries = 0; tries < 20000; tries++) {
    u64 v = lo + (span ? splitmix64(rng_state) % span : 0);
    // bias toward alignment boundaries so aligned constraints sample well
    if (tries % 2 == 1) v &= ~(u64)7;
    if (v >= lo && v <= hi && satisfies(c, v)) return v;
  }
  return smallest_satisfying(c, lo, hi);
}

bool probably_intersects(const Constraint& a, const Constraint& b, u64 lo, u64 hi) {
  std::set<u64> cand;
  boundary_candidates(a, cand);
  boundary_candidates(b, cand);
  cand.insert(lo);
  cand.insert(hi);
  std::set<u64> extra;
  for (u64 v : cand)
    for (u64 d = 1; d <= 8; d++) {
      extra.insert(v + d);
      if (v >= d) extra.insert(v - d);
    }
  cand.insert(extra.begin(), extra.end());
  for (u64 v : cand)
    if (v >= lo && v <= hi && satisfies(a, v) && satisfies(b, v)) return true;
  u64 st = 0x5eedULL;
  for (int i = 0; i < 8192; i++) {
    u64 v = lo + (hi > lo ? splitmix64(st) % (hi - lo + 1) : 0);
    if (i % 2) v &= ~(u64)7;
    if (v >= lo && v <= hi && satisfies(a, v) && satisfies(b, v)) return true;
  }
  return false;
}

} // namespace driverlet::tpl
