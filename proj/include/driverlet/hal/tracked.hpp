#pragma once

#include "driverlet/hal/symexpr.hpp"

namespace driverlet::hal {

// A concrete 64-bit value with an optional provenance expression. Arithmetic
// on tracked values keeps the concrete result and composes expressions, so
// taints survive every transformation the driver applies.
struct Tracked {
  u64 c = 0;
  ExprPtr e; // null => pure constant

  Tracked() = default;
  Tracked(u64 v) : c(v) {} // NOLINT: implicit by design for driver code
  Tracked(u64 v, ExprPtr ex) : c(v), e(std::move(ex)) {}

  bool tainted() const { return e != nullptr; }
  // expression for composition: materializes a constant node when untainted
  ExprPtr expr() const { return e ? e : cst(c); }
};

inline Tracked make_sym(u64 v, std::string name) { return {v, sym(std::move(name))}; }

namespace detail {
inline Tracked combine(BinOp op, const Tracked& l, const Tracked& r, u64 cv) {
  if (!l.tainted() && !r.tainted()) return {cv};
  return {cv, bin(op, l.expr(), r.expr())};
}
} // namespace detail

inline Tracked operator+(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Add, l, r, l.c + r.c);
}
inline Tracked operator-(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Sub, l, r, l.c - r.c);
}
inline Tracked operator*(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Mul, l, r, l.c * r.c);
}
inline Tracked operator/(const Tracked& l, const Tracked& r) {
  if (r.c == 0) throw DivideByZero();
  return detail::combine(BinOp::Div, l, r, l.c / r.c);
}
inline Tracked operator%(const Tracked& l, const Tracked& r) {
  if (r.c == 0) throw DivideByZero();
  return detail::combine(BinOp::Mod, l, r, l.c % r.c);
}
inline Tracked operator<<(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Shl, l, r, r.c >= 64 ? 0 : l.c << r.c);
}
inline Tracked operator>>(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Shr, l, r, r.c >= 64 ? 0 : l.c >> r.c);
}
inline Tracked operator&(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::And, l, r, l.c & r.c);
}
inline Tracked operator|(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Or, l, r, l.c | r.c);
}
inline Tracked operator^(const Tracked& l, const Tracked& r) {
  return detail::combine(BinOp::Xor, l, r, l.c ^ r.c);
}
inline Tracked operator~(const Tracked& v) {
  if (!v.tainted()) return {~v.c};
  return {~v.c, un(UnOp::Not, v.e)};
}

} // namespace driverlet::hal
