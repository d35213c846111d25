#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include "driverlet/common.hpp"

namespace driverlet::hal {

struct SymExpr;
using ExprPtr = std::shared_ptr<const SymExpr>;

enum class UnOp { Not, Neg };
enum class BinOp { Add, Sub, Mul, Div, Mod, Shl, Shr, And, Or, Xor };

// Expression tree linking an output value back to input symbols. Shared,
// immutable nodes; evaluation is full 64-bit wrap-around arithmetic.
struct SymExpr {
  enum Kind { kSym, kConst, kUnary, kBinary };
  Kind kind;
  std::string name; // kSym
  u64 value = 0;    // kConst
  UnOp uop{};
  BinOp bop{};
  ExprPtr a, b;
};

ExprPtr sym(std::string name);
ExprPtr cst(u64 v);
ExprPtr un(UnOp op, ExprPtr a);
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b);

using Bindings = std::map<std::string, u64>;

struct UnboundSymbol : std::runtime_error {
  explicit UnboundSymbol(const std::string& n)
      : std::runtime_error("unbound symbol " + n) {}
};
struct DivideByZero : std::runtime_error {
  DivideByZero() : std::runtime_error("division by zero in expression") {}
};

u64 eval(const ExprPtr& e, const Bindings& b);
void collect_syms(const ExprPtr& e, std::set<std::string>& out);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Prefix notation, e.g. "(AND blkid (NOT 7))"; constants in decimal.
std::string to_prefix(const ExprPtr& e);
ExprPtr parse_prefix(const std::string& text); // throws std::runtime_error

} // namespace driverlet::hal
