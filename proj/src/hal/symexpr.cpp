#include "driverlet/hal/symexpr.hpp"

#include <cctype>
#include <vector>

namespace driverlet::hal {

ExprPtr sym(std::string name) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::kSym;
  e->name = std::move(name);
  return e;
}

ExprPtr cst(u64 v) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::kConst;
  e->value = v;
  return e;
}

ExprPtr un(UnOp op, ExprPtr a) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::kUnary;
  e->uop = op;
  e->a = std::move(a);
  return e;
}

ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::kBinary;
  e->bop = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

u64 eval(const ExprPtr& e, const Bindings& bind) {
  switch (e->kind) {
  case SymExpr::kSym: {
    auto it = bind.find(e->name);
    if (it == bind.end()) throw UnboundSymbol(e->name);
    return it->second;
  }
  case SymExpr::kConst:
    return e->value;
  case SymExpr::kUnary: {
    u64 v = eval(e->a, bind);
    return e->uop == UnOp::Not ? ~v : (u64)(0 - v);
  }
  case SymExpr::kBinary: {
    u64 l = eval(e->a, bind), r = eval(e->b, bind);
    switch (e->bop) {
    case BinOp::Add: return l + r;
    case BinOp::Sub: return l - r;
    case BinOp::Mul: return l * r;
    case BinOp::Div:
      if (r == 0) throw DivideByZero();
      return l / r;
    case BinOp::Mod:
      if (r == 0) throw DivideByZero();
      return l % r;
    case BinOp::Shl: return r >= 64 ? 0 : l << r;
    case BinOp::Shr: return r >= 64 ? 0 : l >> r;
    case BinOp::And: return l & r;
    case BinOp::Or: return l | r;
    case BinOp::Xor: return l ^ r;
    }
  }
  }
  return 0;
}

void collect_syms(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == SymExpr::kSym) out.insert(e->name);
  if (e->a) collect_syms(e->a, out);
  if (e->b) collect_syms(e->b, out);
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case SymExpr::kSym: return a->name == b->name;
  case SymExpr::kConst: return a->value == b->value;
  case SymExpr::kUnary: return a->uop == b->uop && expr_equal(a->a, b->a);
  case SymExpr::kBinary:
    return a->bop == b->bop && expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
  return false;
}

namespace {

const char* un_name(UnOp op) { return op == UnOp::Not ? "NOT" : "NEG"; }

const char* bin_name(BinOp op) {
  switch (op) {
  case BinOp::Add: return "ADD";
  case BinOp::Sub: return "SUB";
  case BinOp::Mul: return "MUL";
  case BinOp::Div: return "DIV";
  case BinOp::Mod: return "MOD";
  case BinOp::Shl: return "SHL";
  case BinOp::Shr: return "SHR";
  case BinOp::And: return "AND";
  case BinOp::Or: return "OR";
  case BinOp::Xor: return "XOR";
  }
  return "?";
}

struct Cursor {
  const std::string& s;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("expr parse error at " + std::to_string(pos) +
                             " in '" + s + "': " + why);
  }
  void skip_ws() {
    while (pos < s.size() && s[pos] == ' ') pos++;
  }
  std::string token() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '(' && s[pos] != ')') pos++;
    if (pos == start) fail("token expected");
    return s.substr(start, pos - start);
  }
  ExprPtr expr();
};

ExprPtr Cursor::expr() {
  skip_ws();
  if (pos >= s.size()) fail("expression expected");
  if (s[pos] == '(') {
    pos++;
    std::string op = token();
    ExprPtr out;
    if (op == "NOT" || op == "NEG") {
      out = un(op == "NOT" ? UnOp::Not : UnOp::Neg, expr());
    } else {
      static const std::map<std::string, BinOp> ops = {
          {"ADD", BinOp::Add}, {"SUB", BinOp::Sub}, {"MUL", BinOp::Mul},
          {"DIV", BinOp::Div}, {"MOD", BinOp::Mod}, {"SHL", BinOp::Shl},
          {"SHR", BinOp::Shr}, {"AND", BinOp::And}, {"OR", BinOp::Or},
          {"XOR", BinOp::Xor}};
      auto it = ops.find(op);
      if (it == ops.end()) fail("unknown operator " + op);
      ExprPtr l = expr();
      ExprPtr r = expr();
      out = bin(it->second, l, r);
    }
    skip_ws();
    if (pos >= s.size() || s[pos] != ')') fail("')' expected");
    pos++;
    return out;
  }
  std::string t = token();
  if (isdigit((unsigned char)t[0])) {
    try {
      return cst(std::stoull(t, nullptr, 0));
    } catch (const std::exception&) {
      fail("bad number " + t);
    }
  }
  return sym(t);
}

} // namespace

std::string to_prefix(const ExprPtr& e) {
  switch (e->kind) {
  case SymExpr::kSym: return e->name;
  case SymExpr::kConst: return std::to_string(e->value);
  case SymExpr::kUnary:
    return std::string("(") + un_name(e->uop) + " " + to_prefix(e->a) + ")";
  case SymExpr::kBinary:
    return std::string("(") + bin_name(e->bop) + " " + to_prefix(e->a) + " " +
           to_prefix(e->b) + ")";
  }
  return "?";
}

ExprPtr parse_prefix(const std::string& text) {
  Cursor cur{text};
  ExprPtr e = cur.expr();
  cur.skip_ws();
  if (cur.pos != text.size()) cur.fail("trailing input");
  return e;
}

} // namespace driverlet::hal
