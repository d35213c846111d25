#include "driverlet/tpl/template.hpp"

#include <cctype>
#include <sstream>

#include "driverlet/sim/mockblk.hpp"

namespace driverlet::tpl {

namespace {

std::string reg_name(const InteractionTemplate& t, u64 offset) {
  try {
    const auto& names = sim::device_reg_names(t.device_id);
    auto it = names.find(offset);
    if (it != names.end()) return it->second;
  } catch (const std::exception&) {
    // unknown device: fall through to numeric form
  }
  return hex(offset);
}

u64 parse_reg(const InteractionTemplate& t, const std::string& tok, int ln) {
  if (tok.rfind("0x", 0) == 0) return std::stoull(tok, nullptr, 16);
  if (!tok.empty() && std::isdigit((unsigned char)tok[0])) return std::stoull(tok);
  try {
    for (const auto& [off, name] : sim::device_reg_names(t.device_id))
      if (name == tok) return off;
  } catch (const std::exception&) {
  }
  throw ParseError(ln, "unknown register name " + tok);
}

std::string hex_bytes(const std::vector<u8>& v) {
  static const char* d = "0123456789abcdef";
  std::string out;
  out.reserve(v.size() * 2);
  for (u8 b : v) {
    out.push_back(d[b >> 4]);
    out.push_back(d[b & 0xF]);
  }
  return out;
}

std::vector<u8> parse_hex(const std::string& s, int ln) {
  if (s.size() % 2) throw ParseError(ln, "odd-length hex string");
  auto nib = [&](char c) -> u8 {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(ln, std::string("bad hex digit '") + c + "'");
  };
  std::vector<u8> out(s.size() / 2);
  for (size_t i = 0; i < out.size(); i++) out[i] = (u8)((nib(s[2 * i]) << 4) | nib(s[2 * i + 1]));
  return out;
}

// Split "a, b, c" at top-level commas, respecting quotes and all bracket kinds.
std::vector<std::string> split_args(const std::string& s, int ln) {
  std::vector<std::string> out;
  int depth = 0;
  bool quoted = false;
  std::string cur;
  for (char c : s) {
    if (quoted) {
      cur.push_back(c);
      if (c == '"') quoted = false;
      continue;
    }
    switch (c) {
    case '"': quoted = true; cur.push_back(c); break;
    case '(': case '[': case '{': depth++; cur.push_back(c); break;
    case ')': case ']': case '}': depth--; cur.push_back(c); break;
    case ',':
      if (depth == 0) {
        out.push_back(cur);
        cur.clear();
        break;
      }
      [[fallthrough]];
    default: cur.push_back(c);
    }
  }
  if (depth != 0 || quoted) throw ParseError(ln, "unbalanced brackets or quotes");
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  for (auto& a : out) {
    size_t b = a.find_first_not_of(' ');
    size_t e = a.find_last_not_of(' ');
    a = b == std::string::npos ? "" : a.substr(b, e - b + 1);
  }
  return out;
}

std::string unquote(const std::string& s, int ln) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw ParseError(ln, "expected quoted constraint, got " + s);
  return s.substr(1, s.size() - 2);
}

u64 parse_num(const std::string& s, int ln) {
  try {
    return s.rfind("0x", 0) == 0 ? std::stoull(s, nullptr, 16) : std::stoull(s);
  } catch (const std::exception&) {
    throw ParseError(ln, "expected number, got " + s);
  }
}

ExprPtr parse_expr(const std::string& s, int ln) {
  try {
    return hal::parse_prefix(s);
  } catch (const std::exception& e) {
    throw ParseError(ln, std::string("bad expression: ") + e.what());
  }
}

Constraint parse_cons(const std::string& s, int ln) {
  try {
    return parse_constraint(s);
  } catch (const std::exception& e) {
    throw ParseError(ln, std::string("bad constraint: ") + e.what());
  }
}

// Slice argument: src[off_expr : len_expr] (spaced colon; symbol names may
// themselves contain colons).
std::string slice_str(const SliceRef& s) {
  return s.src + "[" + hal::to_prefix(s.off) + " : " + hal::to_prefix(s.len) + "]";
}

SliceRef parse_slice(const std::string& s, int ln) {
  size_t lb = s.find('[');
  if (lb == std::string::npos || s.back() != ']') throw ParseError(ln, "bad slice " + s);
  std::string inner = s.substr(lb + 1, s.size() - lb - 2);
  size_t sep = inner.find(" : ");
  if (sep == std::string::npos) throw ParseError(ln, "bad slice bounds in " + s);
  return {s.substr(0, lb), parse_expr(inner.substr(0, sep), ln),
          parse_expr(inner.substr(sep + 3), ln)};
}

bool is_slice_arg(const std::string& s) {
  return !s.empty() && s[0] != '(' && s.find('[') != std::string::npos;
}

std::string offset_str(const Event& e) {
  return e.offset_expr ? hal::to_prefix(e.offset_expr) : std::to_string(e.offset);
}

std::string fixups_str(const std::vector<Fixup>& fs) {
  std::string out = "{";
  for (size_t i = 0; i < fs.size(); i++) {
    if (i) out += ";";
    out += std::to_string(fs[i].offset) + ":" + hal::to_prefix(fs[i].expr);
  }
  return out + "}";
}

std::vector<Fixup> parse_fixups(const std::string& s, int ln) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw ParseError(ln, "bad fixup list " + s);
  std::vector<Fixup> out;
  std::string inner = s.substr(1, s.size() - 2);
  size_t pos = 0;
  int depth = 0;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    size_t colon = cur.find(':');
    if (colon == std::string::npos) throw ParseError(ln, "bad fixup " + cur);
    out.push_back({parse_num(cur.substr(0, colon), ln), parse_expr(cur.substr(colon + 1), ln)});
    cur.clear();
  };
  for (; pos < inner.size(); pos++) {
    char c = inner[pos];
    if (c == '(') depth++;
    if (c == ')') depth--;
    if (c == ';' && depth == 0)
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return out;
}

const char* role_name(TemplateParam::Role r) {
  switch (r) {
  case TemplateParam::kScalar: return "scalar";
  case TemplateParam::kDataIn: return "data_in_addr";
  case TemplateParam::kDataOut: return "data_out_addr";
  }
  return "?";
}

TemplateParam::Role parse_role(const std::string& s, int ln) {
  if (s == "scalar") return TemplateParam::kScalar;
  if (s == "data_in_addr") return TemplateParam::kDataIn;
  if (s == "data_out_addr") return TemplateParam::kDataOut;
  throw ParseError(ln, "unknown param role " + s);
}

void serialize_event(std::ostringstream& os, const InteractionTemplate& t, const Event& e) {
  os << "event " << event_kind_name(e.kind) << "(";
  switch (e.kind) {
  case Event::kRead:
    os << reg_name(t, e.reg) << ", \"" << to_string(e.cons) << "\", " << e.width << ") -> "
       << e.binds;
    break;
  case Event::kWrite:
    os << reg_name(t, e.reg) << ", " << hal::to_prefix(e.value) << ", " << e.width << ")";
    break;
  case Event::kMemRead:
    os << e.region << ", " << offset_str(e) << ", \"" << to_string(e.cons) << "\", " << e.width
       << ") -> " << e.binds;
    break;
  case Event::kMemWrite:
    os << e.region << ", " << offset_str(e) << ", "
       << (e.slice ? slice_str(*e.slice) : hal::to_prefix(e.value));
    if (!e.slice) os << ", " << e.width;
    os << ")";
    break;
  case Event::kPoll:
    os << reg_name(t, e.reg) << ", \"" << to_string(e.cons) << "\", " << e.timeout << ")";
    break;
  case Event::kDelay:
    os << e.steps << ")";
    break;
  case Event::kDmaAlloc:
    os << hal::to_prefix(e.value) << ") -> " << e.binds;
    break;
  case Event::kWaitIrq:
    os << e.line << ", " << e.timeout << ")";
    break;
  case Event::kLoadMem:
    os << e.region << ", " << e.snapshot_id << ", " << fixups_str(e.fixups) << ")";
    break;
  }
  if (!e.src_loc.empty()) os << " @ " << e.src_loc;
  os << "\n";
}

Event parse_event(const InteractionTemplate& t, const std::string& body, int ln) {
  // <kind>(<args>)[ -> sym][ @ loc]
  size_t open = body.find('(');
  if (open == std::string::npos) throw ParseError(ln, "malformed event line");
  std::string kind = body.substr(0, open);
  // find matching close paren
  int depth = 0;
  bool quoted = false;
  size_t close = std::string::npos;
  for (size_t i = open; i < body.size(); i++) {
    char c = body[i];
    if (quoted) {
      if (c == '"') quoted = false;
      continue;
    }
    if (c == '"') quoted = true;
    if (c == '(') depth++;
    if (c == ')' && --depth == 0) {
      close = i;
      break;
    }
  }
  if (close == std::string::npos) throw ParseError(ln, "unbalanced parentheses");
  auto args = split_args(body.substr(open + 1, close - open - 1), ln);
  std::string tail = body.substr(close + 1);

  Event e;
  size_t arrow = tail.find("-> ");
  if (arrow != std::string::npos) {
    size_t end = tail.find(' ', arrow + 3);
    e.binds = tail.substr(arrow + 3, end == std::string::npos ? end : end - arrow - 3);
  }
  size_t at = tail.find("@ ");
  if (at != std::string::npos) e.src_loc = tail.substr(at + 2);

  auto want = [&](size_t n) {
    if (args.size() != n)
      throw ParseError(ln, kind + " expects " + std::to_string(n) + " arguments");
  };
  if (kind == "read") {
    e.kind = Event::kRead;
    want(3);
    e.reg = parse_reg(t, args[0], ln);
    e.cons = parse_cons(unquote(args[1], ln), ln);
    e.width = (int)parse_num(args[2], ln);
  } else if (kind == "write") {
    e.kind = Event::kWrite;
    want(3);
    e.reg = parse_reg(t, args[0], ln);
    e.value = parse_expr(args[1], ln);
    e.width = (int)parse_num(args[2], ln);
  } else if (kind == "mem_read") {
    e.kind = Event::kMemRead;
    want(4);
    e.region = args[0];
    e.offset = parse_num(args[1], ln);
    e.cons = parse_cons(unquote(args[2], ln), ln);
    e.width = (int)parse_num(args[3], ln);
  } else if (kind == "mem_write") {
    e.kind = Event::kMemWrite;
    if (args.size() != 3 && args.size() != 4)
      throw ParseError(ln, "mem_write expects 3 or 4 arguments");
    e.region = args[0];
    if (!args[1].empty() && std::isdigit((unsigned char)args[1][0]))
      e.offset = parse_num(args[1], ln);
    else
      e.offset_expr = parse_expr(args[1], ln);
    if (is_slice_arg(args[2])) {
      if (args.size() != 3) throw ParseError(ln, "slice mem_write takes no width");
      e.slice = parse_slice(args[2], ln);
      e.width = 0;
    } else {
      want(4);
      e.value = parse_expr(args[2], ln);
      e.width = (int)parse_num(args[3], ln);
    }
  } else if (kind == "poll") {
    e.kind = Event::kPoll;
    want(3);
    e.reg = parse_reg(t, args[0], ln);
    e.cons = parse_cons(unquote(args[1], ln), ln);
    e.timeout = parse_num(args[2], ln);
  } else if (kind == "delay") {
    e.kind = Event::kDelay;
    want(1);
    e.steps = parse_num(args[0], ln);
  } else if (kind == "dma_alloc") {
    e.kind = Event::kDmaAlloc;
    want(1);
    e.value = parse_expr(args[0], ln);
  } else if (kind == "wait_irq") {
    e.kind = Event::kWaitIrq;
    want(2);
    e.line = (int)parse_num(args[0], ln);
    e.timeout = parse_num(args[1], ln);
  } else if (kind == "load_mem") {
    e.kind = Event::kLoadMem;
    want(3);
    e.region = args[0];
    e.snapshot_id = args[1];
    e.fixups = parse_fixups(args[2], ln);
  } else {
    throw ParseError(ln, "unknown event kind " + kind);
  }
  if ((e.kind == Event::kRead || e.kind == Event::kMemRead || e.kind == Event::kDmaAlloc) &&
      e.binds.empty())
    throw ParseError(ln, kind + " must bind a symbol");
  return e;
}

} // namespace

std::string serialize(const InteractionTemplate& t, bool include_mac) {
  std::ostringstream os;
  os << "template " << t.name << " entry=" << t.entry << " device=" << t.device_id
     << " reset=" << t.reset_name << "\n";
  for (const auto& p : t.params)
    os << "param " << p.name << " " << role_name(p.role) << " \"" << to_string(p.cons)
       << "\"\n";
  for (const auto& e : t.events) serialize_event(os, t, e);
  for (const auto& [id, bytes] : t.snapshots) os << "snapshot " << id << " " << hex_bytes(bytes)
                                                << "\n";
  if (include_mac && t.has_mac)
    os << "mac " << hex_bytes(std::vector<u8>(t.mac.begin(), t.mac.end())) << "\n";
  return os.str();
}

InteractionTemplate parse_template(const std::string& text) {
  InteractionTemplate t;
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ln++;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "template") {
      if (saw_header) throw ParseError(ln, "duplicate template header");
      saw_header = true;
      ls >> t.name;
      std::string kv;
      while (ls >> kv) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError(ln, "bad header field " + kv);
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "entry")
          t.entry = v;
        else if (k == "device")
          t.device_id = v;
        else if (k == "reset")
          t.reset_name = v;
        else
          throw ParseError(ln, "unknown header field " + k);
      }
      if (t.entry.empty() || t.device_id.empty())
        throw ParseError(ln, "header missing entry or device");
    } else if (!saw_header) {
      throw ParseError(ln, "expected template header first");
    } else if (word == "param") {
      TemplateParam p;
      std::string role;
      ls >> p.name >> role;
      std::string rest;
      std::getline(ls, rest);
      size_t b = rest.find_first_not_of(' ');
      if (p.name.empty() || role.empty() || b == std::string::npos)
        throw ParseError(ln, "malformed param line");
      p.role = parse_role(role, ln);
      p.cons = parse_cons(unquote(rest.substr(b), ln), ln);
      for (const auto& q : t.params)
        if (q.name == p.name) throw ParseError(ln, "duplicate param " + p.name);
      t.params.push_back(std::move(p));
    } else if (word == "event") {
      std::string rest;
      std::getline(ls, rest);
      size_t b = rest.find_first_not_of(' ');
      if (b == std::string::npos) throw ParseError(ln, "empty event line");
      t.events.push_back(parse_event(t, rest.substr(b), ln));
    } else if (word == "snapshot") {
      std::string id, hexs;
      ls >> id >> hexs;
      if (id.empty() || hexs.empty()) throw ParseError(ln, "malformed snapshot line");
      if (t.snapshots.count(id)) throw ParseError(ln, "duplicate snapshot " + id);
      t.snapshots[id] = parse_hex(hexs, ln);
    } else if (word == "mac") {
      std::string hexs;
      ls >> hexs;
      auto bytes = parse_hex(hexs, ln);
      if (bytes.size() != t.mac.size()) throw ParseError(ln, "mac must be 32 bytes");
      std::copy(bytes.begin(), bytes.end(), t.mac.begin());
      t.has_mac = true;
    } else if (t.has_mac) {
      throw ParseError(ln, "content after the mac trailer");
    } else {
      throw ParseError(ln, "unknown directive " + word);
    }
    if (t.has_mac && is.peek() != EOF) throw ParseError(ln + 1, "content after the mac trailer");
  }
  if (!saw_header) throw ParseError(ln, "missing template header");
  // The mac trailer doubles as an end-of-file marker: a truncated file can
  // never parse into a partial template.
  if (!t.has_mac) throw ParseError(ln, "missing mac trailer");
  return t;
}

} // namespace driverlet::tpl
