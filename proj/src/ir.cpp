// SPDX-License-Identifier: Apache-2.0
#include "ir.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace bitrel {

namespace {
struct OpInfo {
  const char* name;
  int nsrc;        // source operand count
  bool dst;        // produces a value
  bool src2_imm;   // second source may be an immediate
  bool target;     // takes a block label
};

// Order must match Opcode.
constexpr OpInfo kOps[] = {
    {"li", 1, true, true, false},   // single src is an immediate
    {"mv", 1, true, false, false},
    {"and", 2, true, true, false},
    {"or", 2, true, true, false},
    {"xor", 2, true, true, false},
    {"add", 2, true, true, false},
    {"sub", 2, true, true, false},
    {"shl", 2, true, true, false},
    {"shr", 2, true, true, false},
    {"seqz", 1, true, false, false},
    {"snez", 1, true, false, false},
    {"slt", 2, true, true, false},
    {"beq", 2, false, true, true},
    {"bne", 2, false, true, true},
    {"blt", 2, false, true, true},
    {"bge", 2, false, true, true},
    {"jmp", 0, false, false, true},
    {"ret", 1, false, false, false},
};

const OpInfo& info(Opcode op) { return kOps[static_cast<int>(op)]; }
}  // namespace

bool is_cond_branch(Opcode op) {
  return op == Opcode::Beq || op == Opcode::Bne || op == Opcode::Blt ||
         op == Opcode::Bge;
}
bool is_terminator(Opcode op) {
  return is_cond_branch(op) || op == Opcode::Jmp || op == Opcode::Ret;
}
bool has_dst(Opcode op) { return info(op).dst; }
const char* opcode_name(Opcode op) { return info(op).name; }

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (size_t i = 0; i < std::size(kOps); ++i)
    if (name == kOps[i].name) return static_cast<Opcode>(i);
  return std::nullopt;
}

int Function::num_points() const {
  int n = 0;
  for (const Block& b : blocks) n += static_cast<int>(b.instrs.size());
  return n;
}

const Function* Program::find(std::string_view name) const {
  for (const Function& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

namespace {

struct Tokenizer {
  std::vector<std::string> toks;
  // Split on whitespace; commas, colons, braces become their own tokens.
  explicit Tokenizer(const std::string& line) {
    std::string cur;
    auto push = [&] {
      if (!cur.empty()) toks.push_back(cur);
      cur.clear();
    };
    for (char c : line) {
      if (c == '#') break;
      if (isspace(static_cast<unsigned char>(c))) {
        push();
      } else if (c == ',' || c == ':' || c == '{' || c == '}' || c == '=') {
        push();
        toks.push_back(std::string(1, c));
      } else {
        cur += c;
      }
    }
    push();
  }
};

struct Parser {
  std::vector<std::string> lines;
  int lineno = 0;  // 1-based index of the line being parsed
  std::optional<ParseError> err;

  void fail(const std::string& msg) {
    if (!err) err = ParseError{lineno, msg};
  }

  static bool parse_reg(const std::string& tok, unsigned& out) {
    if (tok.size() < 2 || tok[0] != 'r') return false;
    unsigned v = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) return false;
    out = v;
    return true;
  }

  static bool parse_imm(const std::string& tok, uint64_t& out) {
    int base = 10;
    size_t off = 0;
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
      base = 16;
      off = 2;
    } else if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'b' || tok[1] == 'B')) {
      base = 2;
      off = 2;
    }
    uint64_t v = 0;
    auto [p, ec] =
        std::from_chars(tok.data() + off, tok.data() + tok.size(), v, base);
    if (ec != std::errc() || p != tok.data() + tok.size()) return false;
    out = v;
    return true;
  }

  std::variant<Program, ParseError> run(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);

    Program prog;
    int next_point = 0;
    size_t i = 0;
    auto next_tokens = [&](Tokenizer& tk) -> bool {
      while (i < lines.size()) {
        ++lineno;
        tk = Tokenizer(lines[i++]);
        if (!tk.toks.empty()) return true;
      }
      return false;
    };

    lineno = 0;
    Tokenizer tk("");
    while (next_tokens(tk)) {
      if (tk.toks[0] != "func") {
        fail("expected 'func'");
        return *err;
      }
      Function fn;
      if (!parse_func_header(tk.toks, fn)) return *err;
      // Body: blocks until '}'.
      Block* cur = nullptr;
      bool closed = false;
      while (next_tokens(tk)) {
        auto& t = tk.toks;
        if (t[0] == "}") {
          if (t.size() != 1) { fail("trailing tokens after '}'"); return *err; }
          closed = true;
          break;
        }
        if (t[0] == "bb") {
          if (t.size() != 3 || t[2] != ":") {
            fail("expected 'bb LABEL:'");
            return *err;
          }
          fn.blocks.push_back(Block{t[1], {}});
          cur = &fn.blocks.back();
          continue;
        }
        if (!cur) {
          fail("instruction outside of a block");
          return *err;
        }
        Instruction ins;
        if (!parse_instruction(t, fn, ins)) return *err;
        ins.point = next_point++;
        ins.line = lineno;
        cur->instrs.push_back(std::move(ins));
      }
      if (!closed) {
        fail("missing '}' at end of function");
        return *err;
      }
      if (!validate_function(fn)) return *err;
      prog.functions.push_back(std::move(fn));
    }
    if (prog.functions.empty()) {
      lineno = 1;
      fail("no functions in input");
      return *err;
    }
    std::set<std::string> names;
    for (const Function& f : prog.functions)
      if (!names.insert(f.name).second) {
        fail("duplicate function name '" + f.name + "'");
        return *err;
      }
    return prog;
  }

  bool parse_func_header(const std::vector<std::string>& t, Function& fn) {
    // func NAME [args rA , rB ...] width W regs M {
    size_t k = 1;
    if (k >= t.size()) return fail("missing function name"), false;
    fn.name = t[k++];
    if (k < t.size() && t[k] == "args") {
      ++k;
      while (k < t.size() && t[k] != "width") {
        if (t[k] == ",") { ++k; continue; }
        unsigned r = 0;
        if (!parse_reg(t[k], r)) return fail("bad argument register '" + t[k] + "'"), false;
        if (std::find(fn.args.begin(), fn.args.end(), r) != fn.args.end())
          return fail("duplicate argument register"), false;
        fn.args.push_back(r);
        ++k;
      }
    }
    uint64_t w = 0, m = 0;
    if (k + 1 >= t.size() || t[k] != "width" || !parse_imm(t[k + 1], w))
      return fail("expected 'width W'"), false;
    k += 2;
    if (k + 1 >= t.size() || t[k] != "regs" || !parse_imm(t[k + 1], m))
      return fail("expected 'regs M'"), false;
    k += 2;
    if (k >= t.size() || t[k] != "{" || k + 1 != t.size())
      return fail("expected '{' at end of function header"), false;
    if (w < 4 || w > 64) return fail("width must be in [4, 64]"), false;
    if (m < 1 || m > 64) return fail("regs must be in [1, 64]"), false;
    fn.width = static_cast<unsigned>(w);
    fn.nregs = static_cast<unsigned>(m);
    for (unsigned a : fn.args)
      if (a >= fn.nregs) return fail("argument register index >= regs"), false;
    return true;
  }

  bool parse_instruction(const std::vector<std::string>& t, const Function& fn,
                         Instruction& ins) {
    auto check_reg = [&](const std::string& tok, unsigned& r) {
      if (!parse_reg(tok, r)) return fail("expected register, got '" + tok + "'"), false;
      if (r >= fn.nregs) return fail("register index >= regs"), false;
      return true;
    };
    auto check_operand = [&](const std::string& tok, bool allow_imm, Operand& op) {
      unsigned r = 0;
      uint64_t v = 0;
      if (parse_reg(tok, r)) {
        if (r >= fn.nregs) return fail("register index >= regs"), false;
        op = Operand::reg(r);
        return true;
      }
      if (allow_imm && parse_imm(tok, v)) {
        if (v > fn.value_mask()) return fail("immediate does not fit in width"), false;
        op = Operand::imm(v);
        return true;
      }
      return fail("bad operand '" + tok + "'"), false;
    };

    // Strip commas for positional parsing.
    std::vector<std::string> p;
    for (const std::string& s : t)
      if (s != ",") p.push_back(s);

    if (p.size() >= 2 && p[1] == "=") {
      // rD = OP src [src]
      unsigned d = 0;
      if (!check_reg(p[0], d)) return false;
      if (p.size() < 3) return fail("missing opcode after '='"), false;
      auto op = opcode_from_name(p[2]);
      if (!op || !has_dst(*op)) return fail("unknown value opcode '" + p[2] + "'"), false;
      ins.opcode = *op;
      ins.dst = d;
      const OpInfo& oi = info(*op);
      if (static_cast<int>(p.size()) - 3 != oi.nsrc)
        return fail("wrong operand count for '" + std::string(oi.name) + "'"), false;
      for (int s = 0; s < oi.nsrc; ++s) {
        Operand o;
        bool allow_imm = (*op == Opcode::Li) || (s == 1 && oi.src2_imm);
        if (!check_operand(p[3 + s], allow_imm, o)) return false;
        if (*op == Opcode::Li && o.is_reg) return fail("li takes an immediate"), false;
        ins.srcs.push_back(o);
      }
      return true;
    }

    auto op = opcode_from_name(p[0]);
    if (!op) return fail("unknown opcode '" + p[0] + "'"), false;
    ins.opcode = *op;
    if (is_cond_branch(*op)) {
      if (p.size() != 4) return fail("branch needs 'OP rS, rS|IMM, LABEL'"), false;
      Operand a, b;
      if (!check_operand(p[1], false, a)) return false;
      if (!check_operand(p[2], true, b)) return false;
      ins.srcs = {a, b};
      ins.target = p[3];
      return true;
    }
    if (*op == Opcode::Jmp) {
      if (p.size() != 2) return fail("jmp needs a label"), false;
      ins.target = p[1];
      return true;
    }
    if (*op == Opcode::Ret) {
      if (p.size() != 2) return fail("ret needs a register"), false;
      Operand a;
      if (!check_operand(p[1], false, a)) return false;
      ins.srcs = {a};
      return true;
    }
    return fail("opcode '" + p[0] + "' requires a destination"), false;
  }

  bool validate_function(Function& fn) {
    if (fn.blocks.empty()) return fail("function has no blocks"), false;
    std::map<std::string, size_t> labels;
    for (size_t b = 0; b < fn.blocks.size(); ++b) {
      if (fn.blocks[b].instrs.empty()) {
        lineno = 0;
        return fail("empty block '" + fn.blocks[b].label + "' in " + fn.name), false;
      }
      if (!labels.emplace(fn.blocks[b].label, b).second) {
        lineno = fn.blocks[b].instrs.front().line;
        return fail("duplicate label '" + fn.blocks[b].label + "'"), false;
      }
    }
    for (size_t b = 0; b < fn.blocks.size(); ++b) {
      Block& blk = fn.blocks[b];
      for (size_t k = 0; k < blk.instrs.size(); ++k) {
        Instruction& ins = blk.instrs[k];
        lineno = ins.line;
        if (is_terminator(ins.opcode) && k + 1 != blk.instrs.size())
          return fail("terminator before end of block"), false;
        if (ins.target && !labels.count(*ins.target))
          return fail("undefined label '" + *ins.target + "'"), false;
      }
      Opcode last = blk.instrs.back().opcode;
      bool falls_through = !is_terminator(last) || is_cond_branch(last);
      if (falls_through && b + 1 == fn.blocks.size()) {
        lineno = blk.instrs.back().line;
        return fail("control falls off the end of function '" + fn.name + "'"), false;
      }
    }
    // Reachability over block graph; unreachable code is rejected.
    std::vector<bool> seen(fn.blocks.size(), false);
    std::vector<size_t> stack = {0};
    seen[0] = true;
    while (!stack.empty()) {
      size_t b = stack.back();
      stack.pop_back();
      const Instruction& last = fn.blocks[b].instrs.back();
      auto visit = [&](size_t nb) {
        if (!seen[nb]) {
          seen[nb] = true;
          stack.push_back(nb);
        }
      };
      if (last.target) visit(labels.at(*last.target));
      if (!is_terminator(last.opcode) || is_cond_branch(last.opcode))
        visit(b + 1);
    }
    for (size_t b = 0; b < fn.blocks.size(); ++b)
      if (!seen[b]) {
        lineno = fn.blocks[b].instrs.front().line;
        return fail("unreachable block '" + fn.blocks[b].label + "'"), false;
      }
    return true;
  }
};

}  // namespace

std::variant<Program, ParseError> parse_program(const std::string& text) {
  Parser p;
  return p.run(text);
}

std::string print_instruction(const Instruction& ins) {
  std::ostringstream os;
  auto operand = [&](const Operand& o) {
    if (o.is_reg)
      os << "r" << o.value;
    else
      os << o.value;
  };
  if (ins.dst) {
    os << "r" << *ins.dst << " = " << opcode_name(ins.opcode);
    for (size_t i = 0; i < ins.srcs.size(); ++i) {
      os << (i ? ", " : " ");
      operand(ins.srcs[i]);
    }
    return os.str();
  }
  os << opcode_name(ins.opcode);
  for (size_t i = 0; i < ins.srcs.size(); ++i) {
    os << (i ? ", " : " ");
    operand(ins.srcs[i]);
  }
  if (ins.target) os << (ins.srcs.empty() ? " " : ", ") << *ins.target;
  return os.str();
}

std::string print_function(const Function& fn) {
  std::ostringstream os;
  os << "func " << fn.name;
  if (!fn.args.empty()) {
    os << " args ";
    for (size_t i = 0; i < fn.args.size(); ++i)
      os << (i ? "," : "") << "r" << fn.args[i];
  }
  os << " width " << fn.width << " regs " << fn.nregs << " {\n";
  for (const Block& b : fn.blocks) {
    os << "bb " << b.label << ":\n";
    for (const Instruction& ins : b.instrs)
      os << "  " << print_instruction(ins) << "\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_program(const Program& prog) {
  std::string out;
  for (const Function& f : prog.functions) out += print_function(f);
  return out;
}

}  // namespace bitrel
