// SPDX-License-Identifier: Apache-2.0
// BIR parser/printer: round-trips, structural validation, error reporting.
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "ir.hpp"

using namespace bitrel;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program parse_ok(const std::string& text) {
  auto r = parse_program(text);
  if (auto* e = std::get_if<ParseError>(&r)) {
    CAPTURE(e->line);
    CAPTURE(e->message);
    REQUIRE(false);
  }
  return std::get<Program>(std::move(r));
}

ParseError parse_err(const std::string& text) {
  auto r = parse_program(text);
  REQUIRE(std::holds_alternative<ParseError>(r));
  return std::get<ParseError>(r);
}

}  // namespace

TEST_CASE("parse/print round-trip is a fixpoint") {
  const char* files[] = {
      "count_years", "count_years_best", "fork_join_mask", "mv_chain",
      "xor_propagate", "shift_relocate", "loop_invariant_read",
      "double_use_xor", "seqz_group", "branch_group", "slt_compare",
      "deadstore_kill", "nonconst_shift", "wrap_add", "multi_use_masked"};
  for (const char* f : files) {
    CAPTURE(f);
    Program p1 = parse_ok(slurp(std::string(BITREL_DATA_DIR) + "/" + f + ".bir"));
    std::string printed = print_program(p1);
    Program p2 = parse_ok(printed);
    CHECK(print_program(p2) == printed);
    CHECK(p1.functions.size() == p2.functions.size());
  }
}

TEST_CASE("parsed structure of the bundled program") {
  Program p = parse_ok(slurp(std::string(BITREL_DATA_DIR) + "/count_years.bir"));
  REQUIRE(p.functions.size() == 1);
  const Function& fn = p.functions[0];
  CHECK(fn.name == "countYears");
  CHECK(fn.width == 4);
  CHECK(fn.nregs == 4);
  CHECK(fn.args.empty());
  REQUIRE(fn.blocks.size() == 3);
  CHECK(fn.blocks[0].label == "entry");
  CHECK(fn.blocks[1].label == "loop");
  CHECK(fn.blocks[2].label == "exit");
  CHECK(fn.num_points() == 11);
  CHECK(fn.value_mask() == 15);
  // Points are assigned in textual order.
  int expect = 0;
  for (const Block& b : fn.blocks)
    for (const Instruction& ins : b.instrs) CHECK(ins.point == expect++);
  const Instruction& bne = fn.blocks[1].instrs.back();
  CHECK(bne.opcode == Opcode::Bne);
  CHECK(bne.target == "loop");
  REQUIRE(bne.srcs.size() == 2);
  CHECK(bne.srcs[0] == Operand::reg(1));
  CHECK(bne.srcs[1] == Operand::imm(0));
  CHECK(print_instruction(bne) == "bne r1, 0, loop");
  CHECK(print_instruction(fn.blocks[0].instrs[1]) == "r1 = li 7");
  CHECK(p.find("countYears") == &fn);
  CHECK(p.find("missing") == nullptr);
}

TEST_CASE("args, immediates in hex and binary, multiple functions") {
  Program p = parse_ok(
      "func f args r1,r2 width 8 regs 4 {\n"
      "bb entry:\n"
      "  r0 = and r1, 0xff\n"
      "  r3 = or r2, 0b101\n"
      "  ret r0\n"
      "}\n"
      "func g width 4 regs 2 {\n"
      "bb entry:\n"
      "  r0 = li 15\n"
      "  ret r0\n"
      "}\n");
  REQUIRE(p.functions.size() == 2);
  CHECK(p.functions[0].args == std::vector<unsigned>{1, 2});
  CHECK(p.functions[0].blocks[0].instrs[0].srcs[1] == Operand::imm(255));
  CHECK(p.functions[0].blocks[0].instrs[1].srcs[1] == Operand::imm(5));
  // The printer canonicalizes immediates to decimal.
  CHECK(print_instruction(p.functions[0].blocks[0].instrs[0]) ==
        "r0 = and r1, 255");
}

TEST_CASE("comments and blank lines are ignored") {
  Program p = parse_ok(
      "# leading comment\n"
      "\n"
      "func f width 4 regs 2 {  # trailing\n"
      "bb entry:  # block comment\n"
      "  r0 = li 1  # value\n"
      "  ret r0\n"
      "}\n");
  CHECK(p.functions[0].num_points() == 2);
}

TEST_CASE("parse errors carry a line and a message") {
  struct Case {
    const char* text;
    const char* needle;  // substring expected in the message
  };
  const Case cases[] = {
      {"", "no functions"},
      {"bogus\n", "expected 'func'"},
      {"func f width 4 regs 2 {\n}\n", "no blocks"},
      {"func f width 4 regs 2 {\nbb a:\nbb b:\n  ret r0\n}\n", "empty block"},
      {"func f width 4 regs 2 {\nbb a:\n  ret r0\nbb a:\n  ret r0\n}\n",
       "duplicate label"},
      {"func f width 4 regs 2 {\nbb a:\n  r0 = li 1\n}\n", "falls off"},
      {"func f width 4 regs 2 {\nbb a:\n  bne r0, 0, a\n}\n", "falls off"},
      {"func f width 4 regs 2 {\nbb a:\n  jmp nowhere\n}\n", "undefined label"},
      {"func f width 4 regs 2 {\nbb a:\n  ret r0\n  r0 = li 1\n}\n",
       "terminator before end"},
      {"func f width 4 regs 2 {\nbb a:\n  r0 = frob r1\n  ret r0\n}\n",
       "unknown value opcode"},
      {"func f width 4 regs 2 {\nbb a:\n  r0 = li 16\n  ret r0\n}\n",
       "immediate does not fit"},
      {"func f width 4 regs 2 {\nbb a:\n  r5 = li 1\n  ret r5\n}\n",
       "register index"},
      {"func f width 4 regs 2 {\nbb a:\n  r0 = li 1\n  ret r0\n",
       "missing '}'"},
      {"func f width 3 regs 2 {\nbb a:\n  ret r0\n}\n", "width"},
      {"func f width 4 regs 65 {\nbb a:\n  ret r0\n}\n", "regs"},
      {"func f args r9 width 4 regs 4 {\nbb a:\n  ret r0\n}\n",
       "argument register index"},
      {"func f args r1,r1 width 4 regs 4 {\nbb a:\n  ret r0\n}\n",
       "duplicate argument"},
      {"func f width 4 regs 4 {\n  r0 = li 1\nbb a:\n  ret r0\n}\n",
       "outside of a block"},
      {"func f width 4 regs 4 {\nbb a:\n  ret r0\n}\nfunc f width 4 regs 4 "
       "{\nbb a:\n  ret r0\n}\n",
       "duplicate function"},
      {"func f width 4 regs 4 {\nbb a:\n  ret r0\nbb dead:\n  ret r0\n}\n",
       "unreachable block"},
      {"func f width 4 regs 4 {\nbb a:\n  ret 7\n}\n", "bad operand"},
      {"func f width 4 regs 4 {\nbb a:\n  r0 = li r1\n  ret r0\n}\n",
       "li takes an immediate"},
      {"func f width 4 regs 4 {\nbb a:\n  r0 = mv 3\n  ret r0\n}\n",
       "bad operand"},
      {"func f width 4 regs 4 {\nbb a:\n  r0 = add r1\n  ret r0\n}\n",
       "wrong operand count"},
      {"func f width 4 regs 4 {\nbb a:\n  beq r0, 0\n  ret r0\n}\n",
       "branch needs"},
  };
  for (const Case& c : cases) {
    std::string text = c.text;
    CAPTURE(text);
    ParseError e = parse_err(c.text);
    CAPTURE(e.message);
    CHECK(e.message.find(c.needle) != std::string::npos);
    CHECK(e.line >= 0);
  }
}

TEST_CASE("fallthrough rules: conditional branch needs a next block") {
  // Conditional branch falls through to the next textual block.
  Program p = parse_ok(
      "func f width 4 regs 2 {\n"
      "bb top:\n"
      "  beq r0, 0, done\n"
      "bb mid:\n"
      "  r1 = li 1\n"
      "bb done:\n"
      "  ret r0\n"
      "}\n");
  CHECK(p.functions[0].blocks.size() == 3);
  // A block may end without a terminator if another block follows.
  Program q = parse_ok(
      "func f width 4 regs 2 {\n"
      "bb top:\n"
      "  r1 = li 1\n"
      "bb done:\n"
      "  ret r1\n"
      "}\n");
  CHECK(q.functions[0].num_points() == 2);
}

TEST_CASE("opcode predicates") {
  CHECK(is_cond_branch(Opcode::Beq));
  CHECK(is_cond_branch(Opcode::Bge));
  CHECK(!is_cond_branch(Opcode::Jmp));
  CHECK(is_terminator(Opcode::Jmp));
  CHECK(is_terminator(Opcode::Ret));
  CHECK(!is_terminator(Opcode::Add));
  CHECK(has_dst(Opcode::Li));
  CHECK(has_dst(Opcode::Slt));
  CHECK(!has_dst(Opcode::Bne));
  CHECK(!has_dst(Opcode::Ret));
  CHECK(opcode_from_name("snez") == Opcode::Snez);
  CHECK(!opcode_from_name("nop").has_value());
  CHECK(std::string(opcode_name(Opcode::Shl)) == "shl");
}
