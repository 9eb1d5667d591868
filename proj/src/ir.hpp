// SPDX-License-Identifier: Apache-2.0
// Mini three-address IR: textual BIR format, parser, printer, validation.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bitrel {

enum class Opcode : uint8_t {
  Li, Mv, And, Or, Xor, Add, Sub, Shl, Shr,
  Seqz, Snez, Slt, Beq, Bne, Blt, Bge, Jmp, Ret
};

bool is_cond_branch(Opcode op);  // beq/bne/blt/bge
bool is_terminator(Opcode op);   // cond branches, jmp, ret
bool has_dst(Opcode op);         // value-producing opcodes
const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);

struct Operand {
  bool is_reg = false;
  uint64_t value = 0;  // register index or immediate
  static Operand reg(unsigned r) { return {true, r}; }
  static Operand imm(uint64_t v) { return {false, v}; }
  bool operator==(const Operand&) const = default;
};

struct Instruction {
  Opcode opcode = Opcode::Ret;
  std::optional<unsigned> dst;
  std::vector<Operand> srcs;
  std::optional<std::string> target;  // branch/jmp label
  int point = -1;                     // global id, textual order
  int line = 0;                       // source line (diagnostics only)
};

struct Block {
  std::string label;
  std::vector<Instruction> instrs;
};

struct Function {
  std::string name;
  std::vector<unsigned> args;
  unsigned width = 4;
  unsigned nregs = 4;
  std::vector<Block> blocks;

  int first_point() const { return blocks.front().instrs.front().point; }
  int num_points() const;
  uint64_t value_mask() const {
    return width >= 64 ? ~0ull : ((1ull << width) - 1);
  }
};

struct Program {
  std::vector<Function> functions;
  const Function* find(std::string_view name) const;
};

struct ParseError {
  int line = 0;
  std::string message;
};

std::variant<Program, ParseError> parse_program(const std::string& text);
std::string print_function(const Function& fn);
std::string print_program(const Program& prog);
std::string print_instruction(const Instruction& ins);

}  // namespace bitrel
