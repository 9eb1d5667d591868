// SPDX-License-Identifier: Apache-2.0
// Four-valued abstract bit domain and the per-opcode abstract transfers.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bitrel {

// Abstract bit: Bot = no assignment seen (gamma = {}), Zero/One exact,
// Top = unknown (gamma = {0,1}).
enum class AbsBit : uint8_t { Bot = 0, Zero = 1, One = 2, Top = 3 };

constexpr bool can_be(AbsBit b, int v) {
  return v ? (b == AbsBit::One || b == AbsBit::Top)
           : (b == AbsBit::Zero || b == AbsBit::Top);
}
constexpr bool is_known(AbsBit b) { return b == AbsBit::Zero || b == AbsBit::One; }

// alpha over a subset of {0,1}.
AbsBit alpha_from_set(bool has0, bool has1);

// Lattice meet (information merge): Bot is identity, Top absorbing, 0^1 = Top.
AbsBit meet(AbsBit a, AbsBit b);
// Partial order: Bot <= {Zero, One} <= Top, reflexive.
bool leq(AbsBit a, AbsBit b);
// Soft-error flip: 0<->1, Top stays Top, Bot stays Bot.
AbsBit flip(AbsBit b);

// Gamma-exact bitwise operators (enumerated 4x4 tables in bits.cpp).
AbsBit abs_and(AbsBit a, AbsBit b);
AbsBit abs_or(AbsBit a, AbsBit b);
AbsBit abs_xor(AbsBit a, AbsBit b);
AbsBit abs_not(AbsBit a);
// Gamma-exact 3-input majority (carry function).
AbsBit abs_maj3(AbsBit a, AbsBit b, AbsBit c);

// Fixed-width vector of abstract bits; index 0 = LSB.
class AbsWord {
 public:
  AbsWord() = default;
  AbsWord(unsigned width, AbsBit fill) : bits_(width, fill) {}
  static AbsWord constant(unsigned width, uint64_t value);

  unsigned width() const { return static_cast<unsigned>(bits_.size()); }
  AbsBit get(unsigned i) const { return bits_[i]; }
  void set(unsigned i, AbsBit b) { bits_[i] = b; }
  bool has_bot() const;
  bool all_known() const;
  uint64_t known_value() const;  // precondition: all_known()

  bool operator==(const AbsWord&) const = default;

  // MSB-first string over {'.', '0', '1', 'x'}.
  std::string to_string() const;
  static std::optional<AbsWord> parse(const std::string& msb_first);

 private:
  std::vector<AbsBit> bits_;
};

AbsWord meet(const AbsWord& a, const AbsWord& b);
bool leq(const AbsWord& a, const AbsWord& b);

// Interval endpoints of gamma(w): Top counts as 0 (min) or 1 (max).
// Precondition: no Bot bit (callers guard; Bot means unreachable state).
uint64_t min_unsigned(const AbsWord& w);
uint64_t max_unsigned(const AbsWord& w);

// Three-valued predicates over abstract words.
enum class Tri : uint8_t { False, True, Unknown };
Tri cmp_eq(const AbsWord& a, const AbsWord& b);   // value equality
Tri cmp_ult(const AbsWord& a, const AbsWord& b);  // unsigned less-than
Tri is_zero(const AbsWord& a);

// Per-opcode transfers. Word-level ops (add/sub/shift/compare) collapse to
// all-Bot when any input bit is Bot (gamma of the input set is empty).
AbsWord tr_and(const AbsWord& a, const AbsWord& b);
AbsWord tr_or(const AbsWord& a, const AbsWord& b);
AbsWord tr_xor(const AbsWord& a, const AbsWord& b);
AbsWord tr_add(const AbsWord& a, const AbsWord& b);
AbsWord tr_sub(const AbsWord& a, const AbsWord& b);
AbsWord tr_shl(const AbsWord& val, const AbsWord& amt);
AbsWord tr_shr(const AbsWord& val, const AbsWord& amt);
AbsWord tr_seqz(const AbsWord& a);
AbsWord tr_snez(const AbsWord& a);
AbsWord tr_slt(const AbsWord& a, const AbsWord& b);

}  // namespace bitrel
