// SPDX-License-Identifier: Apache-2.0
#include "bits.hpp"

#include <algorithm>
#include <cassert>

namespace bitrel {

namespace {
constexpr int B = 0, Z = 1, O = 2, T = 3;

// meet: Bot identity, Top absorbing, Zero^One = Top.
constexpr uint8_t kMeet[4][4] = {
    /* Bot  */ {B, Z, O, T},
    /* Zero */ {Z, Z, T, T},
    /* One  */ {O, T, O, T},
    /* Top  */ {T, T, T, T},
};

// Gamma-exact bitwise tables. A Bot operand has an empty gamma set, so every
// Bot row/column is Bot. Known/unknown cells follow from set arithmetic, e.g.
// and(Top, Zero) = Zero (0 dominates), or(Top, One) = One.
constexpr uint8_t kAnd[4][4] = {
    {B, B, B, B},
    {B, Z, Z, Z},
    {B, Z, O, T},
    {B, Z, T, T},
};
constexpr uint8_t kOr[4][4] = {
    {B, B, B, B},
    {B, Z, O, T},
    {B, O, O, O},
    {B, T, O, T},
};
constexpr uint8_t kXor[4][4] = {
    {B, B, B, B},
    {B, Z, O, T},
    {B, O, Z, T},
    {B, T, T, T},
};
}  // namespace

AbsBit alpha_from_set(bool has0, bool has1) {
  if (has0 && has1) return AbsBit::Top;
  if (has0) return AbsBit::Zero;
  if (has1) return AbsBit::One;
  return AbsBit::Bot;
}

AbsBit meet(AbsBit a, AbsBit b) {
  return static_cast<AbsBit>(kMeet[static_cast<int>(a)][static_cast<int>(b)]);
}

bool leq(AbsBit a, AbsBit b) {
  return a == b || a == AbsBit::Bot || b == AbsBit::Top;
}

AbsBit flip(AbsBit b) {
  switch (b) {
    case AbsBit::Zero: return AbsBit::One;
    case AbsBit::One: return AbsBit::Zero;
    default: return b;
  }
}

AbsBit abs_and(AbsBit a, AbsBit b) {
  return static_cast<AbsBit>(kAnd[static_cast<int>(a)][static_cast<int>(b)]);
}
AbsBit abs_or(AbsBit a, AbsBit b) {
  return static_cast<AbsBit>(kOr[static_cast<int>(a)][static_cast<int>(b)]);
}
AbsBit abs_xor(AbsBit a, AbsBit b) {
  return static_cast<AbsBit>(kXor[static_cast<int>(a)][static_cast<int>(b)]);
}
AbsBit abs_not(AbsBit a) { return abs_xor(a, AbsBit::One); }

AbsBit abs_maj3(AbsBit a, AbsBit b, AbsBit c) {
  bool has0 = false, has1 = false;
  for (int x = 0; x <= 1; ++x) {
    if (!can_be(a, x)) continue;
    for (int y = 0; y <= 1; ++y) {
      if (!can_be(b, y)) continue;
      for (int z = 0; z <= 1; ++z) {
        if (!can_be(c, z)) continue;
        (x + y + z >= 2 ? has1 : has0) = true;
      }
    }
  }
  return alpha_from_set(has0, has1);
}

AbsWord AbsWord::constant(unsigned width, uint64_t value) {
  AbsWord w(width, AbsBit::Zero);
  for (unsigned i = 0; i < width; ++i)
    if ((value >> i) & 1u) w.bits_[i] = AbsBit::One;
  return w;
}

bool AbsWord::has_bot() const {
  for (AbsBit b : bits_)
    if (b == AbsBit::Bot) return true;
  return false;
}

bool AbsWord::all_known() const {
  for (AbsBit b : bits_)
    if (!is_known(b)) return false;
  return true;
}

uint64_t AbsWord::known_value() const {
  uint64_t v = 0;
  for (unsigned i = 0; i < width(); ++i)
    if (bits_[i] == AbsBit::One) v |= 1ull << i;
  return v;
}

std::string AbsWord::to_string() const {
  std::string s(width(), '?');
  for (unsigned i = 0; i < width(); ++i) {
    char c = '?';
    switch (bits_[i]) {
      case AbsBit::Bot: c = '.'; break;
      case AbsBit::Zero: c = '0'; break;
      case AbsBit::One: c = '1'; break;
      case AbsBit::Top: c = 'x'; break;
    }
    s[width() - 1 - i] = c;
  }
  return s;
}

std::optional<AbsWord> AbsWord::parse(const std::string& msb_first) {
  if (msb_first.empty()) return std::nullopt;
  AbsWord w(static_cast<unsigned>(msb_first.size()), AbsBit::Bot);
  for (unsigned i = 0; i < w.width(); ++i) {
    switch (msb_first[w.width() - 1 - i]) {
      case '.': w.bits_[i] = AbsBit::Bot; break;
      case '0': w.bits_[i] = AbsBit::Zero; break;
      case '1': w.bits_[i] = AbsBit::One; break;
      case 'x': w.bits_[i] = AbsBit::Top; break;
      default: return std::nullopt;
    }
  }
  return w;
}

AbsWord meet(const AbsWord& a, const AbsWord& b) {
  assert(a.width() == b.width());
  AbsWord r(a.width(), AbsBit::Bot);
  for (unsigned i = 0; i < a.width(); ++i) r.set(i, meet(a.get(i), b.get(i)));
  return r;
}

bool leq(const AbsWord& a, const AbsWord& b) {
  assert(a.width() == b.width());
  for (unsigned i = 0; i < a.width(); ++i)
    if (!leq(a.get(i), b.get(i))) return false;
  return true;
}

uint64_t min_unsigned(const AbsWord& w) {
  uint64_t v = 0;
  for (unsigned i = 0; i < w.width(); ++i)
    if (w.get(i) == AbsBit::One) v |= 1ull << i;
  return v;
}

uint64_t max_unsigned(const AbsWord& w) {
  uint64_t v = 0;
  for (unsigned i = 0; i < w.width(); ++i)
    if (w.get(i) != AbsBit::Zero) v |= 1ull << i;
  return v;
}

Tri cmp_eq(const AbsWord& a, const AbsWord& b) {
  bool all_known_equal = true;
  for (unsigned i = 0; i < a.width(); ++i) {
    AbsBit x = a.get(i), y = b.get(i);
    if (is_known(x) && is_known(y)) {
      if (x != y) return Tri::False;
    } else {
      all_known_equal = false;
    }
  }
  return all_known_equal ? Tri::True : Tri::Unknown;
}

Tri cmp_ult(const AbsWord& a, const AbsWord& b) {
  if (max_unsigned(a) < min_unsigned(b)) return Tri::True;
  if (min_unsigned(a) >= max_unsigned(b)) return Tri::False;
  return Tri::Unknown;
}

Tri is_zero(const AbsWord& a) {
  bool all_zero = true;
  for (unsigned i = 0; i < a.width(); ++i) {
    if (a.get(i) == AbsBit::One) return Tri::False;
    if (a.get(i) != AbsBit::Zero) all_zero = false;
  }
  return all_zero ? Tri::True : Tri::Unknown;
}

namespace {
AbsWord bitwise(const AbsWord& a, const AbsWord& b, AbsBit (*op)(AbsBit, AbsBit)) {
  assert(a.width() == b.width());
  AbsWord r(a.width(), AbsBit::Bot);
  for (unsigned i = 0; i < a.width(); ++i) r.set(i, op(a.get(i), b.get(i)));
  return r;
}

// Ripple-carry addition with an explicit initial carry; b may be inverted by
// the caller to realize subtraction. Any Bot input bit collapses the word.
AbsWord ripple_add(const AbsWord& a, const AbsWord& b, AbsBit carry) {
  unsigned w = a.width();
  if (a.has_bot() || b.has_bot()) return AbsWord(w, AbsBit::Bot);
  AbsWord r(w, AbsBit::Bot);
  for (unsigned i = 0; i < w; ++i) {
    r.set(i, abs_xor(abs_xor(a.get(i), b.get(i)), carry));
    carry = abs_maj3(a.get(i), b.get(i), carry);
  }
  return r;
}

// Shift by an exactly known amount; fill with Zero. k >= width clears.
AbsWord shift_known(const AbsWord& v, uint64_t k, bool left) {
  unsigned w = v.width();
  AbsWord r(w, AbsBit::Zero);
  if (k >= w) return r;
  for (unsigned i = 0; i < w; ++i) {
    if (left) {
      if (i + k < w) r.set(static_cast<unsigned>(i + k), v.get(i));
    } else {
      if (i >= k) r.set(static_cast<unsigned>(i - k), v.get(i));
    }
  }
  return r;
}

// Non-constant amounts merge every feasible shift in the unsigned interval of
// the amount word, capped at width (all bits shifted out).
AbsWord shift_any(const AbsWord& v, const AbsWord& amt, bool left) {
  unsigned w = v.width();
  if (v.has_bot() || amt.has_bot()) return AbsWord(w, AbsBit::Bot);
  uint64_t lo = min_unsigned(amt);
  uint64_t hi = std::min<uint64_t>(max_unsigned(amt), w);
  lo = std::min<uint64_t>(lo, w);
  AbsWord r = shift_known(v, lo, left);
  for (uint64_t k = lo + 1; k <= hi; ++k) r = meet(r, shift_known(v, k, left));
  return r;
}
}  // namespace

AbsWord tr_and(const AbsWord& a, const AbsWord& b) { return bitwise(a, b, abs_and); }
AbsWord tr_or(const AbsWord& a, const AbsWord& b) { return bitwise(a, b, abs_or); }
AbsWord tr_xor(const AbsWord& a, const AbsWord& b) { return bitwise(a, b, abs_xor); }

AbsWord tr_add(const AbsWord& a, const AbsWord& b) {
  return ripple_add(a, b, AbsBit::Zero);
}

AbsWord tr_sub(const AbsWord& a, const AbsWord& b) {
  AbsWord nb(b.width(), AbsBit::Bot);
  for (unsigned i = 0; i < b.width(); ++i) nb.set(i, abs_not(b.get(i)));
  return ripple_add(a, nb, AbsBit::One);
}

AbsWord tr_shl(const AbsWord& val, const AbsWord& amt) {
  return shift_any(val, amt, /*left=*/true);
}
AbsWord tr_shr(const AbsWord& val, const AbsWord& amt) {
  return shift_any(val, amt, /*left=*/false);
}

AbsWord tr_seqz(const AbsWord& a) {
  unsigned w = a.width();
  if (a.has_bot()) return AbsWord(w, AbsBit::Bot);
  AbsWord r(w, AbsBit::Zero);
  switch (is_zero(a)) {
    case Tri::True: r.set(0, AbsBit::One); break;
    case Tri::False: r.set(0, AbsBit::Zero); break;
    case Tri::Unknown: r.set(0, AbsBit::Top); break;
  }
  return r;
}

AbsWord tr_snez(const AbsWord& a) {
  unsigned w = a.width();
  if (a.has_bot()) return AbsWord(w, AbsBit::Bot);
  AbsWord r(w, AbsBit::Zero);
  switch (is_zero(a)) {
    case Tri::True: r.set(0, AbsBit::Zero); break;
    case Tri::False: r.set(0, AbsBit::One); break;
    case Tri::Unknown: r.set(0, AbsBit::Top); break;
  }
  return r;
}

AbsWord tr_slt(const AbsWord& a, const AbsWord& b) {
  unsigned w = a.width();
  if (a.has_bot() || b.has_bot()) return AbsWord(w, AbsBit::Bot);
  AbsWord r(w, AbsBit::Zero);
  switch (cmp_ult(a, b)) {
    case Tri::True: r.set(0, AbsBit::One); break;
    case Tri::False: r.set(0, AbsBit::Zero); break;
    case Tri::Unknown: r.set(0, AbsBit::Top); break;
  }
  return r;
}

}  // namespace bitrel
