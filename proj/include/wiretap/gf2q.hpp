// Binary extension field arithmetic GF(2^q), 2 <= q <= 16.
//
// Elements are polynomial coefficient vectors over GF(2) packed into an
// unsigned integer, most significant bit = highest-degree coefficient.
// Addition is XOR; multiplication reduces modulo a fixed irreducible
// polynomial per width (verified irreducible at compile time).

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiretap {

using Bit = std::uint8_t;
using BitVec = std::vector<Bit>;

inline constexpr int kMinFieldWidth = 2;
inline constexpr int kMaxFieldWidth = 16;

// Reduction polynomials indexed by width q; mask includes the x^q term.
// q=8 is x^8+x^4+x^3+x+1, the AES polynomial.
inline constexpr std::uint32_t kReductionPoly[kMaxFieldWidth + 1] = {
    0,       0,       0x7,     0xB,    0x13,   0x25,    0x43,   0x83,   0x11B,
    0x211,   0x409,   0x805,   0x1053, 0x201B, 0x4443,  0x8003, 0x1100B};

namespace detail {

constexpr int poly_degree(std::uint32_t p) {
  int d = -1;
  while (p != 0) {
    ++d;
    p >>= 1;
  }
  return d;
}

constexpr std::uint32_t poly_mod(std::uint32_t a, std::uint32_t m) {
  const int dm = poly_degree(m);
  for (int da = poly_degree(a); da >= dm; da = poly_degree(a)) {
    a ^= m << (da - dm);
  }
  return a;
}

// Trial division by every polynomial of degree 1..q/2.
constexpr bool is_irreducible(std::uint32_t p) {
  const int d = poly_degree(p);
  if (d < 1) return false;
  const std::uint32_t limit = std::uint32_t{1} << (d / 2 + 1);
  for (std::uint32_t f = 2; f < limit; ++f) {
    if (poly_mod(p, f) == 0) return false;
  }
  return true;
}

constexpr bool reduction_table_irreducible() {
  for (int q = kMinFieldWidth; q <= kMaxFieldWidth; ++q) {
    if (poly_degree(kReductionPoly[q]) != q) return false;
    if (!is_irreducible(kReductionPoly[q])) return false;
  }
  return true;
}

static_assert(reduction_table_irreducible(),
              "reduction polynomial table contains a reducible entry");

}  // namespace detail

class non_invertible_error : public std::domain_error {
 public:
  non_invertible_error() : std::domain_error("zero has no inverse in GF(2^q)") {}
};

struct FieldElement {
  std::uint32_t value = 0;
  int width = 8;

  friend bool operator==(const FieldElement&, const FieldElement&) = default;
};

inline void check_width(int q) {
  if (q < kMinFieldWidth || q > kMaxFieldWidth) {
    throw std::invalid_argument("field width q must be in [2, 16], got " +
                                std::to_string(q));
  }
}

inline FieldElement make_element(std::uint32_t value, int width) {
  check_width(width);
  if (value >> width) {
    throw std::invalid_argument("field element value out of range for width");
  }
  return FieldElement{value, width};
}

// Shift-and-add product of raw q-bit values, reduced after every shift.
inline std::uint32_t gf_mul_raw(std::uint32_t a, std::uint32_t b, int q) {
  const std::uint32_t poly = kReductionPoly[q];
  std::uint32_t r = 0;
  while (b != 0) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a >> q) a ^= poly;
  }
  return r;
}

// Inverse by Fermat: a^(2^q - 2), square-and-multiply.
inline std::uint32_t gf_inv_raw(std::uint32_t a, int q) {
  if (a == 0) throw non_invertible_error();
  std::uint32_t result = 1;
  std::uint32_t base = a;
  // Exponent 2^q - 2 = 0b111...10 (q-1 ones followed by a zero).
  for (int i = 1; i < q; ++i) {
    base = gf_mul_raw(base, base, q);
    result = gf_mul_raw(result, base, q);
  }
  return result;
}

inline FieldElement gf_mul(FieldElement a, FieldElement b) {
  if (a.width != b.width) {
    throw std::invalid_argument("gf_mul: operand widths differ");
  }
  check_width(a.width);
  return FieldElement{gf_mul_raw(a.value, b.value, a.width), a.width};
}

inline FieldElement gf_inv(FieldElement a) {
  check_width(a.width);
  return FieldElement{gf_inv_raw(a.value, a.width), a.width};
}

// MSB-first: bits[0] is the coefficient of x^(q-1).
inline FieldElement bits_to_element(const BitVec& bits) {
  const int q = static_cast<int>(bits.size());
  check_width(q);
  std::uint32_t v = 0;
  for (const Bit bit : bits) {
    if (bit > 1) throw std::invalid_argument("bits_to_element: bit not in {0,1}");
    v = (v << 1) | bit;
  }
  return FieldElement{v, q};
}

inline BitVec element_to_bits(FieldElement e) {
  check_width(e.width);
  BitVec bits(static_cast<std::size_t>(e.width));
  for (int i = 0; i < e.width; ++i) {
    bits[static_cast<std::size_t>(i)] =
        static_cast<Bit>((e.value >> (e.width - 1 - i)) & 1u);
  }
  return bits;
}

}  // namespace wiretap
