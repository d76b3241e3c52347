#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "wiretap/gf2q.hpp"
#include "wiretap/rng.hpp"

using namespace wiretap;

namespace {

// Reference arithmetic, written independently of the library: carry-less
// polynomial multiplication followed by long division against the field
// polynomial (given here by its exponent list, x^q term included).
std::uint64_t ref_clmul(std::uint32_t a, std::uint32_t b) {
  std::uint64_t acc = 0;
  for (int i = 0; i < 32; ++i) {
    if ((b >> i) & 1u) acc ^= static_cast<std::uint64_t>(a) << i;
  }
  return acc;
}

std::uint32_t ref_poly(unsigned q) {
  auto bits = [](std::initializer_list<unsigned> exps) {
    std::uint32_t p = 0;
    for (unsigned e : exps) p |= 1u << e;
    return p;
  };
  switch (q) {
    case 2: return bits({2, 1, 0});
    case 3: return bits({3, 1, 0});
    case 4: return bits({4, 1, 0});
    case 5: return bits({5, 2, 0});
    case 6: return bits({6, 1, 0});
    case 7: return bits({7, 1, 0});
    case 8: return bits({8, 4, 3, 1, 0});
    case 9: return bits({9, 4, 0});
    case 10: return bits({10, 3, 0});
    case 11: return bits({11, 2, 0});
    case 12: return bits({12, 6, 4, 1, 0});
    case 13: return bits({13, 4, 3, 1, 0});
    case 14: return bits({14, 10, 6, 1, 0});
    case 15: return bits({15, 1, 0});
    case 16: return bits({16, 12, 3, 1, 0});
    default: FAIL("unsupported width"); return 0;
  }
}

std::uint32_t ref_mul(std::uint32_t a, std::uint32_t b, unsigned q) {
  std::uint64_t v = ref_clmul(a, b);
  const std::uint64_t poly = ref_poly(q);
  for (int d = 63; d >= static_cast<int>(q); --d) {
    if ((v >> d) & 1u) v ^= poly << (d - q);
  }
  return static_cast<std::uint32_t>(v);
}

std::uint32_t ref_inv(std::uint32_t a, unsigned q) {
  for (std::uint32_t b = 1; b < (1u << q); ++b) {
    if (ref_mul(a, b, q) == 1u) return b;
  }
  FAIL("no inverse found");
  return 0;
}

}  // namespace

TEST_CASE("multiplication matches the carry-less reference, exhaustively for small fields") {
  for (unsigned q = 2; q <= 4; ++q) {
    const std::uint32_t order = 1u << q;
    for (std::uint32_t a = 0; a < order; ++a) {
      for (std::uint32_t b = 0; b < order; ++b) {
        CAPTURE(q, a, b);
        REQUIRE(gf_mul_raw(a, b, q) == ref_mul(a, b, q));
      }
    }
  }
}

TEST_CASE("random multiplication agreement for q in [2,16]") {
  RngStream rng(2024);
  for (unsigned q = 2; q <= 16; ++q) {
    const std::uint64_t mask = (1u << q) - 1;
    for (int trial = 0; trial < 10000; ++trial) {
      const auto a = static_cast<std::uint32_t>(rng.next_u64() & mask);
      const auto b = static_cast<std::uint32_t>(rng.next_u64() & mask);
      CAPTURE(q, a, b);
      REQUIRE(gf_mul_raw(a, b, q) == ref_mul(a, b, q));
    }
  }
}

TEST_CASE("known products and inverses in the byte field") {
  REQUIRE(gf_mul_raw(0x53, 0xCA, 8) == 0x01);
  REQUIRE(gf_mul_raw(0x02, 0x03, 8) == 0x06);
  REQUIRE(gf_inv_raw(0x53, 8) == 0xCA);
  REQUIRE(gf_inv_raw(0x01, 8) == 0x01);

  const FieldElement a = make_element(0x53, 8);
  const FieldElement b = make_element(0xCA, 8);
  REQUIRE(gf_mul(a, b).value == 0x01);
  REQUIRE(gf_inv(a).value == 0xCA);
}

TEST_CASE("one is the multiplicative identity") {
  for (unsigned q : {2u, 4u, 8u, 12u, 16u}) {
    RngStream rng(17 + q);
    const std::uint64_t mask = (1u << q) - 1;
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = static_cast<std::uint32_t>(rng.next_u64() & mask);
      REQUIRE(gf_mul_raw(a, 1, q) == a);
      REQUIRE(gf_mul_raw(1, a, q) == a);
      REQUIRE(gf_mul_raw(a, 0, q) == 0);
    }
  }
}

TEST_CASE("inverses satisfy the defining property and match exhaustive search") {
  for (unsigned q = 2; q <= 8; ++q) {
    const std::uint32_t order = 1u << q;
    for (std::uint32_t a = 1; a < order; ++a) {
      CAPTURE(q, a);
      const std::uint32_t inv = gf_inv_raw(a, q);
      REQUIRE(gf_mul_raw(a, inv, q) == 1u);
      REQUIRE(inv == ref_inv(a, q));
    }
  }
}

TEST_CASE("each nonzero element has exactly one inverse") {
  for (unsigned q = 2; q <= 6; ++q) {
    const std::uint32_t order = 1u << q;
    for (std::uint32_t a = 1; a < order; ++a) {
      int hits = 0;
      for (std::uint32_t b = 1; b < order; ++b) {
        if (gf_mul_raw(a, b, q) == 1u) ++hits;
      }
      CAPTURE(q, a);
      REQUIRE(hits == 1);
    }
  }
}

TEST_CASE("zero has no inverse") {
  REQUIRE_THROWS_AS(gf_inv_raw(0, 8), non_invertible_error);
  REQUIRE_THROWS_AS(gf_inv(make_element(0, 4)), non_invertible_error);
}

TEST_CASE("field axioms hold exhaustively in small fields") {
  for (unsigned q = 2; q <= 4; ++q) {
    const std::uint32_t order = 1u << q;
    for (std::uint32_t a = 0; a < order; ++a) {
      for (std::uint32_t b = 0; b < order; ++b) {
        REQUIRE(gf_mul_raw(a, b, q) == gf_mul_raw(b, a, q));
        for (std::uint32_t c = 0; c < order; ++c) {
          REQUIRE(gf_mul_raw(gf_mul_raw(a, b, q), c, q) ==
                  gf_mul_raw(a, gf_mul_raw(b, c, q), q));
          REQUIRE(gf_mul_raw(a, b ^ c, q) ==
                  (gf_mul_raw(a, b, q) ^ gf_mul_raw(a, c, q)));
        }
      }
    }
  }
}

TEST_CASE("bit vectors convert MSB-first") {
  REQUIRE(bits_to_element({0, 0, 0, 0, 0, 0, 1, 1}).value == 0x03);
  REQUIRE(bits_to_element({0, 0, 0, 0, 0, 0, 1, 1}).width == 8);
  REQUIRE(bits_to_element({1, 0, 0, 0}).value == 0x08);

  const BitVec msb_bits = element_to_bits(make_element(0xA5, 8));
  REQUIRE(msb_bits == BitVec({1, 0, 1, 0, 0, 1, 0, 1}));
}

TEST_CASE("bit conversion round-trips exhaustively") {
  for (unsigned q = 2; q <= 8; ++q) {
    for (std::uint32_t v = 0; v < (1u << q); ++v) {
      const FieldElement e = make_element(v, q);
      REQUIRE(bits_to_element(element_to_bits(e)) == e);
    }
  }
}

TEST_CASE("invalid constructions are rejected") {
  REQUIRE_THROWS_AS(make_element(0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_element(0, 17), std::invalid_argument);
  REQUIRE_THROWS_AS(make_element(1u << 4, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(bits_to_element({0}), std::invalid_argument);
  REQUIRE_THROWS_AS(bits_to_element({0, 2, 0, 0}), std::invalid_argument);
  REQUIRE_THROWS_AS(gf_mul(make_element(1, 4), make_element(1, 8)),
                    std::invalid_argument);
}
