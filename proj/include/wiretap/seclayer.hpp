// Seeded hash security layer.
//
// The encoder-side preimage map phi_s turns a secret message m (k bits) and
// fresh randomization bits b (q-k bits) into the q-bit word s^{-1} * (m||b)
// in GF(2^q); the decoder-side hash psi_s multiplies by s and keeps the k
// most significant bits. The map family {psi_s : s != 0} is 2-universal.

#pragma once

#include <stdexcept>

#include "wiretap/gf2q.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

using SecretMessage = BitVec;      // length k
using RandomizationBits = BitVec;  // length q - k
using RandomizedWord = BitVec;     // length q

struct Seed {
  FieldElement element;
};

// Seeds come from S = {0,1}^q \ {0}; zero is rejected here.
inline Seed make_seed(std::uint32_t value, int q) {
  if (value == 0) throw non_invertible_error();
  return Seed{make_element(value, q)};
}

// phi_s: (m, b) -> s^{-1} * (m||b), with m in the k most significant bits.
inline RandomizedWord encode_secure(const SecretMessage& m,
                                    const RandomizationBits& b, Seed s) {
  const int q = s.element.width;
  if (static_cast<int>(m.size() + b.size()) != q) {
    throw std::invalid_argument("encode_secure: |m| + |b| must equal q");
  }
  BitVec concat = m;
  concat.insert(concat.end(), b.begin(), b.end());
  const FieldElement word = bits_to_element(concat);
  return element_to_bits(gf_mul(gf_inv(s.element), word));
}

// psi_s: v -> the k most significant bits of s * v.
inline SecretMessage decode_secure(const RandomizedWord& v, Seed s, int k) {
  const int q = s.element.width;
  if (static_cast<int>(v.size()) != q) {
    throw std::invalid_argument("decode_secure: |v| must equal q");
  }
  if (k < 1 || k >= q) {
    throw std::invalid_argument("decode_secure: require 1 <= k < q");
  }
  if (s.element.value == 0) throw non_invertible_error();
  const BitVec hashed = element_to_bits(gf_mul(s.element, bits_to_element(v)));
  return SecretMessage(hashed.begin(), hashed.begin() + k);
}

// i.i.d. uniform bits; RNG state is caller-owned.
inline RandomizationBits sample_randomization(RngStream& rng, int length) {
  if (length < 0) throw std::invalid_argument("sample_randomization: length < 0");
  RandomizationBits bits(static_cast<std::size_t>(length));
  for (auto& bit : bits) bit = static_cast<Bit>(rng.next_u64() >> 63);
  return bits;
}

// Integer fast paths used by the Monte-Carlo loops; m occupies the high k
// bits of the q-bit word, matching encode_secure/decode_secure bit order.
inline std::uint32_t encode_secure_index(std::uint32_t m, std::uint32_t b,
                                         std::uint32_t seed_inv, int k, int q) {
  return gf_mul_raw(seed_inv, (m << (q - k)) | b, q);
}

inline std::uint32_t decode_secure_index(std::uint32_t v, std::uint32_t seed,
                                         int k, int q) {
  return gf_mul_raw(seed, v, q) >> (q - k);
}

}  // namespace wiretap
