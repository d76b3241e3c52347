// Seed-dispersion study: quantize encoder outputs onto an l-ary alphabet and
// compare Hamming/Lee distance histograms across every security-layer seed.
// If the histograms agree, no seed produces systematically closer codeword
// pairs than another, i.e. seed choice does not weaken the code geometry.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "wiretap/reliability.hpp"
#include "wiretap/seclayer.hpp"

namespace wiretap {

struct Quantizer {
  int levels = 16;
  double lo = -1.0;
  double hi = 1.0;
};

inline void validate(const Quantizer& q) {
  if (q.levels < 2) throw std::invalid_argument("Quantizer: levels must be >= 2");
  if (!(q.hi > q.lo)) throw std::invalid_argument("Quantizer: need hi > lo");
}

// Uniform mid-rise quantization: clip to [lo, hi], index by bin, and fold the
// x == hi edge into the top bin.
inline std::vector<int> quantize(const Quantizer& q,
                                 const Eigen::VectorXd& x) {
  validate(q);
  std::vector<int> symbols(static_cast<std::size_t>(x.size()));
  const double scale = static_cast<double>(q.levels) / (q.hi - q.lo);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double clipped = std::clamp(x(i), q.lo, q.hi);
    const int idx = static_cast<int>(std::floor((clipped - q.lo) * scale));
    symbols[static_cast<std::size_t>(i)] = std::min(idx, q.levels - 1);
  }
  return symbols;
}

inline int hamming_distance(const std::vector<int>& u,
                            const std::vector<int>& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("hamming_distance: length mismatch");
  }
  int d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d += (u[i] != v[i]) ? 1 : 0;
  return d;
}

// d_L = sum_i min(|u_i - v_i|, l - |u_i - v_i|) over the l-ary alphabet.
inline int lee_distance(const std::vector<int>& u, const std::vector<int>& v,
                        int l) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("lee_distance: length mismatch");
  }
  if (l < 2) throw std::invalid_argument("lee_distance: alphabet too small");
  int d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0 || u[i] >= l || v[i] < 0 || v[i] >= l) {
      throw std::invalid_argument("lee_distance: symbol outside alphabet");
    }
    const int diff = std::abs(u[i] - v[i]);
    d += std::min(diff, l - diff);
  }
  return d;
}

enum class DistanceMetric { kHamming, kLee };

struct DistanceHistogram {
  DistanceMetric metric = DistanceMetric::kHamming;
  std::vector<long> counts;  // index = integer distance
  long total = 0;

  void add(int distance) {
    if (distance < 0 || distance >= static_cast<int>(counts.size())) {
      throw std::out_of_range("DistanceHistogram: distance outside support");
    }
    ++counts[static_cast<std::size_t>(distance)];
    ++total;
  }
};

// Total-variation distance between the normalized histograms, in [0, 1].
inline double histogram_distance(const DistanceHistogram& h1,
                                 const DistanceHistogram& h2) {
  if (h1.metric != h2.metric) {
    throw std::invalid_argument("histogram_distance: metric mismatch");
  }
  if (h1.total < 1 || h2.total < 1) {
    throw std::invalid_argument("histogram_distance: empty histogram");
  }
  const std::size_t bins = std::max(h1.counts.size(), h2.counts.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double p1 = i < h1.counts.size()
                          ? static_cast<double>(h1.counts[i]) / h1.total
                          : 0.0;
    const double p2 = i < h2.counts.size()
                          ? static_cast<double>(h2.counts[i]) / h2.total
                          : 0.0;
    tv += std::abs(p1 - p2);
  }
  return 0.5 * tv;
}

struct SeedDispersion {
  std::uint32_t seed = 0;
  DistanceHistogram hamming;
  DistanceHistogram lee;
};

// For every seed s in [1, 2^q): enumerate all ordered secret-message pairs
// m1 != m2 and every randomization string b, quantize both encodings with one
// global quantizer (range = codebook min/max), and histogram both distances.
// Enumeration order is fixed, so results are reproducible bit-for-bit.
template <class Scalar>
std::vector<SeedDispersion> seed_dispersion(
    const AutoencoderModelT<Scalar>& model, int levels = 16) {
  validate(model.params);
  const int k = model.params.secret_bits;
  const int q = model.params.total_bits;
  const int n = model.params.block_length;
  const int words = model.params.word_count();

  const Eigen::MatrixXd cb = codebook(model).template cast<double>();
  const Quantizer quantizer{levels, cb.minCoeff(), cb.maxCoeff()};
  std::vector<std::vector<int>> symbols(static_cast<std::size_t>(words));
  for (int w = 0; w < words; ++w) {
    symbols[static_cast<std::size_t>(w)] = quantize(quantizer, cb.col(w));
  }

  const int hamming_bins = n + 1;
  const int lee_bins = n * (levels / 2) + 1;
  std::vector<SeedDispersion> result;
  result.reserve(static_cast<std::size_t>(words - 1));
  for (std::uint32_t s = 1; s < static_cast<std::uint32_t>(words); ++s) {
    SeedDispersion entry;
    entry.seed = s;
    entry.hamming = {DistanceMetric::kHamming,
                     std::vector<long>(hamming_bins, 0), 0};
    entry.lee = {DistanceMetric::kLee, std::vector<long>(lee_bins, 0), 0};
    const std::uint32_t seed_inv = gf_inv_raw(s, q);
    for (std::uint32_t m1 = 0; m1 < (1u << k); ++m1) {
      for (std::uint32_t m2 = 0; m2 < (1u << k); ++m2) {
        if (m1 == m2) continue;
        for (std::uint32_t b = 0; b < (1u << (q - k)); ++b) {
          const auto& u =
              symbols[encode_secure_index(m1, b, seed_inv, k, q)];
          const auto& v =
              symbols[encode_secure_index(m2, b, seed_inv, k, q)];
          entry.hamming.add(hamming_distance(u, v));
          entry.lee.add(lee_distance(u, v, levels));
        }
      }
    }
    result.push_back(std::move(entry));
  }
  return result;
}

}  // namespace wiretap
