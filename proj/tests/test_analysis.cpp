#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "wiretap/analysis.hpp"
#include "wiretap/rng.hpp"

using namespace wiretap;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<int> random_word(RngStream& rng, int len, int levels) {
  std::vector<int> w(static_cast<std::size_t>(len));
  for (auto& s : w) s = static_cast<int>(rng.below(levels));
  return w;
}

}  // namespace

TEST_CASE("quantization maps the range onto l levels") {
  const Quantizer q{16, 0.0, 16.0};
  Eigen::VectorXd x(4);
  x << 0.5, 15.5, 0.0, 16.0;
  const std::vector<int> symbols = quantize(q, x);
  REQUIRE(symbols == std::vector<int>({0, 15, 0, 15}));

  const Quantizer sym{4, -1.0, 1.0};
  Eigen::VectorXd y(6);
  y << -1.0, -0.51, -0.49, 0.49, 0.51, 1.0;
  REQUIRE(quantize(sym, y) == std::vector<int>({0, 0, 1, 2, 3, 3}));

  // Out-of-range values clip to the extreme bins.
  Eigen::VectorXd z(2);
  z << -100.0, 100.0;
  REQUIRE(quantize(sym, z) == std::vector<int>({0, 3}));

  REQUIRE_THROWS_AS(quantize(Quantizer{1, 0.0, 1.0}, x), std::invalid_argument);
  REQUIRE_THROWS_AS(quantize(Quantizer{4, 1.0, 1.0}, x), std::invalid_argument);
}

TEST_CASE("quantization is monotone") {
  RngStream rng(81);
  const Quantizer q{16, -2.0, 2.0};
  Eigen::VectorXd x(200);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-2.5, 2.5);
  std::sort(x.data(), x.data() + x.size());
  const std::vector<int> symbols = quantize(q, x);
  for (std::size_t i = 1; i < symbols.size(); ++i) {
    REQUIRE(symbols[i] >= symbols[i - 1]);
  }
}

TEST_CASE("hamming and lee distances evaluate known pairs") {
  REQUIRE(hamming_distance({0, 1, 2}, {0, 2, 2}) == 1);
  REQUIRE(hamming_distance({5, 5}, {5, 5}) == 0);

  // Lee distance wraps around the alphabet ring.
  REQUIRE(lee_distance({0}, {15}, 16) == 1);
  REQUIRE(lee_distance({3, 10}, {7, 2}, 16) == 4 + 8);
  REQUIRE(lee_distance({0, 8}, {8, 0}, 16) == 16);
  REQUIRE(lee_distance({1, 1, 1}, {1, 1, 1}, 4) == 0);

  REQUIRE_THROWS_AS(hamming_distance({1}, {1, 2}), std::invalid_argument);
  REQUIRE_THROWS_AS(lee_distance({1}, {1, 2}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(lee_distance({4}, {0}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(lee_distance({-1}, {0}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(lee_distance({0}, {0}, 1), std::invalid_argument);
}

TEST_CASE("both distances are metrics and lee dominates hamming") {
  RngStream rng(82);
  const int levels = 16, len = 8;
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_word(rng, len, levels);
    const auto b = random_word(rng, len, levels);
    const auto c = random_word(rng, len, levels);

    REQUIRE(hamming_distance(a, a) == 0);
    REQUIRE(lee_distance(a, a, levels) == 0);
    REQUIRE(hamming_distance(a, b) == hamming_distance(b, a));
    REQUIRE(lee_distance(a, b, levels) == lee_distance(b, a, levels));
    REQUIRE(hamming_distance(a, c) <=
            hamming_distance(a, b) + hamming_distance(b, c));
    REQUIRE(lee_distance(a, c, levels) <=
            lee_distance(a, b, levels) + lee_distance(b, c, levels));
    // Every differing coordinate contributes at least 1 to the Lee sum.
    REQUIRE(lee_distance(a, b, levels) >= hamming_distance(a, b));
    REQUIRE(lee_distance(a, b, levels) <= len * (levels / 2));
  }
}

TEST_CASE("histogram total variation on known distributions") {
  DistanceHistogram h1{DistanceMetric::kHamming, {2, 2}, 4};
  DistanceHistogram h2{DistanceMetric::kHamming, {4, 0}, 4};
  REQUIRE_THAT(histogram_distance(h1, h2), WithinAbs(0.5, 1e-15));
  REQUIRE(histogram_distance(h1, h1) == 0.0);

  // Disjoint supports are maximally separated.
  DistanceHistogram h3{DistanceMetric::kHamming, {6, 0, 0}, 6};
  DistanceHistogram h4{DistanceMetric::kHamming, {0, 0, 3}, 3};
  REQUIRE_THAT(histogram_distance(h3, h4), WithinAbs(1.0, 1e-15));

  // Differing bin counts are padded with zeros, not rejected.
  DistanceHistogram h5{DistanceMetric::kHamming, {3, 3}, 6};
  DistanceHistogram h6{DistanceMetric::kHamming, {3, 3, 0, 0}, 6};
  REQUIRE(histogram_distance(h5, h6) == 0.0);

  DistanceHistogram lee{DistanceMetric::kLee, {1}, 1};
  REQUIRE_THROWS_AS(histogram_distance(h1, lee), std::invalid_argument);
  DistanceHistogram empty{DistanceMetric::kHamming, {0, 0}, 0};
  REQUIRE_THROWS_AS(histogram_distance(h1, empty), std::invalid_argument);
}

TEST_CASE("histograms reject distances outside their support") {
  DistanceHistogram h{DistanceMetric::kHamming, std::vector<long>(3, 0), 0};
  h.add(0);
  h.add(2);
  REQUIRE(h.total == 2);
  REQUIRE_THROWS_AS(h.add(3), std::out_of_range);
  REQUIRE_THROWS_AS(h.add(-1), std::out_of_range);
}

TEST_CASE("seed dispersion enumerates every seed and pair") {
  RngStream rng(83);
  const AutoencoderModel model = make_autoencoder(CodeParams{8, 2, 4}, rng);
  const int levels = 16;
  const std::vector<SeedDispersion> dispersion = seed_dispersion(model, levels);

  REQUIRE(dispersion.size() == 15);  // seeds 1..2^q-1
  // Ordered pairs m1 != m2 times all randomization strings:
  // 4 * 3 * 4 = 48 pairs per seed.
  for (const auto& entry : dispersion) {
    REQUIRE(entry.seed >= 1);
    REQUIRE(entry.seed <= 15);
    REQUIRE(entry.hamming.total == 48);
    REQUIRE(entry.lee.total == 48);
    REQUIRE(entry.hamming.counts.size() == 9);             // 0..n
    REQUIRE(entry.lee.counts.size() == 8 * (levels / 2) + 1);
    long hamming_sum = 0, lee_sum = 0;
    for (long c : entry.hamming.counts) hamming_sum += c;
    for (long c : entry.lee.counts) lee_sum += c;
    REQUIRE(hamming_sum == 48);
    REQUIRE(lee_sum == 48);
    // Distinct messages under the same b give distinct words, and an
    // untrained encoder separates all words, so zero distance cannot occur
    // in the Hamming histogram unless quantization collapses codewords --
    // astronomically unlikely for random weights.
    REQUIRE(entry.hamming.counts[0] == 0);
  }

  // Deterministic: a second enumeration reproduces identical histograms.
  const std::vector<SeedDispersion> again = seed_dispersion(model, levels);
  for (std::size_t i = 0; i < dispersion.size(); ++i) {
    REQUIRE(dispersion[i].seed == again[i].seed);
    REQUIRE(dispersion[i].hamming.counts == again[i].hamming.counts);
    REQUIRE(dispersion[i].lee.counts == again[i].lee.counts);
  }
}

TEST_CASE("seed dispersion pair count matches the closed form at full scale") {
  // k=4, q=8: 16*15 ordered message pairs times 16 paddings = 3840 per seed.
  RngStream rng(84);
  const AutoencoderModel model = make_autoencoder(CodeParams{16, 4, 8}, rng);
  const std::vector<SeedDispersion> dispersion = seed_dispersion(model);
  REQUIRE(dispersion.size() == 255);
  REQUIRE(dispersion.front().hamming.total == 3840);
  REQUIRE(dispersion.back().lee.total == 3840);
}
