#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "wiretap/mine.hpp"

using namespace wiretap;
using Catch::Matchers::WithinAbs;

namespace {

// Source with I(M;Z) = k bits: the observation is the +/-1 encoding itself.
auto identity_source(int k) {
  return [k](int batch, RngStream& rng) {
    Eigen::MatrixXd bits(k, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < k; ++i) bits(i, j) = static_cast<double>(rng.bits(1));
    }
    Eigen::MatrixXd obs = 2.0 * bits.array() - 1.0;
    return std::make_pair(bits, obs);
  };
}

// Independent source: observations carry no message information.
auto noise_source(int k, int n) {
  return [k, n](int batch, RngStream& rng) {
    Eigen::MatrixXd bits(k, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < k; ++i) bits(i, j) = static_cast<double>(rng.bits(1));
    }
    Eigen::MatrixXd obs(n, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < n; ++i) obs(i, j) = rng.normal();
    }
    return std::make_pair(bits, obs);
  };
}

MineConfig small_budget() {
  MineConfig config;
  config.epochs = 6;
  config.samples_per_epoch = 24000;
  config.batch_size = 500;
  config.eval_samples = 10000;
  return config;
}

}  // namespace

TEST_CASE("the DV objective evaluates exact cases") {
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(8);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(8);
  // Identical constant scores: mean(c) - log mean exp(c) = c - c = 0.
  REQUIRE(dv_objective(ones, ones) == 0.0);
  REQUIRE(dv_objective(zeros, zeros) == 0.0);
  // Constant separation of 1 nat.
  REQUIRE_THAT(dv_objective(ones, zeros), WithinAbs(1.0, 1e-15));

  REQUIRE_THROWS_AS(dv_objective(Eigen::VectorXd(), ones), std::invalid_argument);
  REQUIRE_THROWS_AS(dv_objective(ones, Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("the DV objective matches a long-double reference") {
  RngStream rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const int b = 2 + static_cast<int>(rng.below(64));
    Eigen::VectorXd tj(b), tm(b);
    for (int i = 0; i < b; ++i) {
      tj(i) = rng.normal(0.0, 2.0);
      tm(i) = rng.normal(0.0, 2.0);
    }
    long double mean_j = 0.0L, mean_exp = 0.0L;
    for (int i = 0; i < b; ++i) {
      mean_j += static_cast<long double>(tj(i));
      mean_exp += std::exp(static_cast<long double>(tm(i)));
    }
    mean_j /= b;
    mean_exp /= b;
    const double want = static_cast<double>(mean_j - std::log(mean_exp));
    REQUIRE_THAT(dv_objective(tj, tm), WithinAbs(want, 1e-10));
  }
}

TEST_CASE("the DV objective survives extreme scores") {
  Eigen::VectorXd tj = Eigen::VectorXd::Constant(4, 800.0);
  Eigen::VectorXd tm = Eigen::VectorXd::Constant(4, 750.0);
  tm(2) = 800.0;  // naive exp() of any of these overflows
  const double value = dv_objective(tj, tm);
  REQUIRE(std::isfinite(value));

  // Shifting all marginal scores by c shifts the objective by exactly -c.
  const Eigen::VectorXd shifted = tm.array() + 5.0;
  REQUIRE_THAT(dv_objective(tj, shifted), WithinAbs(value - 5.0, 1e-9));
}

TEST_CASE("sample pairs encode messages as +/-1 and permute within the batch") {
  RngStream rng(62);
  const int k = 3, n = 4, batch = 32;
  Eigen::MatrixXd bits(k, batch);
  for (int j = 0; j < batch; ++j) {
    for (int i = 0; i < k; ++i) bits(i, j) = static_cast<double>(rng.bits(1));
  }
  Eigen::MatrixXd obs(n, batch);
  for (int j = 0; j < batch; ++j) {
    for (int i = 0; i < n; ++i) obs(i, j) = rng.normal();
  }

  const SamplePairs pairs = make_sample_pairs(bits, obs, rng);
  REQUIRE(pairs.joint.rows() == k + n);
  REQUIRE(pairs.joint.cols() == batch);
  REQUIRE(pairs.marginal.rows() == k + n);

  REQUIRE((pairs.joint.topRows(k) - (2.0 * bits.array() - 1.0).matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE((pairs.marginal.topRows(k) - pairs.joint.topRows(k))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE((pairs.joint.bottomRows(n) - obs).cwiseAbs().maxCoeff() == 0.0);

  // The marginal observations are the same columns, permuted: every original
  // column appears exactly once (continuous values, so matches are unique).
  std::vector<bool> used(batch, false);
  for (int j = 0; j < batch; ++j) {
    int match = -1;
    for (int c = 0; c < batch; ++c) {
      if ((pairs.marginal.bottomRows(n).col(j) - obs.col(c)).cwiseAbs().maxCoeff() ==
          0.0) {
        match = c;
        break;
      }
    }
    REQUIRE(match >= 0);
    REQUIRE_FALSE(used[match]);
    used[match] = true;
  }

  REQUIRE_THROWS_AS(
      make_sample_pairs(bits, Eigen::MatrixXd::Zero(n, batch + 1), rng),
      std::invalid_argument);
}

TEST_CASE("within-batch permutations are roughly uniform") {
  RngStream rng(63);
  const Eigen::MatrixXd bits = Eigen::MatrixXd::Zero(1, 3);
  Eigen::MatrixXd obs(1, 3);
  obs << 0.0, 1.0, 2.0;
  std::map<std::array<int, 3>, int> counts;
  const int reps = 1200;
  for (int r = 0; r < reps; ++r) {
    const SamplePairs pairs = make_sample_pairs(bits, obs, rng);
    std::array<int, 3> perm{};
    for (int j = 0; j < 3; ++j) {
      perm[j] = static_cast<int>(std::lround(pairs.marginal(1, j)));
    }
    counts[perm] += 1;
  }
  REQUIRE(counts.size() == 6);
  for (const auto& [perm, count] : counts) {
    REQUIRE(count > reps / 6 - 80);
    REQUIRE(count < reps / 6 + 80);
  }
}

TEST_CASE("the critic follows the published architecture") {
  RngStream rng(64);
  const DenseNetwork critic = make_mine_critic(20, rng);
  REQUIRE(critic.layers.size() == 5);
  REQUIRE(critic.input_dim() == 20);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(critic.layers[i].out_dim() == 400);
    REQUIRE(critic.layers[i].activation == Activation::kRelu);
  }
  REQUIRE(critic.layers[4].out_dim() == 1);
  REQUIRE(critic.layers[4].activation == Activation::kLinear);
  REQUIRE_THROWS_AS(make_mine_critic(0, rng), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent budgets") {
  MineConfig c = small_budget();
  REQUIRE_NOTHROW(validate(c));
  c.samples_per_epoch = 24001;  // not a batch multiple
  REQUIRE_THROWS_AS(validate(c), std::invalid_argument);
  c = small_budget();
  c.ema_rate = 1.0;
  REQUIRE_THROWS_AS(validate(c), std::invalid_argument);
  c = small_budget();
  c.schedule.decay = 1.5;
  REQUIRE_THROWS_AS(validate(c), std::invalid_argument);
  c = small_budget();
  c.epochs = 0;
  REQUIRE_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("estimate_mi enforces its sampling contract") {
  RngStream rng(65);
  const DenseNetwork critic = make_mine_critic(4, rng);
  auto source = noise_source(2, 2);
  REQUIRE_THROWS_AS(estimate_mi(critic, source, 5000, 500, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimate_mi(critic, source, 10000, 1, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimate_mi(critic, source, 10000, 300, rng),
                    std::invalid_argument);

  const MiEstimate est = estimate_mi(critic, source, 10000, 500, rng);
  REQUIRE(est.sample_count == 10000);
  REQUIRE_THAT(est.value_bits,
               WithinAbs(est.value_nats / std::numbers::ln2, 1e-15));
  REQUIRE(est.std_error_bits > 0.0);
}

TEST_CASE("training recovers full dependence within the entropy ceiling") {
  const int k = 2;
  RngStream rng(66);
  DenseNetwork critic = make_mine_critic(2 * k, rng);
  auto source = identity_source(k);

  const MineConfig config = small_budget();
  const MineTrainReport report = train_mine(critic, source, config, rng);
  REQUIRE(report.epoch_objective_nats.size() ==
          static_cast<std::size_t>(config.epochs));
  REQUIRE(report.epoch_objective_nats.back() >
          report.epoch_objective_nats.front());

  const MiEstimate est =
      estimate_mi(critic, source, config.eval_samples, config.batch_size, rng);
  CAPTURE(est.value_bits, est.std_error_bits);
  REQUIRE(est.value_bits >= 1.8);
  REQUIRE(est.value_bits <= 2.0 + 0.1);

  // A second held-out evaluation must agree within sampling error.
  const MiEstimate again =
      estimate_mi(critic, source, config.eval_samples, config.batch_size, rng);
  const double spread = 3.0 * std::hypot(est.std_error_bits, again.std_error_bits);
  REQUIRE(std::abs(again.value_bits - est.value_bits) <= spread);
}

TEST_CASE("independent observations give an estimate near zero") {
  const int k = 2, n = 4;
  RngStream rng(67);
  DenseNetwork critic = make_mine_critic(k + n, rng);
  auto source = noise_source(k, n);

  const MineConfig config = small_budget();
  train_mine(critic, source, config, rng);
  const MiEstimate est =
      estimate_mi(critic, source, config.eval_samples, config.batch_size, rng);
  CAPTURE(est.value_bits, est.std_error_bits);
  REQUIRE(est.value_bits >= -0.02);
  REQUIRE(est.value_bits <= 0.05);
}

TEST_CASE("high-dimensional observations trigger a warning") {
  const int k = 2, n = 17;
  RngStream rng(68);
  DenseNetwork critic = make_mine_critic(k + n, rng);
  auto source = noise_source(k, n);

  MineConfig config;
  config.epochs = 1;
  config.samples_per_epoch = 1000;
  config.batch_size = 500;
  config.eval_samples = 10000;

  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  train_mine(critic, source, config, rng);
  std::cerr.rdbuf(old);
  REQUIRE(captured.str().find("exceeds the validated regime") !=
          std::string::npos);
}
