// Mutual-information neural estimation (Donsker-Varadhan lower bound) used to
// measure the leakage I(M; Z^n) toward the eavesdropper.
//
//   I(M;Z) >= sup_T  E_{p_MZ}[T] - log E_{p_M p_Z}[e^T]
//
// The critic T is a dense network scoring (message, observation) pairs; the
// marginal distribution is realized by permuting observations within a batch.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wiretap/nn.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

// Four hidden ReLU layers of 400 units and a linear scalar head. Input is the
// +/-1-encoded k-bit message concatenated with the n observation samples.
template <class Scalar = double>
DenseNetworkT<Scalar> make_mine_critic(int input_dim, RngStream& rng) {
  if (input_dim < 1) {
    throw std::invalid_argument("make_mine_critic: input_dim must be >= 1");
  }
  constexpr int kWidth = 400;
  DenseNetworkT<Scalar> critic;
  critic.layers.push_back(
      make_dense_layer<Scalar>(input_dim, kWidth, Activation::kRelu, rng));
  for (int i = 0; i < 3; ++i) {
    critic.layers.push_back(
        make_dense_layer<Scalar>(kWidth, kWidth, Activation::kRelu, rng));
  }
  critic.layers.push_back(
      make_dense_layer<Scalar>(kWidth, 1, Activation::kLinear, rng));
  return critic;
}

struct MineConfig {
  int epochs = 20;
  long samples_per_epoch = 200'000;
  int batch_size = 1000;
  LrSchedule schedule{1e-3, 0.95};
  double ema_rate = 0.99;        // baseline smoothing for the gradient only
  long eval_samples = 100'000;   // held-out samples for the final estimate
};

inline void validate(const MineConfig& c) {
  if (c.epochs < 1 || c.samples_per_epoch < 1 || c.batch_size < 1 ||
      c.eval_samples < 1) {
    throw std::invalid_argument("MineConfig: budgets must be positive");
  }
  if (c.samples_per_epoch % c.batch_size != 0) {
    throw std::invalid_argument("MineConfig: batch must divide samples");
  }
  if (!(c.schedule.base_lr > 0.0) || !(c.schedule.decay > 0.0) ||
      c.schedule.decay > 1.0) {
    throw std::invalid_argument("MineConfig: bad learning-rate schedule");
  }
  if (!(c.ema_rate > 0.0) || !(c.ema_rate < 1.0)) {
    throw std::invalid_argument("MineConfig: ema_rate must be in (0,1)");
  }
}

// mean(joint) - log mean exp(marginal), stabilized by max-subtraction.
inline double dv_objective(const Eigen::VectorXd& joint_scores,
                           const Eigen::VectorXd& marginal_scores) {
  if (joint_scores.size() == 0 || marginal_scores.size() == 0) {
    throw std::invalid_argument("dv_objective: empty score batch");
  }
  const double m = marginal_scores.maxCoeff();
  const double log_mean_exp =
      m + std::log((marginal_scores.array() - m).exp().mean());
  return joint_scores.mean() - log_mean_exp;
}

struct SamplePairs {
  Eigen::MatrixXd joint;     // (k+n) x B; column i = enc(m_i) || z_i
  Eigen::MatrixXd marginal;  // (k+n) x B; column i = enc(m_i) || z_{pi(i)}
};

// Message bits {0,1} are mapped to {-1,+1}; a fresh uniform permutation of
// the observations realizes the product distribution within the batch.
inline SamplePairs make_sample_pairs(const Eigen::MatrixXd& message_bits,
                                     const Eigen::MatrixXd& observations,
                                     RngStream& rng) {
  const Eigen::Index batch = message_bits.cols();
  if (observations.cols() != batch) {
    throw std::invalid_argument("make_sample_pairs: batch size mismatch");
  }
  const Eigen::Index k = message_bits.rows();
  const Eigen::Index n = observations.rows();

  std::vector<Eigen::Index> pi(static_cast<std::size_t>(batch));
  for (Eigen::Index i = 0; i < batch; ++i) pi[i] = i;
  for (Eigen::Index i = batch - 1; i > 0; --i) {
    std::swap(pi[i], pi[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }

  SamplePairs pairs;
  pairs.joint.resize(k + n, batch);
  pairs.marginal.resize(k + n, batch);
  const Eigen::MatrixXd encoded = 2.0 * message_bits.array() - 1.0;
  pairs.joint.topRows(k) = encoded;
  pairs.marginal.topRows(k) = encoded;
  pairs.joint.bottomRows(n) = observations;
  for (Eigen::Index i = 0; i < batch; ++i) {
    pairs.marginal.bottomRows(n).col(i) = observations.col(pi[i]);
  }
  return pairs;
}

struct MiEstimate {
  double value_nats = 0.0;
  double value_bits = 0.0;
  long sample_count = 0;
  double std_error_bits = 0.0;  // across evaluation batches
};

struct MineTrainReport {
  std::vector<double> epoch_objective_nats;  // uncorrected DV value
};

namespace detail {

inline void warn_dimensionality(Eigen::Index observation_dim) {
  if (observation_dim > 16) {
    std::cerr << "mine: warning: observation dimension "
              << observation_dim
              << " exceeds the validated regime (n <= 16); estimates may be "
                 "unreliable\n";
  }
}

template <class Scalar>
void accumulate(GradientsT<Scalar>& into, const GradientsT<Scalar>& from) {
  for (std::size_t i = 0; i < into.layers.size(); ++i) {
    into.layers[i].weights += from.layers[i].weights;
    into.layers[i].bias += from.layers[i].bias;
  }
}

}  // namespace detail

// Maximizes the DV objective with Adam. The gradient of the log-denominator
// term uses an exponential moving average of mean(exp(marginal scores)) as
// its baseline, which debiases the stochastic gradient; the REPORTED
// objective stays the plain batch DV value. Source must provide
// (message_bits k x B, observations n x B) for a requested batch size.
template <class Scalar, class Source>
MineTrainReport train_mine(DenseNetworkT<Scalar>& critic, Source&& source,
                           const MineConfig& config, RngStream& rng) {
  validate(config);
  const long batches_per_epoch = config.samples_per_epoch / config.batch_size;
  auto adam = make_adam_state(critic);
  MineTrainReport report;
  report.epoch_objective_nats.reserve(static_cast<std::size_t>(config.epochs));

  double log_ema = 0.0;
  bool ema_ready = false;
  bool dim_checked = false;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto lr = static_cast<Scalar>(config.schedule.lr(epoch));
    double objective_sum = 0.0;
    for (long b = 0; b < batches_per_epoch; ++b) {
      const auto [bits, obs] = source(config.batch_size, rng);
      if (!dim_checked) {
        detail::warn_dimensionality(obs.rows());
        dim_checked = true;
      }
      const SamplePairs pairs = make_sample_pairs(bits, obs, rng);
      auto joint_pass =
          forward(critic, pairs.joint.template cast<Scalar>().eval());
      auto marg_pass =
          forward(critic, pairs.marginal.template cast<Scalar>().eval());
      const Eigen::VectorXd tj =
          joint_pass.output().row(0).transpose().template cast<double>();
      const Eigen::VectorXd tm =
          marg_pass.output().row(0).transpose().template cast<double>();
      objective_sum += dv_objective(tj, tm);

      const double m = tm.maxCoeff();
      const double log_mean_exp = m + std::log((tm.array() - m).exp().mean());
      if (!ema_ready) {
        log_ema = log_mean_exp;
        ema_ready = true;
      } else {
        // log( r e^{log_ema} + (1-r) e^{log_mean_exp} ), computed stably.
        const double a = std::log(config.ema_rate) + log_ema;
        const double c = std::log1p(-config.ema_rate) + log_mean_exp;
        const double hi = std::max(a, c);
        log_ema = hi + std::log(std::exp(a - hi) + std::exp(c - hi));
      }

      // Descent on -objective: d/dT_joint = -1/B, and with the EMA baseline
      // d/dT_marg_i = exp(T_i - log_ema)/B.
      const double inv_b = 1.0 / static_cast<double>(config.batch_size);
      MatrixX<Scalar> joint_grad =
          MatrixX<Scalar>::Constant(1, config.batch_size,
                                    static_cast<Scalar>(-inv_b));
      MatrixX<Scalar> marg_grad(1, config.batch_size);
      for (Eigen::Index i = 0; i < tm.size(); ++i) {
        marg_grad(0, i) =
            static_cast<Scalar>(std::exp(tm(i) - log_ema) * inv_b);
      }
      auto grads = backward(critic, joint_pass, joint_grad);
      detail::accumulate(grads, backward(critic, marg_pass, marg_grad));
      adam_step(critic, grads, adam, lr);
    }
    const double epoch_objective =
        objective_sum / static_cast<double>(batches_per_epoch);
    if (!std::isfinite(epoch_objective)) {
      throw TrainingError("train_mine: objective diverged at epoch " +
                          std::to_string(epoch));
    }
    report.epoch_objective_nats.push_back(epoch_objective);
  }
  return report;
}

// Held-out DV estimate: per-batch values averaged, spread across batches
// reported as the standard error.
template <class Scalar, class Source>
MiEstimate estimate_mi(const DenseNetworkT<Scalar>& critic, Source&& source,
                       long eval_samples, int batch_size, RngStream& rng) {
  if (eval_samples < 10'000) {
    throw std::invalid_argument(
        "estimate_mi: need at least 10^4 evaluation samples");
  }
  if (batch_size < 2 || eval_samples % batch_size != 0) {
    throw std::invalid_argument(
        "estimate_mi: batch must be >= 2 and divide eval_samples");
  }
  const long batches = eval_samples / batch_size;
  std::vector<double> values(static_cast<std::size_t>(batches));
  for (long b = 0; b < batches; ++b) {
    const auto [bits, obs] = source(batch_size, rng);
    const SamplePairs pairs = make_sample_pairs(bits, obs, rng);
    const Eigen::VectorXd tj =
        forward(critic, pairs.joint.template cast<Scalar>().eval())
            .output().row(0).transpose().template cast<double>();
    const Eigen::VectorXd tm =
        forward(critic, pairs.marginal.template cast<Scalar>().eval())
            .output().row(0).transpose().template cast<double>();
    values[static_cast<std::size_t>(b)] = dv_objective(tj, tm);
  }
  MiEstimate estimate;
  estimate.sample_count = eval_samples;
  double sum = 0.0;
  for (double v : values) sum += v;
  estimate.value_nats = sum / static_cast<double>(batches);
  estimate.value_bits = estimate.value_nats / std::numbers::ln2;
  if (batches > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double d = v - estimate.value_nats;
      ss += d * d;
    }
    const double var_nats = ss / static_cast<double>(batches - 1);
    estimate.std_error_bits = std::sqrt(var_nats / batches) / std::numbers::ln2;
  }
  return estimate;
}

}  // namespace wiretap
