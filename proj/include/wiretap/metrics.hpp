// System-level metrics for the composed wiretap code: Monte-Carlo block error
// rate over the legitimate channel, MINE leakage over the eavesdropper
// channel, and the equivocation rate derived from both.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/mine.hpp"
#include "wiretap/reliability.hpp"
#include "wiretap/rng.hpp"
#include "wiretap/seclayer.hpp"

namespace wiretap {

struct ChannelSpec {
  FadingProfile fading;
  NoiseSpec noise;
};

template <class Scalar>
struct WiretapSystemT {
  CodeParams params;
  Seed seed;
  AutoencoderModelT<Scalar> autoencoder;
  ChannelSpec bob_channel;
  ChannelSpec eve_channel;
};

using WiretapSystem = WiretapSystemT<double>;

template <class Scalar>
void validate(const WiretapSystemT<Scalar>& system) {
  validate(system.params);
  if (system.seed.element.width != system.params.total_bits ||
      system.seed.element.value == 0) {
    throw std::invalid_argument("system seed does not match q or is zero");
  }
  if (system.autoencoder.params.block_length != system.params.block_length ||
      system.autoencoder.params.total_bits != system.params.total_bits) {
    throw std::invalid_argument("autoencoder dimensions disagree with params");
  }
  const double rate = system.params.reliability_rate();
  if (std::abs(system.bob_channel.noise.rate - rate) > 1e-12 ||
      std::abs(system.eve_channel.noise.rate - rate) > 1e-12) {
    throw std::invalid_argument(
        "channel noise rate must equal the reliability rate q/n");
  }
}

// m -> phi_s -> autoencoder; the codeword Bob and Eve both receive.
template <class Scalar>
VectorX<Scalar> full_encode(const WiretapSystemT<Scalar>& system,
                            const SecretMessage& m,
                            const RandomizationBits& b) {
  return encode_message(system.autoencoder,
                        encode_secure(m, b, system.seed));
}

// received block -> autoencoder decoder -> psi_s -> secret message estimate.
template <class Scalar>
SecretMessage full_decode(const WiretapSystemT<Scalar>& system,
                          const VectorX<Scalar>& y) {
  return decode_secure(decode_observation(system.autoencoder, y), system.seed,
                       system.params.secret_bits);
}

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(long successes, long trials,
                                                 double z = 1.959963984540054) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: bad counts");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct BlerResult {
  long error_count = 0;  // secret-message errors, Pr[M-hat != M]
  long trials = 0;
  double p_e = 0.0;
  double ci_low = 0.0;   // Wilson 95%
  double ci_high = 0.0;
  long word_error_count = 0;  // reliability-layer diagnostic, Pr[V-hat != V]
  double word_p_e = 0.0;
};

// Fresh secret message, randomization bits, fading and noise every trial;
// errors are counted on the decoded secret message. The raw q-bit word error
// count is kept alongside as a diagnostic of the reliability layer alone.
template <class Scalar>
BlerResult estimate_bler(const WiretapSystemT<Scalar>& system, long trials,
                         RngStream& rng, int batch_size = 1000) {
  validate(system);
  if (trials < 1) throw std::invalid_argument("estimate_bler: trials < 1");
  if (batch_size < 1) throw std::invalid_argument("estimate_bler: bad batch");
  const int k = system.params.secret_bits;
  const int q = system.params.total_bits;
  const std::uint32_t seed_value = system.seed.element.value;
  const std::uint32_t seed_inv = gf_inv(system.seed.element).value;
  const MatrixX<Scalar> cb = codebook(system.autoencoder);
  const double sigma = std::sqrt(noise_variance(system.bob_channel.noise));

  BlerResult result;
  result.trials = trials;
  std::vector<std::uint32_t> msgs, words;
  for (long done = 0; done < trials;) {
    const long chunk = std::min<long>(batch_size, trials - done);
    msgs.resize(static_cast<std::size_t>(chunk));
    words.resize(static_cast<std::size_t>(chunk));
    MatrixX<Scalar> x(system.params.block_length, chunk);
    for (long j = 0; j < chunk; ++j) {
      const auto m = static_cast<std::uint32_t>(rng.bits(k));
      const auto b = static_cast<std::uint32_t>(rng.bits(q - k));
      const std::uint32_t v = encode_secure_index(m, b, seed_inv, k, q);
      msgs[static_cast<std::size_t>(j)] = m;
      words[static_cast<std::size_t>(j)] = v;
      x.col(j) = cb.col(v);
    }
    const Eigen::MatrixXd taps =
        sample_taps_batch(system.bob_channel.fading, chunk, rng);
    const Eigen::MatrixXd noise = sample_noise_batch(
        system.params.block_length, chunk, sigma, rng);
    const MatrixX<Scalar> y =
        transmit_batch(x.template cast<double>(), taps, noise)
            .template cast<Scalar>();
    const std::vector<int> decoded = decode_batch(system.autoencoder, y);
    for (long j = 0; j < chunk; ++j) {
      const auto w_hat = static_cast<std::uint32_t>(decoded[j]);
      if (w_hat != words[static_cast<std::size_t>(j)]) {
        ++result.word_error_count;
      }
      if (decode_secure_index(w_hat, seed_value, k, q) !=
          msgs[static_cast<std::size_t>(j)]) {
        ++result.error_count;
      }
    }
    done += chunk;
  }
  result.p_e =
      static_cast<double>(result.error_count) / static_cast<double>(trials);
  result.word_p_e = static_cast<double>(result.word_error_count) /
                    static_cast<double>(trials);
  std::tie(result.ci_low, result.ci_high) =
      wilson_interval(result.error_count, trials);
  return result;
}

// Sample source drawing (M, Z^n) through the full system: uniform m and b,
// fixed seed, fresh Eve-channel realization per block. Message bits are laid
// out MSB-first down the rows.
template <class Scalar>
auto make_leakage_source(const WiretapSystemT<Scalar>& system) {
  validate(system);
  const int k = system.params.secret_bits;
  const int q = system.params.total_bits;
  const int n = system.params.block_length;
  const std::uint32_t seed_inv = gf_inv(system.seed.element).value;
  const Eigen::MatrixXd cb =
      codebook(system.autoencoder).template cast<double>();
  const FadingProfile fading = system.eve_channel.fading;
  const double sigma = std::sqrt(noise_variance(system.eve_channel.noise));
  return [k, q, n, seed_inv, cb, fading, sigma](
             int batch, RngStream& rng)
             -> std::pair<Eigen::MatrixXd, Eigen::MatrixXd> {
    Eigen::MatrixXd bits(k, batch);
    Eigen::MatrixXd x(n, batch);
    for (int j = 0; j < batch; ++j) {
      const auto m = static_cast<std::uint32_t>(rng.bits(k));
      const auto b = static_cast<std::uint32_t>(rng.bits(q - k));
      const std::uint32_t v = encode_secure_index(m, b, seed_inv, k, q);
      for (int r = 0; r < k; ++r) {
        bits(r, j) = static_cast<double>((m >> (k - 1 - r)) & 1u);
      }
      x.col(j) = cb.col(v);
    }
    const Eigen::MatrixXd taps = sample_taps_batch(fading, batch, rng);
    const Eigen::MatrixXd noise = sample_noise_batch(n, batch, sigma, rng);
    return {std::move(bits), transmit_batch(x, taps, noise)};
  };
}

// Trains a fresh critic on the system's Eve channel and reports the held-out
// estimate of L = I(M; Z^n). One critic per (system, channel) configuration.
template <class Scalar>
MiEstimate estimate_leakage(const WiretapSystemT<Scalar>& system,
                            const MineConfig& config, RngStream& rng,
                            MineTrainReport* history = nullptr) {
  auto source = make_leakage_source(system);
  auto critic = make_mine_critic<Scalar>(
      system.params.secret_bits + system.params.block_length, rng);
  MineTrainReport report = train_mine(critic, source, config, rng);
  if (history != nullptr) *history = std::move(report);
  return estimate_mi(critic, source, config.eval_samples, config.batch_size,
                     rng);
}

struct EquivocationResult {
  double rate = 0.0;          // R_e = (k - L)/n, bits per channel use
  double secrecy_rate = 0.0;  // R_s = k/n, the ceiling
  double leakage_bits = 0.0;  // value actually used (after clamping)
  bool clamped = false;
};

// Estimator noise can push L slightly below zero; that is clamped to 0 with a
// warning. L above k is inconsistent with I(M;Z) <= H(M) and rejected.
inline EquivocationResult equivocation_rate(double leakage_bits, int k,
                                            int n) {
  if (k < 1 || n < 1) {
    throw std::invalid_argument("equivocation_rate: bad dimensions");
  }
  if (leakage_bits > static_cast<double>(k)) {
    throw std::runtime_error(
        "equivocation_rate: leakage estimate exceeds the entropy ceiling k");
  }
  EquivocationResult result;
  result.secrecy_rate = static_cast<double>(k) / n;
  result.leakage_bits = leakage_bits;
  if (leakage_bits < 0.0) {
    std::cerr << "metrics: warning: clamping negative leakage estimate "
              << leakage_bits << " to 0\n";
    result.leakage_bits = 0.0;
    result.clamped = true;
  }
  result.rate = (static_cast<double>(k) - result.leakage_bits) / n;
  return result;
}

}  // namespace wiretap
