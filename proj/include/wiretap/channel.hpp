// Real-valued T-tap Rayleigh fading channel with intersymbol interference,
// plus the AWGN special case and the stochastic-degradation predicate.
//
// A received block is y_i = sum_t |H_t| x_{i-t} + n_i with x_j = 0 for j < 0
// (blocks are independent, no inter-block memory). Tap coefficients are
// complex Gaussian CN(0, omega^2/T), so the magnitudes are Rayleigh and the
// total expected tap power is omega^2 regardless of T. Only magnitudes enter
// the real-valued model; phases are never materialized.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "wiretap/rng.hpp"

namespace wiretap {

struct FadingProfile {
  int taps = 1;           // 0 denotes pure AWGN with unit gain
  double variance = 1.0;  // omega^2, total expected tap power
};

struct NoiseSpec {
  double ebn0_db = 5.0;  // per-bit energy to noise PSD ratio
  double rate = 0.5;     // reliability-layer rate R_r = q/n
};

// sigma^2 = (2 R_r 10^(EbN0/10))^{-1}. The only dB -> linear conversion in
// the library lives here.
inline double noise_variance(const NoiseSpec& spec) {
  if (!(spec.rate > 0.0)) {
    throw std::invalid_argument("noise_variance: rate must be positive");
  }
  return 1.0 / (2.0 * spec.rate * std::pow(10.0, spec.ebn0_db / 10.0));
}

struct ChannelRealization {
  std::vector<double> tap_magnitudes;  // |H_t|, t = 0..T-1
  std::vector<double> noise;           // length n
};

// |H_t| = sqrt(G1^2 + G2^2) with G1, G2 ~ N(0, omega^2/(2T)) i.i.d.
inline std::vector<double> sample_taps(const FadingProfile& profile,
                                       RngStream& rng) {
  if (profile.taps < 1) {
    throw std::invalid_argument("sample_taps: need at least one tap");
  }
  const double component_sd =
      std::sqrt(profile.variance / (2.0 * profile.taps));
  std::vector<double> taps(static_cast<std::size_t>(profile.taps));
  for (auto& tap : taps) {
    const double g1 = rng.normal(0.0, component_sd);
    const double g2 = rng.normal(0.0, component_sd);
    tap = std::hypot(g1, g2);
  }
  return taps;
}

inline ChannelRealization sample_realization(const FadingProfile& profile,
                                             const NoiseSpec& spec, int n,
                                             RngStream& rng) {
  ChannelRealization real;
  if (profile.taps == 0) {
    real.tap_magnitudes = {1.0};  // AWGN: unit gain, no fading draw
  } else {
    real.tap_magnitudes = sample_taps(profile, rng);
  }
  const double sigma = std::sqrt(noise_variance(spec));
  real.noise.resize(static_cast<std::size_t>(n));
  for (auto& sample : real.noise) sample = rng.normal(0.0, sigma);
  return real;
}

inline std::vector<double> transmit(std::span<const double> x,
                                    const ChannelRealization& realization) {
  const std::size_t n = x.size();
  if (realization.noise.size() != n) {
    throw std::invalid_argument("transmit: noise length must match block length");
  }
  if (realization.tap_magnitudes.empty()) {
    throw std::invalid_argument("transmit: realization has no taps");
  }
  std::vector<double> y(n);
  const auto& taps = realization.tap_magnitudes;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = realization.noise[i];
    const std::size_t tmax = std::min(taps.size() - 1, i);
    for (std::size_t t = 0; t <= tmax; ++t) acc += taps[t] * x[i - t];
    y[i] = acc;
  }
  return y;
}

// Batched variants used by training and Monte-Carlo loops: columns are
// blocks, taps_per_block column j holds the realization for block j. Matches
// transmit() column by column.

// One independent fading realization per column; a single all-ones row for
// the AWGN profile.
inline Eigen::MatrixXd sample_taps_batch(const FadingProfile& profile,
                                         Eigen::Index batch, RngStream& rng) {
  if (profile.taps == 0) return Eigen::MatrixXd::Ones(1, batch);
  const double component_sd =
      std::sqrt(profile.variance / (2.0 * profile.taps));
  Eigen::MatrixXd taps(profile.taps, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    for (Eigen::Index t = 0; t < taps.rows(); ++t) {
      taps(t, j) = std::hypot(rng.normal(0.0, component_sd),
                              rng.normal(0.0, component_sd));
    }
  }
  return taps;
}

inline Eigen::MatrixXd sample_noise_batch(Eigen::Index n, Eigen::Index batch,
                                          double sigma, RngStream& rng) {
  Eigen::MatrixXd noise(n, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) noise(i, j) = rng.normal(0.0, sigma);
  }
  return noise;
}
inline Eigen::MatrixXd transmit_batch(const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& taps_per_block,
                                      const Eigen::MatrixXd& noise) {
  const Eigen::Index n = x.rows();
  const Eigen::Index batch = x.cols();
  if (noise.rows() != n || noise.cols() != batch ||
      taps_per_block.cols() != batch) {
    throw std::invalid_argument("transmit_batch: shape mismatch");
  }
  Eigen::MatrixXd y = noise;
  const Eigen::Index taps = taps_per_block.rows();
  for (Eigen::Index t = 0; t < taps && t < n; ++t) {
    y.bottomRows(n - t).noalias() +=
        x.topRows(n - t) * taps_per_block.row(t).asDiagonal();
  }
  return y;
}

// Gradient of transmit_batch with respect to x for fixed realizations:
// dL/dx_i = sum_t |H_t| dL/dy_{i+t}.
inline Eigen::MatrixXd transmit_batch_backward(
    const Eigen::MatrixXd& grad_y, const Eigen::MatrixXd& taps_per_block) {
  const Eigen::Index n = grad_y.rows();
  Eigen::MatrixXd grad_x = Eigen::MatrixXd::Zero(n, grad_y.cols());
  const Eigen::Index taps = taps_per_block.rows();
  for (Eigen::Index t = 0; t < taps && t < n; ++t) {
    grad_x.topRows(n - t).noalias() +=
        grad_y.bottomRows(n - t) * taps_per_block.row(t).asDiagonal();
  }
  return grad_x;
}

// Def.: Eve's channel is stochastically degraded w.r.t. Bob's when
// Fbar_{H_Y}(h / sigma_Y^2) >= Fbar_{H_Z}(h / sigma_Z^2) for all h >= 0.
// For single-tap Rayleigh magnitudes Fbar_H(x) = exp(-x^2 / omega^2), so the
// condition collapses to sigma_Y^4 * omega_Y^2 >= sigma_Z^4 * omega_Z^2.
inline bool is_stochastically_degraded(double omega_y2, double sigma_y2,
                                       double omega_z2, double sigma_z2) {
  if (!(omega_y2 > 0.0) || !(sigma_y2 > 0.0) || !(omega_z2 > 0.0) ||
      !(sigma_z2 > 0.0)) {
    throw std::invalid_argument(
        "is_stochastically_degraded: parameters must be positive");
  }
  return sigma_y2 * sigma_y2 * omega_y2 >= sigma_z2 * sigma_z2 * omega_z2;
}

}  // namespace wiretap
