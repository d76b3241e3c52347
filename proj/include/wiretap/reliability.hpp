// Reliability layer: an autoencoder that maps q-bit words to n real channel
// uses and back. Encoder and decoder are trained jointly through the channel
// at the legitimate receiver's design SNR; the security layer (seclayer.hpp)
// sits on top and never touches these weights.
//
// Architecture, per block length n with q = R_r * n:
//   encoder: one-hot 2^q -> FC 2^q (relu) -> FC n (linear) -> ||x||^2 = n
//   decoder: FC 2^q (relu) -> FC 2^q (softmax over words)

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/gf2q.hpp"
#include "wiretap/nn.hpp"
#include "wiretap/rng.hpp"

namespace wiretap {

struct CodeParams {
  int block_length = 8;  // n, real channel uses per block
  int secret_bits = 2;   // k, message bits protected by the security layer
  int total_bits = 4;    // q, bits carried by the reliability layer

  int word_count() const { return 1 << total_bits; }
  double reliability_rate() const {
    return static_cast<double>(total_bits) / block_length;
  }
  double secrecy_rate() const {
    return static_cast<double>(secret_bits) / block_length;
  }
};

inline void validate(const CodeParams& p) {
  if (p.secret_bits < 1 || p.secret_bits >= p.total_bits) {
    throw std::invalid_argument("need 1 <= secret_bits < total_bits");
  }
  if (p.total_bits > p.block_length) {
    throw std::invalid_argument("need total_bits <= block_length");
  }
  if (p.total_bits > 16) {
    throw std::invalid_argument("total_bits above 16 is unsupported");
  }
}

template <class Scalar>
struct AutoencoderModelT {
  CodeParams params;
  DenseNetworkT<Scalar> encoder;  // one-hot word -> unnormalized symbols
  DenseNetworkT<Scalar> decoder;  // received block -> word logits/softmax
};

using AutoencoderModel = AutoencoderModelT<double>;

template <class Scalar = double>
AutoencoderModelT<Scalar> make_autoencoder(const CodeParams& params,
                                           RngStream& rng) {
  validate(params);
  const int words = params.word_count();
  const int n = params.block_length;
  AutoencoderModelT<Scalar> model;
  model.params = params;
  // Redraw the encoder until no word maps to the zero block. A word whose
  // entire hidden ReLU layer is dead at init (likely for small 2^q) emits
  // exactly zero, receives zero gradient forever, and can never be power
  // normalized; rejecting such draws costs nothing and keeps valid streams
  // bit-identical.
  for (int attempt = 0;; ++attempt) {
    model.encoder.layers = {
        make_dense_layer<Scalar>(words, words, Activation::kRelu, rng),
        make_dense_layer<Scalar>(words, n, Activation::kLinear, rng),
    };
    const MatrixX<Scalar> raw =
        forward(model.encoder,
                MatrixX<Scalar>(MatrixX<Scalar>::Identity(words, words)))
            .output();
    if (raw.colwise().norm().minCoeff() > Scalar{0}) break;
    if (attempt >= 256) {
      throw std::runtime_error(
          "make_autoencoder: could not draw an encoder without dead words");
    }
  }
  model.decoder.layers = {
      make_dense_layer<Scalar>(n, words, Activation::kRelu, rng),
      make_dense_layer<Scalar>(words, words, Activation::kSoftmax, rng),
  };
  return model;
}

// --- power normalization ----------------------------------------------------
// x = sqrt(n) z / ||z|| per column, so every transmitted block carries
// exactly n units of energy (unit average per channel use).

template <class Scalar>
MatrixX<Scalar> normalize_power(const MatrixX<Scalar>& z) {
  const auto n = static_cast<Scalar>(z.rows());
  MatrixX<Scalar> x(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const Scalar norm = z.col(j).norm();
    if (!(norm > Scalar{0})) {
      throw std::domain_error("normalize_power: zero-norm block");
    }
    x.col(j) = z.col(j) * (std::sqrt(n) / norm);
  }
  return x;
}

// d/dz of the map above: g_z = sqrt(n)/||z|| (g_x - (z . g_x) z / ||z||^2).
template <class Scalar>
MatrixX<Scalar> normalize_power_backward(const MatrixX<Scalar>& z,
                                         const MatrixX<Scalar>& grad_x) {
  if (z.rows() != grad_x.rows() || z.cols() != grad_x.cols()) {
    throw std::invalid_argument("normalize_power_backward: shape mismatch");
  }
  const auto n = static_cast<Scalar>(z.rows());
  MatrixX<Scalar> grad_z(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const Scalar norm2 = z.col(j).squaredNorm();
    const Scalar norm = std::sqrt(norm2);
    const Scalar dot = z.col(j).dot(grad_x.col(j));
    grad_z.col(j) =
        (std::sqrt(n) / norm) * (grad_x.col(j) - (dot / norm2) * z.col(j));
  }
  return grad_z;
}

// --- encoding / decoding ----------------------------------------------------

template <class Scalar>
MatrixX<Scalar> one_hot_batch(const std::vector<int>& words, int word_count) {
  MatrixX<Scalar> batch = MatrixX<Scalar>::Zero(word_count, words.size());
  for (std::size_t j = 0; j < words.size(); ++j) {
    if (words[j] < 0 || words[j] >= word_count) {
      throw std::invalid_argument("one_hot_batch: word index out of range");
    }
    batch(words[j], static_cast<Eigen::Index>(j)) = Scalar{1};
  }
  return batch;
}

// All 2^q codewords as columns; column w is the block transmitted for word w.
template <class Scalar>
MatrixX<Scalar> codebook(const AutoencoderModelT<Scalar>& model) {
  const int words = model.params.word_count();
  const MatrixX<Scalar> eye = MatrixX<Scalar>::Identity(words, words);
  return normalize_power(forward(model.encoder, eye).output());
}

template <class Scalar>
VectorX<Scalar> encode_word(const AutoencoderModelT<Scalar>& model, int word) {
  const auto onehot = one_hot_batch<Scalar>({word}, model.params.word_count());
  return normalize_power(forward(model.encoder, onehot).output()).col(0);
}

// Bit-level entry point: the q-bit word is the MSB-first index.
template <class Scalar>
VectorX<Scalar> encode_message(const AutoencoderModelT<Scalar>& model,
                               const BitVec& word) {
  if (static_cast<int>(word.size()) != model.params.total_bits) {
    throw std::invalid_argument("encode_message: word must have q bits");
  }
  return encode_word(model, static_cast<int>(bits_to_element(word).value));
}

// Ties broken toward the smallest word index.
template <class Scalar>
int argmax_word(const Eigen::Ref<const VectorX<Scalar>>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return static_cast<int>(best);
}

template <class Scalar>
std::vector<int> decode_batch(const AutoencoderModelT<Scalar>& model,
                              const MatrixX<Scalar>& received) {
  const auto pass = forward(model.decoder, received);
  std::vector<int> words(static_cast<std::size_t>(received.cols()));
  for (Eigen::Index j = 0; j < received.cols(); ++j) {
    words[static_cast<std::size_t>(j)] =
        argmax_word<Scalar>(pass.logits().col(j));
  }
  return words;
}

template <class Scalar>
BitVec decode_observation(const AutoencoderModelT<Scalar>& model,
                          const VectorX<Scalar>& received) {
  const std::vector<int> word = decode_batch(model, MatrixX<Scalar>(received));
  return element_to_bits(
      make_element(static_cast<std::uint32_t>(word.front()),
                   model.params.total_bits));
}

// --- training ---------------------------------------------------------------

struct TrainConfig {
  int epochs = 100;
  long samples_per_epoch = 1'000'000;
  int batch_size = 1000;
  LrSchedule schedule{1e-3, 1.0};
  double design_ebn0_db = 5.0;    // legitimate receiver's operating point
  long validation_words = 10'000;  // held-out draws per epoch for BLER history
};

struct TrainReport {
  std::vector<double> epoch_loss;      // mean cross-entropy per epoch, nats
  std::vector<double> epoch_val_bler;  // held-out word-error rate per epoch
};

// Joint encoder/decoder training through the (fading) channel. Each block in
// a batch sees an independent channel realization; the decoder receives no
// side information about it.
template <class Scalar>
TrainReport train_autoencoder(AutoencoderModelT<Scalar>& model,
                              const TrainConfig& config,
                              const FadingProfile& fading, RngStream& rng) {
  validate(model.params);
  if (config.epochs < 1 || config.batch_size < 1 ||
      config.samples_per_epoch < config.batch_size) {
    throw std::invalid_argument("train_autoencoder: bad training budget");
  }
  const int words = model.params.word_count();
  const double sigma = std::sqrt(noise_variance(
      {config.design_ebn0_db, model.params.reliability_rate()}));
  const long batches_per_epoch = config.samples_per_epoch / config.batch_size;

  auto enc_adam = make_adam_state(model.encoder);
  auto dec_adam = make_adam_state(model.decoder);
  TrainReport report;
  report.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
  report.epoch_val_bler.reserve(static_cast<std::size_t>(config.epochs));

  // Forward-only pass over fresh words; mirrors a Monte-Carlo BLER trial at
  // the design point but stays inside the training stream.
  auto validation_bler = [&] {
    const long total = std::max<long>(config.validation_words, 1);
    long errors = 0;
    std::vector<int> val_words;
    for (long done = 0; done < total;) {
      const long chunk = std::min<long>(config.batch_size, total - done);
      val_words.resize(static_cast<std::size_t>(chunk));
      for (auto& w : val_words) w = static_cast<int>(rng.below(words));
      const auto x = normalize_power(
          forward(model.encoder, one_hot_batch<Scalar>(val_words, words))
              .output());
      const Eigen::MatrixXd taps = sample_taps_batch(fading, chunk, rng);
      const Eigen::MatrixXd noise = sample_noise_batch(
          model.params.block_length, chunk, sigma, rng);
      const MatrixX<Scalar> y =
          transmit_batch(x.template cast<double>(), taps, noise)
              .template cast<Scalar>();
      const auto decoded = decode_batch(model, y);
      for (std::size_t i = 0; i < decoded.size(); ++i) {
        if (decoded[i] != val_words[i]) ++errors;
      }
      done += chunk;
    }
    return static_cast<double>(errors) / static_cast<double>(total);
  };

  std::vector<int> batch_words(static_cast<std::size_t>(config.batch_size));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto lr = static_cast<Scalar>(config.schedule.lr(epoch));
    double loss_sum = 0.0;
    for (long b = 0; b < batches_per_epoch; ++b) {
      for (auto& w : batch_words) w = static_cast<int>(rng.below(words));
      const auto onehot = one_hot_batch<Scalar>(batch_words, words);

      auto enc_pass = forward(model.encoder, onehot);
      const MatrixX<Scalar>& z = enc_pass.output();
      const MatrixX<Scalar> x = normalize_power(z);

      const Eigen::MatrixXd taps =
          sample_taps_batch(fading, config.batch_size, rng);
      const Eigen::MatrixXd noise =
          sample_noise_batch(model.params.block_length, config.batch_size,
                             sigma, rng);
      const MatrixX<Scalar> y =
          transmit_batch(x.template cast<double>(), taps, noise)
              .template cast<Scalar>();

      auto dec_pass = forward(model.decoder, y);
      const auto ce = cross_entropy(dec_pass.logits(), batch_words);
      loss_sum += static_cast<double>(ce.loss);

      auto dec_grads = backward(model.decoder, dec_pass, ce.logit_grad);
      const MatrixX<Scalar> grad_x =
          transmit_batch_backward(dec_grads.input.template cast<double>(),
                                  taps)
              .template cast<Scalar>();
      const MatrixX<Scalar> grad_z = normalize_power_backward(z, grad_x);
      auto enc_grads = backward(model.encoder, enc_pass, grad_z);

      adam_step(model.decoder, dec_grads, dec_adam, lr);
      adam_step(model.encoder, enc_grads, enc_adam, lr);
    }
    const double epoch_loss = loss_sum / static_cast<double>(batches_per_epoch);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("train_autoencoder: loss diverged at epoch " +
                          std::to_string(epoch));
    }
    report.epoch_loss.push_back(epoch_loss);
    report.epoch_val_bler.push_back(validation_bler());
  }
  return report;
}

// --- persistence ------------------------------------------------------------
// Header line with the code parameters, then the encoder and decoder in the
// nn.hpp network format.

inline constexpr int kAutoencoderFormatVersion = 1;

template <class Scalar>
void save_autoencoder(std::ostream& os,
                      const AutoencoderModelT<Scalar>& model) {
  os << "wiretap-ae " << kAutoencoderFormatVersion << ' '
     << model.params.block_length << ' ' << model.params.secret_bits << ' '
     << model.params.total_bits << '\n';
  save_network(os, model.encoder);
  save_network(os, model.decoder);
}

template <class Scalar = double>
AutoencoderModelT<Scalar> load_autoencoder(std::istream& is) {
  std::string magic;
  int version = 0;
  CodeParams params;
  is >> magic >> version >> params.block_length >> params.secret_bits >>
      params.total_bits;
  if (!is || magic != "wiretap-ae") {
    throw std::runtime_error("load_autoencoder: not a wiretap-ae model");
  }
  if (version != kAutoencoderFormatVersion) {
    throw std::runtime_error("load_autoencoder: unsupported format version " +
                             std::to_string(version));
  }
  validate(params);
  AutoencoderModelT<Scalar> model;
  model.params = params;
  model.encoder = load_network<Scalar>(is);
  model.decoder = load_network<Scalar>(is);
  if (model.encoder.input_dim() != params.word_count() ||
      model.encoder.output_dim() != params.block_length ||
      model.decoder.input_dim() != params.block_length ||
      model.decoder.output_dim() != params.word_count()) {
    throw std::runtime_error("load_autoencoder: dimensions disagree with "
                             "code parameters");
  }
  return model;
}

}  // namespace wiretap
