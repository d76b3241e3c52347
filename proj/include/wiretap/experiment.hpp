// Experiment drivers behind the CLI: configuration decoding, the trained-model
// store, metric memoization and the CSV sweeps. Every stochastic task draws
// from an RNG substream derived from (master seed, task label), so results do
// not depend on evaluation order and identical configs reproduce identical
// files byte for byte.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wiretap/analysis.hpp"
#include "wiretap/config.hpp"
#include "wiretap/csv.hpp"
#include "wiretap/metrics.hpp"

namespace wiretap {

struct ExperimentConfig {
  // [code]
  std::vector<int> block_lengths{4, 8, 12, 16};
  double secrecy_rate = 0.25;      // R_s = k/n
  double reliability_rate = 0.5;   // R_r = q/n
  // [channel]
  std::vector<int> channel_taps{0, 1, 3};  // 0 = AWGN
  double variance = 1.0;                   // omega^2, both parties
  double bob_ebn0_db = 5.0;
  std::vector<double> eve_ebn0_db{0.0, -5.0};
  // [taps_sweep]
  std::vector<int> sweep_taps{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> sweep_block_lengths{8, 12, 16};
  double sweep_eve_ebn0_db = 0.0;
  // [variance_sweep]
  double degraded_eve_variance = 0.5;
  std::vector<int> degraded_taps{1, 3};
  double degraded_eve_ebn0_db = 0.0;
  // [seed_analysis]
  int analysis_block_length = 16;
  int analysis_taps = 0;
  int quantizer_levels = 16;
  // [security]
  std::uint32_t uhf_seed = 0x03;
  // [eval] single-model evaluation channel
  int eval_taps = 0;
  double eval_eve_ebn0_db = 0.0;
  double eval_eve_variance = 1.0;
  // budgets
  TrainConfig train;
  MineConfig mine;
  long mc_trials = 1'000'000;
  // [experiment]
  std::uint64_t rng_seed = 1;
};

namespace detail {

inline std::vector<int> to_int_list(const std::vector<long>& in) {
  return std::vector<int>(in.begin(), in.end());
}

}  // namespace detail

inline ExperimentConfig decode_experiment_config(const Config& raw) {
  ExperimentConfig cfg;
  if (raw.contains("code.block_lengths")) {
    cfg.block_lengths = detail::to_int_list(raw.get_long_list("code.block_lengths"));
  }
  cfg.secrecy_rate = raw.get_double("code.secrecy_rate", cfg.secrecy_rate);
  cfg.reliability_rate =
      raw.get_double("code.reliability_rate", cfg.reliability_rate);

  if (raw.contains("channel.num_taps")) {
    cfg.channel_taps = detail::to_int_list(raw.get_long_list("channel.num_taps"));
  }
  cfg.variance = raw.get_double("channel.variance", cfg.variance);
  cfg.bob_ebn0_db = raw.get_double("channel.bob_ebn0_db", cfg.bob_ebn0_db);
  if (raw.contains("channel.eve_ebn0_db")) {
    cfg.eve_ebn0_db = raw.get_double_list("channel.eve_ebn0_db");
  }

  if (raw.contains("taps_sweep.num_taps")) {
    cfg.sweep_taps = detail::to_int_list(raw.get_long_list("taps_sweep.num_taps"));
  }
  if (raw.contains("taps_sweep.block_lengths")) {
    cfg.sweep_block_lengths =
        detail::to_int_list(raw.get_long_list("taps_sweep.block_lengths"));
  }
  cfg.sweep_eve_ebn0_db =
      raw.get_double("taps_sweep.eve_ebn0_db", cfg.sweep_eve_ebn0_db);

  cfg.degraded_eve_variance =
      raw.get_double("variance_sweep.eve_variance", cfg.degraded_eve_variance);
  if (raw.contains("variance_sweep.num_taps")) {
    cfg.degraded_taps =
        detail::to_int_list(raw.get_long_list("variance_sweep.num_taps"));
  }
  cfg.degraded_eve_ebn0_db =
      raw.get_double("variance_sweep.eve_ebn0_db", cfg.degraded_eve_ebn0_db);

  cfg.analysis_block_length = static_cast<int>(
      raw.get_long("seed_analysis.block_length", cfg.analysis_block_length));
  cfg.analysis_taps =
      static_cast<int>(raw.get_long("seed_analysis.num_taps", cfg.analysis_taps));
  cfg.quantizer_levels = static_cast<int>(
      raw.get_long("seed_analysis.quantizer_levels", cfg.quantizer_levels));

  cfg.uhf_seed = raw.get_u32("security.uhf_seed", cfg.uhf_seed);

  cfg.eval_taps = static_cast<int>(raw.get_long("eval.num_taps", cfg.eval_taps));
  cfg.eval_eve_ebn0_db =
      raw.get_double("eval.eve_ebn0_db", cfg.eval_eve_ebn0_db);
  cfg.eval_eve_variance = raw.get_double("eval.eve_variance", cfg.variance);

  cfg.train.epochs =
      static_cast<int>(raw.get_long("train.epochs", cfg.train.epochs));
  cfg.train.samples_per_epoch =
      raw.get_long("train.samples_per_epoch", cfg.train.samples_per_epoch);
  cfg.train.batch_size =
      static_cast<int>(raw.get_long("train.batch_size", cfg.train.batch_size));
  cfg.train.schedule.base_lr =
      raw.get_double("train.learning_rate", cfg.train.schedule.base_lr);
  cfg.train.schedule.decay =
      raw.get_double("train.lr_decay", cfg.train.schedule.decay);
  cfg.train.design_ebn0_db = cfg.bob_ebn0_db;
  cfg.train.validation_words =
      raw.get_long("train.validation_words", cfg.train.validation_words);

  cfg.mine.epochs =
      static_cast<int>(raw.get_long("mine.epochs", cfg.mine.epochs));
  cfg.mine.samples_per_epoch =
      raw.get_long("mine.samples_per_epoch", cfg.mine.samples_per_epoch);
  cfg.mine.batch_size =
      static_cast<int>(raw.get_long("mine.batch_size", cfg.mine.batch_size));
  cfg.mine.schedule.base_lr =
      raw.get_double("mine.learning_rate", cfg.mine.schedule.base_lr);
  cfg.mine.schedule.decay =
      raw.get_double("mine.lr_decay", cfg.mine.schedule.decay);
  cfg.mine.ema_rate = raw.get_double("mine.ema_rate", cfg.mine.ema_rate);
  cfg.mine.eval_samples =
      raw.get_long("mine.eval_samples", cfg.mine.eval_samples);

  cfg.mc_trials = raw.get_long("mc.trials", cfg.mc_trials);
  cfg.rng_seed = raw.get_u64("experiment.rng_seed", cfg.rng_seed);
  return cfg;
}

// The n grid is only valid when both rates land on whole bit counts.
inline CodeParams code_params_for(const ExperimentConfig& cfg, int n) {
  const double k_real = cfg.secrecy_rate * n;
  const double q_real = cfg.reliability_rate * n;
  const int k = static_cast<int>(std::llround(k_real));
  const int q = static_cast<int>(std::llround(q_real));
  if (std::abs(k_real - k) > 1e-9 || std::abs(q_real - q) > 1e-9) {
    throw ConfigError("block length " + std::to_string(n) +
                      " is incompatible with the configured rates");
  }
  CodeParams params{n, k, q};
  try {
    validate(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("block length " + std::to_string(n) + ": " + e.what());
  }
  return params;
}

inline FadingProfile fading_for(int taps, double variance) {
  return FadingProfile{taps, variance};
}

inline std::string channel_name(int taps) {
  return taps == 0 ? "awgn" : "rayleigh-" + std::to_string(taps) + "-tap";
}

// Canonical model identity; doubles in shortest form so 5.0 prints as "5".
inline std::string model_key(const CodeParams& params, int taps,
                             double variance, double bob_db) {
  return "ae_n" + std::to_string(params.block_length) + "_k" +
         std::to_string(params.secret_bits) + "_q" +
         std::to_string(params.total_bits) + "_taps" + std::to_string(taps) +
         "_var" + format_number(variance) + "_bob" + format_number(bob_db);
}

class ModelStore {
 public:
  ModelStore(std::filesystem::path dir, std::ostream& log)
      : dir_(std::move(dir)), log_(&log) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path_for(const std::string& key) const {
    return dir_ / (key + ".txt");
  }

  // Loads the cached model when present, otherwise trains and caches it. The
  // training stream depends only on (master seed, model key).
  AutoencoderModel load_or_train(const ExperimentConfig& cfg,
                                 const CodeParams& params, int taps,
                                 std::uint64_t master) {
    const std::string key = model_key(params, taps, cfg.variance,
                                      cfg.bob_ebn0_db);
    const std::filesystem::path file = path_for(key);
    if (std::filesystem::exists(file)) {
      std::ifstream in(file);
      AutoencoderModel model = load_autoencoder(in);
      if (model.params.block_length != params.block_length ||
          model.params.secret_bits != params.secret_bits ||
          model.params.total_bits != params.total_bits) {
        throw ConfigError("cached model " + file.string() +
                          " does not match the configured code parameters");
      }
      *log_ << "model " << key << ": loaded from cache\n";
      return model;
    }
    *log_ << "model " << key << ": training (" << cfg.train.epochs
          << " epochs x " << cfg.train.samples_per_epoch << " samples)\n";
    RngStream rng = derive_stream(master, "train/" + key);
    AutoencoderModel model = make_autoencoder(params, rng);
    TrainConfig train = cfg.train;
    train.design_ebn0_db = cfg.bob_ebn0_db;
    const TrainReport report = train_autoencoder(
        model, train, fading_for(taps, cfg.variance), rng);
    *log_ << "model " << key << ": final loss "
          << report.epoch_loss.back() << ", validation bler "
          << report.epoch_val_bler.back() << "\n";
    std::ostringstream buffer;
    save_autoencoder(buffer, model);
    atomic_write_file(file, buffer.str());
    return model;
  }

 private:
  std::filesystem::path dir_;
  std::ostream* log_;
};

// Assembles the full system around a trained model. Eve's defaults mirror
// Bob's channel; callers override the eavesdropper side per scenario.
inline WiretapSystem make_system(const ExperimentConfig& cfg,
                                 const CodeParams& params,
                                 AutoencoderModel model, int bob_taps,
                                 int eve_taps, double eve_variance,
                                 double eve_db) {
  WiretapSystem system{
      params,
      make_seed(cfg.uhf_seed, params.total_bits),
      std::move(model),
      {fading_for(bob_taps, cfg.variance),
       {cfg.bob_ebn0_db, params.reliability_rate()}},
      {fading_for(eve_taps, eve_variance),
       {eve_db, params.reliability_rate()}}};
  validate(system);
  return system;
}

// Memoizes BLER/leakage per substream label: a metric shared by several CSVs
// is computed once per process, and the label-derived stream makes re-runs
// (even across processes) agree bit for bit.
class MetricCache {
 public:
  MetricCache(std::uint64_t master, std::ostream& log)
      : master_(master), log_(&log) {}

  BlerResult bler(const WiretapSystem& system, long trials,
                  const std::string& label) {
    if (const auto it = bler_.find(label); it != bler_.end()) {
      return it->second;
    }
    RngStream rng = derive_stream(master_, label);
    const BlerResult result = estimate_bler(system, trials, rng);
    *log_ << label << ": p_e " << result.p_e << " ["
          << result.ci_low << ", " << result.ci_high << "]\n";
    return bler_.emplace(label, result).first->second;
  }

  MiEstimate leakage(const WiretapSystem& system, const MineConfig& config,
                     const std::string& label) {
    if (const auto it = leakage_.find(label); it != leakage_.end()) {
      return it->second;
    }
    RngStream rng = derive_stream(master_, label);
    const MiEstimate result = estimate_leakage(system, config, rng);
    *log_ << label << ": leakage " << result.value_bits << " bits (se "
          << result.std_error_bits << ")\n";
    return leakage_.emplace(label, result).first->second;
  }

 private:
  std::uint64_t master_;
  std::ostream* log_;
  std::map<std::string, BlerResult> bler_;
  std::map<std::string, MiEstimate> leakage_;
};

inline std::string bler_label(const std::string& key) { return "bler/" + key; }

inline std::string leakage_label(const std::string& key, int eve_taps,
                                 double eve_variance, double eve_db) {
  return "leak/" + key + "/eve_taps" + std::to_string(eve_taps) + "_var" +
         format_number(eve_variance) + "_db" + format_number(eve_db);
}

// Shared four-column schema of the blocklength-indexed CSV files.
inline const std::vector<std::string>& blocklength_columns() {
  static const std::vector<std::string> columns{
      "blocklength", "bler_source_msg", "mi_leakage_eve", "equivocation_rate"};
  return columns;
}

struct SweepContext {
  ExperimentConfig cfg;
  std::filesystem::path out_dir;
  ModelStore* store = nullptr;
  MetricCache* cache = nullptr;
  std::ostream* log = nullptr;
};

// Blocklength sweep: one four-column CSV per (channel, Eve dB) under
// const_rates/, duplicated under equivocation_rate_leakage/ for the
// R_e-centric files.
inline void run_blocklength_sweep(SweepContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  for (const int taps : cfg.channel_taps) {
    struct Row {
      int n;
      BlerResult bler;
      std::map<std::string, MiEstimate> leakage_by_eve;  // key: formatted dB
    };
    std::vector<Row> rows;
    for (const int n : cfg.block_lengths) {
      const CodeParams params = code_params_for(cfg, n);
      const std::string key =
          model_key(params, taps, cfg.variance, cfg.bob_ebn0_db);
      AutoencoderModel model =
          ctx.store->load_or_train(cfg, params, taps, cfg.rng_seed);
      Row row{n, {}, {}};
      {
        const WiretapSystem system =
            make_system(cfg, params, model, taps, taps, cfg.variance,
                        cfg.eve_ebn0_db.front());
        row.bler = ctx.cache->bler(system, cfg.mc_trials, bler_label(key));
      }
      for (const double eve_db : cfg.eve_ebn0_db) {
        const WiretapSystem system = make_system(
            cfg, params, model, taps, taps, cfg.variance, eve_db);
        row.leakage_by_eve[format_number(eve_db)] = ctx.cache->leakage(
            system, cfg.mine,
            leakage_label(key, taps, cfg.variance, eve_db));
      }
      rows.push_back(std::move(row));
    }
    for (const double eve_db : cfg.eve_ebn0_db) {
      CsvTable table(blocklength_columns());
      for (const Row& row : rows) {
        const CodeParams params = code_params_for(cfg, row.n);
        const MiEstimate& mi = row.leakage_by_eve.at(format_number(eve_db));
        const EquivocationResult eq = equivocation_rate(
            mi.value_bits, params.secret_bits, params.block_length);
        table.add_row({format_number(row.n), format_number(row.bler.p_e),
                       format_number(eq.leakage_bits),
                       format_number(eq.rate)});
      }
      const std::string name = "leakage_bler_vs_blocklength_bob_" +
                               format_number(cfg.bob_ebn0_db) + "_eve_" +
                               format_number(eve_db) + ".csv";
      table.write(ctx.out_dir / "const_rates" / channel_name(taps) / name);
      table.write(ctx.out_dir / "equivocation_rate_leakage" /
                  channel_name(taps) /
                  ("equivocation_rate_per_blocklength_eve_" +
                   format_number(eve_db) + ".csv"));
    }
  }
}

// Taps sweep: leakage over the number of Eve-side taps, with the AWGN
// leakage as a flat reference column, one file per blocklength.
inline void run_taps_sweep(SweepContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const double eve_db = cfg.sweep_eve_ebn0_db;
  for (const int n : cfg.sweep_block_lengths) {
    const CodeParams params = code_params_for(cfg, n);
    const std::string awgn_key =
        model_key(params, 0, cfg.variance, cfg.bob_ebn0_db);
    AutoencoderModel awgn_model =
        ctx.store->load_or_train(cfg, params, 0, cfg.rng_seed);
    const WiretapSystem awgn_system =
        make_system(cfg, params, awgn_model, 0, 0, cfg.variance, eve_db);
    const MiEstimate awgn_leakage = ctx.cache->leakage(
        awgn_system, cfg.mine,
        leakage_label(awgn_key, 0, cfg.variance, eve_db));

    CsvTable table({"num_taps", "leakage_awgn", "leakage_rayleigh"});
    for (const int taps : cfg.sweep_taps) {
      const std::string key =
          model_key(params, taps, cfg.variance, cfg.bob_ebn0_db);
      AutoencoderModel model =
          ctx.store->load_or_train(cfg, params, taps, cfg.rng_seed);
      const WiretapSystem system = make_system(
          cfg, params, model, taps, taps, cfg.variance, eve_db);
      const MiEstimate leakage = ctx.cache->leakage(
          system, cfg.mine, leakage_label(key, taps, cfg.variance, eve_db));
      table.add_row(
          {format_number(taps),
           format_number(std::max(awgn_leakage.value_bits, 0.0)),
           format_number(std::max(leakage.value_bits, 0.0))});
    }
    table.write(ctx.out_dir / "const_rates" / "num_taps" /
                ("leakage_num_taps_eve_" + format_number(eve_db) + "_n_" +
                 std::to_string(n) + ".csv"));
  }
}

// Variance sweep: Eve's fading variance lowered to omega_Z^2 < omega_Y^2 with
// everything else unchanged; same schema and naming as the blocklength sweep
// but under const_rates/degraded/.
inline void run_variance_sweep(SweepContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const double eve_db = cfg.degraded_eve_ebn0_db;
  for (const int taps : cfg.degraded_taps) {
    if (taps == 0) {
      throw ConfigError("variance_sweep.num_taps: AWGN has no fading variance");
    }
    CsvTable table(blocklength_columns());
    for (const int n : cfg.block_lengths) {
      const CodeParams params = code_params_for(cfg, n);
      const std::string key =
          model_key(params, taps, cfg.variance, cfg.bob_ebn0_db);
      AutoencoderModel model =
          ctx.store->load_or_train(cfg, params, taps, cfg.rng_seed);
      const WiretapSystem system =
          make_system(cfg, params, model, taps, taps,
                      cfg.degraded_eve_variance, eve_db);
      const BlerResult bler =
          ctx.cache->bler(system, cfg.mc_trials, bler_label(key));
      const MiEstimate mi = ctx.cache->leakage(
          system, cfg.mine,
          leakage_label(key, taps, cfg.degraded_eve_variance, eve_db));
      const EquivocationResult eq = equivocation_rate(
          mi.value_bits, params.secret_bits, params.block_length);
      table.add_row({format_number(n), format_number(bler.p_e),
                     format_number(eq.leakage_bits), format_number(eq.rate)});
    }
    const std::string name = "leakage_bler_vs_blocklength_bob_" +
                             format_number(cfg.bob_ebn0_db) + "_eve_" +
                             format_number(eve_db) + ".csv";
    table.write(ctx.out_dir / "const_rates" / "degraded" /
                channel_name(taps) / name);
  }
}

// Seed analysis: per-seed Hamming and Lee histograms of the quantized
// codebook under the security layer, one bins/counts CSV per seed and metric.
inline void write_seed_histograms(const std::vector<SeedDispersion>& entries,
                                  const std::filesystem::path& out_dir) {
  for (const SeedDispersion& entry : entries) {
    const std::string suffix = "_seed_" + std::to_string(entry.seed) + ".csv";
    CsvTable hamming({"bins", "counts"});
    for (std::size_t d = 0; d < entry.hamming.counts.size(); ++d) {
      hamming.add_row({format_number(static_cast<long>(d)),
                       format_number(entry.hamming.counts[d])});
    }
    hamming.write(out_dir / "seeds" / ("hamming" + suffix));
    CsvTable lee({"bins", "counts"});
    for (std::size_t d = 0; d < entry.lee.counts.size(); ++d) {
      lee.add_row({format_number(static_cast<long>(d)),
                   format_number(entry.lee.counts[d])});
    }
    lee.write(out_dir / "seeds" / ("lee" + suffix));
  }
}

struct SeedAnalysisSummary {
  double max_tv_hamming = 0.0;
  double max_tv_lee = 0.0;
  std::size_t seed_count = 0;
};

inline SeedAnalysisSummary summarize_dispersion(
    const std::vector<SeedDispersion>& entries) {
  SeedAnalysisSummary summary;
  summary.seed_count = entries.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      summary.max_tv_hamming =
          std::max(summary.max_tv_hamming,
                   histogram_distance(entries[i].hamming, entries[j].hamming));
      summary.max_tv_lee = std::max(
          summary.max_tv_lee, histogram_distance(entries[i].lee, entries[j].lee));
    }
  }
  return summary;
}

}  // namespace wiretap
