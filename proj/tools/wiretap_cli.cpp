// Command-line driver for the wiretap-code experiments. Subcommands map to
// the reproduction scenarios; all tunables live in a key=value config file,
// with a handful of flags overriding the most commonly varied entries.
//
// Exit codes: 0 success, 2 configuration error, 3 training failure.

#include <cstdint>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "wiretap/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace wiretap;

std::uint32_t parse_hex_seed(const std::string& text) {
  std::string_view digits = text;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    digits.remove_prefix(2);
  }
  std::uint32_t value = 0;
  const auto res = std::from_chars(digits.data(),
                                   digits.data() + digits.size(), value, 16);
  if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
    throw ConfigError("--uhf-seed: '" + text + "' is not a hex value");
  }
  return value;
}

struct Options {
  std::string config_path;
  std::string out_dir = "results";
  std::string model_path;
  std::uint64_t rng_seed = 0;
  std::string uhf_seed_text;
  long trials = 0;
};

bool flag_given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig load_config(const Options& opts, const CLI::App* sub) {
  ExperimentConfig cfg = decode_experiment_config(Config::load(opts.config_path));
  if (flag_given(sub, "--rng-seed")) cfg.rng_seed = opts.rng_seed;
  if (flag_given(sub, "--uhf-seed")) {
    cfg.uhf_seed = parse_hex_seed(opts.uhf_seed_text);
  }
  if (flag_given(sub, "--trials")) {
    if (opts.trials < 1) throw ConfigError("--trials must be positive");
    cfg.mc_trials = opts.trials;
  }
  return cfg;
}

AutoencoderModel load_model_file(const std::string& path) {
  if (!fs::exists(path)) {
    throw ConfigError("model file does not exist: " + path);
  }
  std::ifstream in(path);
  return load_autoencoder(in);
}

SweepContext make_context(const ExperimentConfig& cfg, const Options& opts,
                          ModelStore& store, MetricCache& cache) {
  return SweepContext{cfg, fs::path(opts.out_dir), &store, &cache,
                      &std::cerr};
}

// Every (code point, channel) pair any sweep in the config can request.
std::vector<std::pair<CodeParams, int>> referenced_models(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<CodeParams, int>> jobs;
  std::set<std::string> seen;
  auto push = [&](int n, int taps) {
    const CodeParams params = code_params_for(cfg, n);
    const std::string key =
        model_key(params, taps, cfg.variance, cfg.bob_ebn0_db);
    if (seen.insert(key).second) jobs.emplace_back(params, taps);
  };
  for (const int n : cfg.block_lengths) {
    for (const int taps : cfg.channel_taps) push(n, taps);
    for (const int taps : cfg.degraded_taps) push(n, taps);
  }
  for (const int n : cfg.sweep_block_lengths) {
    push(n, 0);
    for (const int taps : cfg.sweep_taps) push(n, taps);
  }
  push(cfg.analysis_block_length, cfg.analysis_taps);
  return jobs;
}

int run_train(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  ModelStore store(fs::path(opts.out_dir) / "models", std::cerr);
  for (const auto& [params, taps] : referenced_models(cfg)) {
    store.load_or_train(cfg, params, taps, cfg.rng_seed);
  }
  return 0;
}

int run_eval_bler(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  AutoencoderModel model = load_model_file(opts.model_path);
  const CodeParams params = model.params;
  const WiretapSystem system =
      make_system(cfg, params, std::move(model), cfg.eval_taps, cfg.eval_taps,
                  cfg.eval_eve_variance, cfg.eval_eve_ebn0_db);
  const std::string label =
      "eval-bler/" + fs::path(opts.model_path).stem().string();
  RngStream rng = derive_stream(cfg.rng_seed, label);
  const BlerResult result = estimate_bler(system, cfg.mc_trials, rng);
  std::cout << "trials=" << result.trials << " errors=" << result.error_count
            << " p_e=" << format_number(result.p_e) << " ci95=["
            << format_number(result.ci_low) << ","
            << format_number(result.ci_high)
            << "] word_p_e=" << format_number(result.word_p_e) << "\n";
  return 0;
}

int run_eval_leakage(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  AutoencoderModel model = load_model_file(opts.model_path);
  const CodeParams params = model.params;
  const WiretapSystem system =
      make_system(cfg, params, std::move(model), cfg.eval_taps, cfg.eval_taps,
                  cfg.eval_eve_variance, cfg.eval_eve_ebn0_db);
  const std::string label =
      "eval-leakage/" + fs::path(opts.model_path).stem().string();
  RngStream rng = derive_stream(cfg.rng_seed, label);
  const MiEstimate estimate = estimate_leakage(system, cfg.mine, rng);
  std::cout << "leakage_bits=" << format_number(estimate.value_bits)
            << " leakage_nats=" << format_number(estimate.value_nats)
            << " std_error_bits=" << format_number(estimate.std_error_bits)
            << " eval_samples=" << estimate.sample_count << "\n";
  return 0;
}

int run_eval_equivocation(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  ModelStore store(fs::path(opts.out_dir) / "models", std::cerr);
  MetricCache cache(cfg.rng_seed, std::cerr);
  SweepContext ctx = make_context(cfg, opts, store, cache);
  run_blocklength_sweep(ctx);
  return 0;
}

int run_sweep_taps(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  ModelStore store(fs::path(opts.out_dir) / "models", std::cerr);
  MetricCache cache(cfg.rng_seed, std::cerr);
  SweepContext ctx = make_context(cfg, opts, store, cache);
  run_taps_sweep(ctx);
  return 0;
}

int run_sweep_variance(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  ModelStore store(fs::path(opts.out_dir) / "models", std::cerr);
  MetricCache cache(cfg.rng_seed, std::cerr);
  SweepContext ctx = make_context(cfg, opts, store, cache);
  run_variance_sweep(ctx);
  return 0;
}

int run_seed_analysis(const Options& opts, const CLI::App* sub) {
  const ExperimentConfig cfg = load_config(opts, sub);
  AutoencoderModel model = [&] {
    if (!opts.model_path.empty()) return load_model_file(opts.model_path);
    ModelStore store(fs::path(opts.out_dir) / "models", std::cerr);
    const CodeParams params = code_params_for(cfg, cfg.analysis_block_length);
    return store.load_or_train(cfg, params, cfg.analysis_taps, cfg.rng_seed);
  }();
  const std::vector<SeedDispersion> entries =
      seed_dispersion(model, cfg.quantizer_levels);
  write_seed_histograms(entries, fs::path(opts.out_dir));
  const SeedAnalysisSummary summary = summarize_dispersion(entries);
  std::cout << "seeds=" << summary.seed_count
            << " max_tv_hamming=" << format_number(summary.max_tv_hamming)
            << " max_tv_lee=" << format_number(summary.max_tv_lee) << "\n";
  return 0;
}

int run_degradation_check(const Options& opts) {
  const Config raw = Config::load(opts.config_path);
  const double omega_y2 = raw.get_double("degradation.bob_variance", 1.0);
  const double omega_z2 = raw.get_double("degradation.eve_variance", 0.5);
  const double sigma_y2 = raw.get_double("degradation.bob_noise_variance", 1.0);
  const double sigma_z2 = raw.get_double("degradation.eve_noise_variance", 1.0);
  const bool degraded =
      is_stochastically_degraded(omega_y2, sigma_y2, omega_z2, sigma_z2);
  std::cout << "sigma_Y^4*omega_Y^2="
            << format_number(sigma_y2 * sigma_y2 * omega_y2)
            << " sigma_Z^4*omega_Z^2="
            << format_number(sigma_z2 * sigma_z2 * omega_z2)
            << " stochastically_degraded=" << (degraded ? "yes" : "no")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seeded modular wiretap codes: training, evaluation, sweeps"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub, bool with_out, bool with_model,
                        bool with_trials) {
    sub->add_option("--config", opts.config_path, "key=value config file")
        ->required();
    sub->add_option("--rng-seed", opts.rng_seed,
                    "master RNG seed (overrides config)");
    sub->add_option("--uhf-seed", opts.uhf_seed_text,
                    "security-layer seed, hexadecimal (overrides config)");
    if (with_out) {
      sub->add_option("--out", opts.out_dir,
                      "output directory (CSV files, model cache)");
    }
    if (with_model) {
      sub->add_option("--model", opts.model_path, "trained model file");
    }
    if (with_trials) {
      sub->add_option("--trials", opts.trials,
                      "Monte-Carlo trials (overrides config)");
    }
    return sub;
  };

  CLI::App* train = add_common(
      app.add_subcommand("train", "train every model the config references"),
      true, false, false);
  CLI::App* eval_bler = add_common(
      app.add_subcommand("eval-bler", "block error rate of one trained model"),
      false, true, true);
  eval_bler->get_option("--model")->required();
  CLI::App* eval_leakage = add_common(
      app.add_subcommand("eval-leakage",
                         "MINE leakage estimate for one trained model"),
      false, true, false);
  eval_leakage->get_option("--model")->required();
  CLI::App* eval_equivocation = add_common(
      app.add_subcommand("eval-equivocation",
                         "blocklength sweep: BLER, leakage, equivocation CSVs"),
      true, false, true);
  CLI::App* sweep_taps = add_common(
      app.add_subcommand("sweep-taps", "leakage over the number of taps"),
      true, false, false);
  CLI::App* sweep_variance = add_common(
      app.add_subcommand("sweep-variance",
                         "leakage with Eve's fading variance degraded"),
      true, false, true);
  CLI::App* seed_analysis = add_common(
      app.add_subcommand("seed-analysis",
                         "per-seed Hamming/Lee dispersion histograms"),
      true, true, false);
  CLI::App* degradation = app.add_subcommand(
      "degradation-check", "evaluate the stochastic-degradation condition");
  degradation->add_option("--config", opts.config_path, "key=value config file")
      ->required();

  try {
    app.parse(argc, argv);
    if (train->parsed()) return run_train(opts, train);
    if (eval_bler->parsed()) return run_eval_bler(opts, eval_bler);
    if (eval_leakage->parsed()) return run_eval_leakage(opts, eval_leakage);
    if (eval_equivocation->parsed()) {
      return run_eval_equivocation(opts, eval_equivocation);
    }
    if (sweep_taps->parsed()) return run_sweep_taps(opts, sweep_taps);
    if (sweep_variance->parsed()) return run_sweep_variance(opts, sweep_variance);
    if (seed_analysis->parsed()) return run_seed_analysis(opts, seed_analysis);
    if (degradation->parsed()) return run_degradation_check(opts);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "training failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
