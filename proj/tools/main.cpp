#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikecov/config.hpp"
#include "spikecov/emit.hpp"
#include "spikecov/errors.hpp"
#include "spikecov/law.hpp"
#include "spikecov/model.hpp"
#include "spikecov/montecarlo.hpp"
#include "spikecov/mp.hpp"
#include "spikecov/outliers.hpp"

namespace {

constexpr const char* kTool = "spikecov 0.1.0";

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, Options& opt, bool with_threads) {
  sub->add_option("--config", opt.config_path, "run configuration (json)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", opt.out, "output directory (overrides the config)");
  sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
  if (with_threads)
    sub->add_option("--threads", opt.threads, "trial worker threads")
        ->check(CLI::PositiveNumber);
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw spikecov::Error("cannot create output directory " + path);
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

const spikecov::SpikedModel& require_model(const spikecov::RunConfig& cfg,
                                           const char* verb) {
  if (!cfg.model)
    throw spikecov::SchemaError(std::string(verb) + " needs a model section");
  return *cfg.model;
}

int run_predict(const spikecov::RunConfig& cfg, const spikecov::Meta& meta) {
  using namespace spikecov;
  const SpikedModel& model = require_model(cfg, "predict");
  const EquivalentLaw law = EquivalentLaw::solve(model.spectrum, model.dims);

  PredictionBundle bundle;
  for (int i = 1; i <= model.r(); ++i) {
    const OutlierPrediction o = predict_outlier(law, model, i);
    bundle.spikes.push_back(o);
    bundle.ds.push_back(model.spikes.ds[static_cast<size_t>(i - 1)]);
    bundle.sigma_tildes.push_back(model.tilde_sigmas[static_cast<size_t>(i - 1)]);
    bundle.explained_variances.push_back(
        o.admissible ? explained_variance(law, model, i)
                     : std::numeric_limits<double>::quiet_NaN());
  }
  if (cfg.weights_path) {
    std::vector<double> ells = weights_from_csv(read_file(*cfg.weights_path));
    double tau = cfg.weights_tau;
    if (!(tau > 0.0)) {
      tau = std::numeric_limits<double>::infinity();
      for (double e : ells) tau = std::min(tau, std::min(e, 1.0 / e));
    }
    const WeightSequence w = make_weights(std::move(ells), tau, model.r());
    bundle.with_weights = true;
    for (int i = 1; i <= model.r(); ++i)
      bundle.projection_sums.push_back(
          bundle.spikes[static_cast<size_t>(i - 1)].admissible
              ? weighted_projection_sum(law, model, i, w)
              : std::numeric_limits<double>::quiet_NaN());
  }

  ensure_dir(cfg.out);
  write_file(join(cfg.out, "predictions.json"), predictions_json(meta, bundle));
  write_file(join(cfg.out, "edges.json"), edges_json(meta, law));
  std::printf("wrote predictions.json and edges.json to %s\n", cfg.out.c_str());
  return 0;
}

int run_density(const spikecov::RunConfig& cfg, const spikecov::Meta& meta) {
  using namespace spikecov;
  const SpikedModel& model = require_model(cfg, "density");
  const EquivalentLaw law = EquivalentLaw::solve(model.spectrum, model.dims);
  const DensityCurve curve = law.density_curve(cfg.density_grid);
  ensure_dir(cfg.out);
  write_file(join(cfg.out, "density.csv"), density_csv(meta, curve));
  std::printf("wrote density.csv to %s\n", cfg.out.c_str());
  return 0;
}

int run_quantiles(const spikecov::RunConfig& cfg, const spikecov::Meta& meta) {
  using namespace spikecov;
  const SpikedModel& model = require_model(cfg, "quantiles");
  const EquivalentLaw law = EquivalentLaw::solve(model.spectrum, model.dims);
  const std::vector<double> gammas = law.quantiles(cfg.quantiles_n);
  ensure_dir(cfg.out);
  write_file(join(cfg.out, "quantiles.csv"), quantiles_csv(meta, gammas));
  std::printf("wrote quantiles.csv to %s\n", cfg.out.c_str());
  return 0;
}

int run_sweep(const spikecov::RunConfig& cfg, const spikecov::Meta& meta,
              int threads, bool gate_on_pass) {
  using namespace spikecov;
  if (!cfg.sweep)
    throw SchemaError(std::string(gate_on_pass ? "verify" : "simulate") +
                      " needs a sweep section");
  const SweepResult result =
      sweep_and_fit(*cfg.sweep, cfg.n_grid, cfg.reps, cfg.quantities, threads);
  ensure_dir(cfg.out);
  write_file(join(cfg.out, "trials.csv"), sweep_csv(meta, result));
  write_file(join(cfg.out, "ratefit.json"), ratefit_json(meta, result));

  bool all = true;
  for (const RateFit& fit : result.fits) {
    all = all && fit.pass;
    std::printf("%-20s slope %s target %s %s\n", to_string(fit.quantity),
                format_g17(fit.slope).c_str(),
                format_g17(fit.target_exponent).c_str(),
                fit.pass ? "ok" : "OUT OF BAND");
  }
  std::printf("wrote trials.csv and ratefit.json to %s\n", cfg.out.c_str());
  return gate_on_pass && !all ? 1 : 0;
}

int run_mp_check(double phi, const std::optional<double>& d) {
  using namespace spikecov;
  const MpLaw law = mp_law(phi);
  std::printf("gamma_plus %s\n", format_g17(law.gamma_plus).c_str());
  std::printf("gamma_minus %s\n", format_g17(law.gamma_minus).c_str());
  std::printf("c1 %s\n", format_g17(law.c1).c_str());
  std::printf("c2 %s\n", format_g17(law.c2).c_str());
  if (d) {
    const auto [a, b] = mp_outlier(phi, *d);
    std::printf("a %s\n", format_g17(a).c_str());
    std::printf("b %s\n", format_g17(b).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiked sample covariance calculator"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* predict = app.add_subcommand(
      "predict", "outlier locations and alignments for a concrete model");
  add_common(predict, opt, false);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run a finite-size sweep and fit convergence rates");
  add_common(simulate, opt, true);
  CLI::App* verify = app.add_subcommand(
      "verify", "run a sweep and gate on the calibration bands");
  add_common(verify, opt, true);
  CLI::App* density = app.add_subcommand(
      "density", "tabulate the limiting spectral density");
  add_common(density, opt, false);
  CLI::App* quantiles = app.add_subcommand(
      "quantiles", "tabulate the limiting spectral quantiles");
  add_common(quantiles, opt, false);

  double mp_phi = 0;
  std::optional<double> mp_d;
  CLI::App* mp_check = app.add_subcommand(
      "mp-check", "closed-form identity-spectrum self-check");
  mp_check->add_option("--phi", mp_phi, "aspect ratio p/n")->required();
  mp_check->add_option("--d", mp_d, "spike strength");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (mp_check->parsed()) return run_mp_check(mp_phi, mp_d);

    spikecov::RunConfig cfg = spikecov::parse_config(spikecov::read_file(opt.config_path));
    if (opt.out) cfg.out = *opt.out;
    if (opt.seed) {
      cfg.seed = *opt.seed;
      if (cfg.sweep) cfg.sweep->seed = *opt.seed;
    }
    const spikecov::Meta meta{kTool, cfg.seed,
                              spikecov::hex64(spikecov::fnv1a64(cfg.raw))};

    if (predict->parsed()) return run_predict(cfg, meta);
    if (density->parsed()) return run_density(cfg, meta);
    if (quantiles->parsed()) return run_quantiles(cfg, meta);
    if (simulate->parsed()) return run_sweep(cfg, meta, opt.threads, false);
    if (verify->parsed()) return run_sweep(cfg, meta, opt.threads, true);
  } catch (const spikecov::SchemaError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const spikecov::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
