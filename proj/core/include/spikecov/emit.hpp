#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spikecov/law.hpp"
#include "spikecov/montecarlo.hpp"
#include "spikecov/outliers.hpp"

namespace spikecov {

// 17 significant digits, C locale, shortest spelling of %.17g; the single
// float formatter used for every emitted file so outputs are byte-stable.
std::string format_g17(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Common metadata block: tool version, master seed, config hash. CSV files
// carry it as leading '#' lines; JSON files as a "meta" object.
struct Meta {
  std::string tool;         // "spikecov 0.1.0"
  std::uint64_t seed = 0;
  std::string config_hash;  // fnv1a64 hex of the raw config bytes
};

std::string csv_header(const Meta& meta);
std::string meta_json(const Meta& meta, int indent);

// quantiles.csv: columns i, gamma_i
std::string quantiles_csv(const Meta& meta, const std::vector<double>& gammas);
// density.csv: columns E, rho; footer row records the quadrature mass
std::string density_csv(const Meta& meta, const DensityCurve& curve);
// trials.csv: columns n, p, quantity, median_err, q25, q75, reps
std::string sweep_csv(const Meta& meta, const SweepResult& sweep);

// predictions.json: per spike {i, d, sigma_tilde, a, b, admissible,
// edge_margin, near_critical}; explained_variance / projection_sum entries
// when weights are supplied.
struct PredictionBundle {
  std::vector<OutlierPrediction> spikes;
  std::vector<double> ds, sigma_tildes;
  bool with_weights = false;
  std::vector<double> explained_variances;  // per admissible spike, NaN otherwise
  std::vector<double> projection_sums;
};
std::string predictions_json(const Meta& meta, const PredictionBundle& bundle);

// edges.json: {gamma_minus, gamma_plus, c1, c2, m1}
std::string edges_json(const Meta& meta, const EquivalentLaw& law);

// ratefit.json: [{quantity, slope, intercept, r2, target_exponent, pass}, ...]
std::string ratefit_json(const Meta& meta, const SweepResult& sweep);

void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace spikecov
