#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikecov/model.hpp"
#include "spikecov/montecarlo.hpp"

namespace spikecov {

// Schema-validated run configuration. Unknown keys anywhere in the document
// are rejected with SchemaError before any computation. Full schema in the
// README.
struct RunConfig {
  std::optional<SpikedModel> model;  // concrete model: predict/density/quantiles

  std::uint64_t seed = 1;
  std::string out = ".";

  // predict
  std::optional<std::string> weights_path;
  double weights_tau = 0;  // 0: derive from the weight range

  // density / quantiles
  int density_grid = 512;
  int quantiles_n = 100;

  // simulate / verify
  std::optional<SweepTemplate> sweep;
  std::vector<int> n_grid;
  std::vector<int> reps;
  std::vector<Quantity> quantities;

  std::string raw;  // exact config bytes, hashed into output metadata
};

RunConfig parse_config(const std::string& raw_bytes);

// CSV weight file: header "ell", one value per row, p rows.
std::vector<double> weights_from_csv(const std::string& text);

}  // namespace spikecov
