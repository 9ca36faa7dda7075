#include "spikecov/config.hpp"

#include <cmath>
#include <cstdlib>
#include <initializer_list>

#include <json.hpp>

#include "spikecov/errors.hpp"

namespace spikecov {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok)
      throw SchemaError(std::string("unknown key \"") + it.key() + "\" in " +
                        where);
  }
}

double require_number(const json& j, const char* key, const char* where) {
  if (!j.contains(key) || !j[key].is_number())
    throw SchemaError(std::string(where) + " needs a numeric \"" + key + "\"");
  return j[key].get<double>();
}

std::vector<int> int_array(const json& j, const char* key) {
  if (!j.is_array())
    throw SchemaError(std::string("\"") + key + "\" must be an array");
  std::vector<int> out;
  for (const json& e : j) {
    if (!e.is_number_integer())
      throw SchemaError(std::string("\"") + key + "\" entries must be integers");
    out.push_back(e.get<int>());
  }
  return out;
}

SweepTemplate sweep_from_json(const json& js) {
  if (!js.is_object()) throw SchemaError("sweep must be an object");
  reject_unknown(js,
                 {"atoms", "gs", "alpha", "c", "varpi", "distribution",
                  "deloc_offset"},
                 "sweep");
  SweepTemplate tpl;
  if (!js.contains("atoms") || !js["atoms"].is_array())
    throw SchemaError("sweep needs an atoms array");
  double wsum = 0.0;
  for (const json& ja : js["atoms"]) {
    if (!ja.is_object()) throw SchemaError("sweep atoms must be objects");
    reject_unknown(ja, {"value", "weight"}, "sweep atom");
    const double value = require_number(ja, "value", "sweep atom");
    const double weight = require_number(ja, "weight", "sweep atom");
    if (!(value > 0.0)) throw SchemaError("atom values must be positive");
    if (!(weight > 0.0)) throw SchemaError("atom weights must be positive");
    tpl.atoms.push_back({value, weight});
    wsum += weight;
  }
  if (tpl.atoms.empty()) throw SchemaError("sweep needs at least one atom");
  if (std::fabs(wsum - 1.0) > 1e-9)
    throw SchemaError("atom weights must sum to 1");
  if (!js.contains("gs") || !js["gs"].is_array())
    throw SchemaError("sweep needs a gs array");
  for (const json& jg : js["gs"]) {
    if (!jg.is_number() || !(jg.get<double>() > 0.0))
      throw SchemaError("gs entries must be positive numbers");
    tpl.gs.push_back(jg.get<double>());
  }
  if (js.contains("alpha")) {
    tpl.alpha = require_number(js, "alpha", "sweep");
    if (!(tpl.alpha > 1.0)) throw SchemaError("alpha must exceed 1");
  }
  if (js.contains("c")) {
    tpl.c = require_number(js, "c", "sweep");
    if (!(tpl.c > 0.0)) throw SchemaError("c must be positive");
  }
  if (js.contains("varpi")) {
    tpl.varpi = require_number(js, "varpi", "sweep");
    if (!(tpl.varpi > 0.0 && tpl.varpi < 1.0))
      throw SchemaError("varpi must lie in (0, 1)");
  }
  if (js.contains("distribution")) {
    if (!js["distribution"].is_string())
      throw SchemaError("distribution must be a string");
    tpl.distribution = distribution_from_string(js["distribution"].get<std::string>());
  }
  if (js.contains("deloc_offset")) {
    if (!js["deloc_offset"].is_number_integer() ||
        js["deloc_offset"].get<int>() < 1)
      throw SchemaError("deloc_offset must be a positive integer");
    tpl.deloc_offset = js["deloc_offset"].get<int>();
  }
  return tpl;
}

}  // namespace

RunConfig parse_config(const std::string& raw_bytes) {
  json j;
  try {
    j = json::parse(raw_bytes);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config is not valid json: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config must be a json object");
  reject_unknown(j,
                 {"seed", "out", "model", "weights", "tau", "density_grid",
                  "quantiles_n", "sweep", "n_grid", "reps", "quantities"},
                 "config");

  RunConfig cfg;
  cfg.raw = raw_bytes;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw SchemaError("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw SchemaError("out must be a string");
    cfg.out = j["out"].get<std::string>();
  }
  if (j.contains("model")) cfg.model = model_from_json(j["model"].dump());
  if (j.contains("weights")) {
    if (!j["weights"].is_string())
      throw SchemaError("weights must be a file path");
    cfg.weights_path = j["weights"].get<std::string>();
  }
  if (j.contains("tau")) {
    cfg.weights_tau = require_number(j, "tau", "config");
    if (!(cfg.weights_tau > 0.0)) throw SchemaError("tau must be positive");
  }
  if (j.contains("density_grid")) {
    if (!j["density_grid"].is_number_integer() ||
        j["density_grid"].get<int>() < 2)
      throw SchemaError("density_grid must be an integer of at least 2");
    cfg.density_grid = j["density_grid"].get<int>();
  }
  if (j.contains("quantiles_n")) {
    if (!j["quantiles_n"].is_number_integer() || j["quantiles_n"].get<int>() < 1)
      throw SchemaError("quantiles_n must be a positive integer");
    cfg.quantiles_n = j["quantiles_n"].get<int>();
  }
  if (j.contains("sweep")) cfg.sweep = sweep_from_json(j["sweep"]);
  if (j.contains("n_grid")) cfg.n_grid = int_array(j["n_grid"], "n_grid");
  if (j.contains("reps")) cfg.reps = int_array(j["reps"], "reps");
  if (j.contains("quantities")) {
    if (!j["quantities"].is_array())
      throw SchemaError("quantities must be an array");
    for (const json& q : j["quantities"]) {
      if (!q.is_string()) throw SchemaError("quantities entries must be strings");
      cfg.quantities.push_back(quantity_from_string(q.get<std::string>()));
    }
  }
  if (cfg.sweep) cfg.sweep->seed = cfg.seed;
  return cfg;
}

std::vector<double> weights_from_csv(const std::string& text) {
  size_t pos = 0;
  const auto next_line = [&](std::string& line) {
    if (pos >= text.size()) return false;
    const size_t nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  std::string line;
  if (!next_line(line) || line != "ell")
    throw SchemaError("weight files start with an \"ell\" header row");
  std::vector<double> out;
  while (next_line(line)) {
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw SchemaError("weight rows must be single numbers, got \"" + line + "\"");
    out.push_back(v);
  }
  return out;
}

}  // namespace spikecov
