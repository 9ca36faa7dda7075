#include "spikecov/emit.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <string>

#include "spikecov/errors.hpp"

namespace spikecov {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

namespace {

// JSON has no spelling for non-finite doubles; they become null.
std::string json_number(double v) {
  return std::isfinite(v) ? format_g17(v) : std::string("null");
}

const char* json_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string csv_header(const Meta& meta) {
  std::string s = "# " + meta.tool + "\n";
  s += "# seed " + std::to_string(meta.seed) + "\n";
  s += "# config " + meta.config_hash + "\n";
  return s;
}

std::string meta_json(const Meta& meta, int indent) {
  const std::string in(static_cast<size_t>(indent), ' ');
  const std::string close(static_cast<size_t>(indent >= 2 ? indent - 2 : 0), ' ');
  std::string s = "{\n";
  s += in + "\"tool\": \"" + meta.tool + "\",\n";
  s += in + "\"seed\": " + std::to_string(meta.seed) + ",\n";
  s += in + "\"config\": \"" + meta.config_hash + "\"\n";
  s += close + "}";
  return s;
}

std::string quantiles_csv(const Meta& meta, const std::vector<double>& gammas) {
  std::string s = csv_header(meta) + "i,gamma\n";
  for (size_t i = 0; i < gammas.size(); ++i)
    s += std::to_string(i + 1) + "," + format_g17(gammas[i]) + "\n";
  return s;
}

std::string density_csv(const Meta& meta, const DensityCurve& curve) {
  std::string s = csv_header(meta) + "E,rho\n";
  for (size_t i = 0; i < curve.grid.size(); ++i)
    s += format_g17(curve.grid[i]) + "," + format_g17(curve.values[i]) + "\n";
  s += "# mass " + format_g17(curve.mass) + "\n";
  return s;
}

std::string sweep_csv(const Meta& meta, const SweepResult& sweep) {
  std::string s = csv_header(meta) + "n,p,quantity,median_err,q25,q75,reps\n";
  for (const RateFit& fit : sweep.fits)
    for (size_t g = 0; g < fit.ns.size(); ++g) {
      s += std::to_string(fit.ns[g]) + "," + std::to_string(fit.ps[g]) + ",";
      s += std::string(to_string(fit.quantity)) + ",";
      s += format_g17(fit.medians[g]) + "," + format_g17(fit.q25[g]) + ",";
      s += format_g17(fit.q75[g]) + "," + std::to_string(fit.reps[g]) + "\n";
    }
  return s;
}

std::string predictions_json(const Meta& meta, const PredictionBundle& bundle) {
  const size_t r = bundle.spikes.size();
  const bool with_ev = bundle.explained_variances.size() == r && r > 0;
  const bool with_ps =
      bundle.with_weights && bundle.projection_sums.size() == r;
  std::string s = "{\n  \"meta\": " + meta_json(meta, 4) + ",\n  \"spikes\": [";
  for (size_t k = 0; k < r; ++k) {
    const OutlierPrediction& o = bundle.spikes[k];
    s += k == 0 ? "\n" : ",\n";
    s += "    {\n";
    s += "      \"i\": " + std::to_string(o.i) + ",\n";
    s += "      \"d\": " + json_number(bundle.ds[k]) + ",\n";
    s += "      \"sigma_tilde\": " + json_number(bundle.sigma_tildes[k]) + ",\n";
    s += "      \"a\": " + json_number(o.a) + ",\n";
    s += "      \"b\": " + json_number(o.b) + ",\n";
    s += "      \"admissible\": " + std::string(json_bool(o.admissible)) + ",\n";
    s += "      \"edge_margin\": " + json_number(o.edge_margin) + ",\n";
    s += "      \"near_critical\": " + std::string(json_bool(o.near_critical));
    if (with_ev)
      s += ",\n      \"explained_variance\": " +
           json_number(bundle.explained_variances[k]);
    if (with_ps)
      s += ",\n      \"projection_sum\": " + json_number(bundle.projection_sums[k]);
    s += "\n    }";
  }
  s += r == 0 ? "]\n}\n" : "\n  ]\n}\n";
  return s;
}

std::string edges_json(const Meta& meta, const EquivalentLaw& law) {
  std::string s = "{\n  \"meta\": " + meta_json(meta, 4) + ",\n";
  s += "  \"gamma_minus\": " + format_g17(law.gamma_minus()) + ",\n";
  s += "  \"gamma_plus\": " + format_g17(law.gamma_plus()) + ",\n";
  s += "  \"c1\": " + format_g17(law.c1()) + ",\n";
  s += "  \"c2\": " + format_g17(law.c2()) + ",\n";
  s += "  \"m1\": " + format_g17(law.m1()) + "\n";
  s += "}\n";
  return s;
}

std::string ratefit_json(const Meta& meta, const SweepResult& sweep) {
  std::string s = "{\n  \"meta\": " + meta_json(meta, 4) + ",\n  \"fits\": [";
  for (size_t k = 0; k < sweep.fits.size(); ++k) {
    const RateFit& fit = sweep.fits[k];
    s += k == 0 ? "\n" : ",\n";
    s += "    {\n";
    s += "      \"quantity\": \"" + std::string(to_string(fit.quantity)) + "\",\n";
    s += "      \"slope\": " + json_number(fit.slope) + ",\n";
    s += "      \"intercept\": " + json_number(fit.intercept) + ",\n";
    s += "      \"r2\": " + json_number(fit.r2) + ",\n";
    s += "      \"target_exponent\": " + json_number(fit.target_exponent) + ",\n";
    s += "      \"pass\": " + std::string(json_bool(fit.pass)) + "\n";
    s += "    }";
  }
  s += sweep.fits.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return s;
}

void write_file(const std::string& path, std::string_view content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path + " for writing");
  const size_t written = std::fwrite(content.data(), 1, content.size(), f);
  const int rc = std::fclose(f);
  if (written != content.size() || rc != 0)
    throw Error("short write to " + path);
}

std::string read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  for (;;) {
    const size_t got = std::fread(buf, 1, sizeof buf, f);
    out.append(buf, got);
    if (got < sizeof buf) break;
  }
  const bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) throw Error("read failure on " + path);
  return out;
}

}  // namespace spikecov
