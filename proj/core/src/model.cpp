#include "spikecov/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "spikecov/errors.hpp"
#include "spikecov/law.hpp"

namespace spikecov {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw SchemaError(std::string("unknown key \"") + key + "\" in " + where);
  }
}

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("model document is not valid JSON");
  return j;
}

}  // namespace

Dimensions make_dimensions(long p, int n) {
  if (n < 2) throw DimensionMismatch("sample size n must be at least 2");
  if (p <= n) throw DimensionMismatch("p/n must exceed 1");
  return {n, p, static_cast<double>(p) / static_cast<double>(n)};
}

double PopulationSpectrum::sigma(long i) const {
  long seen = 0;
  for (const auto& a : atoms) {
    seen += a.mult;
    if (i <= seen) return a.value;
  }
  throw DimensionMismatch("spectrum index out of range");
}

std::vector<double> PopulationSpectrum::expanded() const {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(p));
  for (const auto& a : atoms) out.insert(out.end(), static_cast<size_t>(a.mult), a.value);
  return out;
}

double PopulationSpectrum::mean() const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += static_cast<double>(a.mult) * a.value;
  return acc / static_cast<double>(p);
}

PopulationSpectrum make_spectrum(std::vector<SpectrumAtom> atoms,
                                 std::optional<double> varsigma, bool strict) {
  if (atoms.empty()) throw DimensionMismatch("spectrum needs at least one atom");
  for (const auto& a : atoms) {
    if (!(a.value > 0.0)) throw NonPositiveEigenvalue("spectrum values must be positive");
    if (a.mult <= 0) throw DimensionMismatch("atom multiplicities must be positive");
  }
  if (strict) {
    for (size_t k = 1; k < atoms.size(); ++k)
      if (atoms[k - 1].value < atoms[k].value)
        throw UnsortedInputRejected("atoms must be sorted by descending value");
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const SpectrumAtom& a, const SpectrumAtom& b) { return a.value > b.value; });
  // merge equal neighbors
  std::vector<SpectrumAtom> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().value == a.value)
      merged.back().mult += a.mult;
    else
      merged.push_back(a);
  }

  PopulationSpectrum s;
  s.atoms = std::move(merged);
  s.p = 0;
  for (const auto& a : s.atoms) s.p += a.mult;
  if (varsigma) {
    if (!(*varsigma > 0.0) || !(*varsigma < 1.0))
      throw SchemaError("varsigma must lie in (0, 1)");
    s.varsigma = *varsigma;
  } else {
    s.varsigma = std::min(s.sigma_min(), 1.0 / s.sigma_max()) * (1.0 - 1e-9);
  }
  return s;
}

SpikedModel build_model(const Dimensions& dims, PopulationSpectrum spectrum,
                        SpikeSet spikes, BasisPolicy basis, bool strict) {
  if (spectrum.p != dims.p)
    throw DimensionMismatch("spectrum multiplicities must sum to p");
  if (!(spikes.varpi > 0.0) || !(spikes.varpi < 1.0))
    throw SchemaError("varpi must lie in (0, 1)");

  const int r = static_cast<int>(spikes.ds.size());
  if (r > max_spikes) throw DimensionMismatch("too many spikes (cap 32)");
  if (r >= dims.n) throw DimensionMismatch("spike count must stay below n");
  for (double d : spikes.ds)
    if (!(d > 0.0)) throw SchemaError("spike strengths must be positive");
  if (strict) {
    for (int i = 1; i < r; ++i)
      if (spikes.ds[i - 1] < spikes.ds[i])
        throw UnsortedInputRejected("spike strengths must be sorted descending");
  }
  std::sort(spikes.ds.rbegin(), spikes.ds.rend());

  SpikedModel m;
  m.dims = dims;
  m.spectrum = std::move(spectrum);
  m.spikes = std::move(spikes);
  m.basis = basis;
  m.tilde_sigmas.reserve(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i)
    m.tilde_sigmas.push_back((1.0 + m.spikes.ds[static_cast<size_t>(i)]) *
                             m.spectrum.sigma(i + 1));
  return m;
}

bool ValidationReport::all_admissible() const {
  for (const auto& w : windows)
    if (!w.admissible) return false;
  return true;
}

ValidationReport validate_assumptions(const SpikedModel& model,
                                      const EquivalentLaw& law) {
  ValidationReport rep;
  const double sp = std::sqrt(model.dims.phi);
  const double varpi = model.spikes.varpi;
  const double shifted = law.c1() + varpi;

  for (int i = 1; i <= model.r(); ++i) {
    SpikeWindow w;
    w.i = i;
    // c1 + varpi >= 0 collapses the window: nothing is admissible
    w.lower = shifted < 0.0 ? -sp / shifted : std::numeric_limits<double>::infinity();
    w.upper = sp / varpi;
    const double st = model.tilde_sigmas[static_cast<size_t>(i - 1)];
    w.admissible = st > w.lower && st < w.upper;
    rep.windows.push_back(w);
  }

  for (int i = 1; i <= model.r(); ++i)
    for (int j = i + 1; j <= model.r(); ++j) {
      const double gap = std::fabs(model.tilde_sigmas[static_cast<size_t>(i - 1)] -
                                   model.tilde_sigmas[static_cast<size_t>(j - 1)]);
      if (!(gap > sp * varpi)) rep.separation_violations.emplace_back(i, j);
    }

  const double vs = model.spectrum.varsigma;
  rep.spectrum_lower_ok = vs <= model.spectrum.sigma_min();
  rep.spectrum_upper_ok = model.spectrum.sigma_max() <= 1.0 / vs;
  return rep;
}

SpikedModel model_from_json(const std::string& text, bool strict) {
  const json j = parse_or_throw(text);
  if (!j.is_object()) throw SchemaError("model document must be an object");
  reject_unknown_keys(j, {"n", "p", "spectrum", "spikes", "varpi", "basis"}, "model");
  for (const char* key : {"n", "p", "spectrum", "spikes", "varpi", "basis"})
    if (!j.contains(key)) throw SchemaError(std::string("model is missing \"") + key + "\"");

  if (!j["n"].is_number_integer() || !j["p"].is_number_integer())
    throw SchemaError("n and p must be integers");
  const Dimensions dims = make_dimensions(j["p"].get<long>(), j["n"].get<int>());

  const json& jspec = j["spectrum"];
  if (!jspec.is_object()) throw SchemaError("spectrum must be an object");
  reject_unknown_keys(jspec, {"atoms", "varsigma"}, "spectrum");
  if (!jspec.contains("atoms") || !jspec["atoms"].is_array())
    throw SchemaError("spectrum.atoms must be an array");
  std::vector<SpectrumAtom> atoms;
  for (const json& ja : jspec["atoms"]) {
    if (!ja.is_object()) throw SchemaError("each atom must be an object");
    reject_unknown_keys(ja, {"value", "mult"}, "atom");
    if (!ja.contains("value") || !ja.contains("mult") || !ja["value"].is_number() ||
        !ja["mult"].is_number_integer())
      throw SchemaError("atoms need a numeric value and an integer mult");
    atoms.push_back({ja["value"].get<double>(), ja["mult"].get<long>()});
  }
  std::optional<double> varsigma;
  if (jspec.contains("varsigma")) {
    if (!jspec["varsigma"].is_number()) throw SchemaError("varsigma must be a number");
    varsigma = jspec["varsigma"].get<double>();
  }
  PopulationSpectrum spectrum = make_spectrum(std::move(atoms), varsigma, strict);

  if (!j["spikes"].is_array()) throw SchemaError("spikes must be an array");
  SpikeSet spikes;
  for (const json& jd : j["spikes"]) {
    if (!jd.is_number()) throw SchemaError("spike strengths must be numbers");
    spikes.ds.push_back(jd.get<double>());
  }
  if (!j["varpi"].is_number()) throw SchemaError("varpi must be a number");
  spikes.varpi = j["varpi"].get<double>();

  BasisPolicy basis;
  const json& jb = j["basis"];
  if (jb.is_string() && jb.get<std::string>() == "identity") {
    basis.kind = BasisPolicy::identity;
  } else if (jb.is_object()) {
    reject_unknown_keys(jb, {"haar"}, "basis");
    if (!jb.contains("haar") || !jb["haar"].is_number_integer())
      throw SchemaError("haar basis needs an integer seed");
    basis.kind = BasisPolicy::haar_random;
    basis.seed = jb["haar"].get<std::uint64_t>();
  } else {
    throw SchemaError("basis must be \"identity\" or {\"haar\": seed}");
  }

  return build_model(dims, std::move(spectrum), std::move(spikes), basis, strict);
}

std::string model_to_json(const SpikedModel& m) {
  json j;
  j["n"] = m.dims.n;
  j["p"] = m.dims.p;
  json atoms = json::array();
  for (const auto& a : m.spectrum.atoms) atoms.push_back({{"value", a.value}, {"mult", a.mult}});
  j["spectrum"] = {{"atoms", atoms}, {"varsigma", m.spectrum.varsigma}};
  j["spikes"] = m.spikes.ds;
  j["varpi"] = m.spikes.varpi;
  if (m.basis.kind == BasisPolicy::identity)
    j["basis"] = "identity";
  else
    j["basis"] = {{"haar", m.basis.seed}};
  return j.dump(2);
}

}  // namespace spikecov
