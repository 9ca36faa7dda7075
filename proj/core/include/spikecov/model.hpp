#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spikecov {

class EquivalentLaw;

struct Dimensions {
  int n = 0;        // sample size
  long p = 0;       // dimensionality
  double phi = 0;   // p/n, > 1
};

// Throws DimensionMismatch unless p >= n >= 2 and p/n > 1.
Dimensions make_dimensions(long p, int n);

struct SpectrumAtom {
  double value = 0;
  long mult = 0;
};

// Population spectrum of the non-spiked covariance, compressed to distinct
// atoms sorted by descending value. Indices below are 1-based and follow the
// descending order sigma_1 >= ... >= sigma_p.
struct PopulationSpectrum {
  std::vector<SpectrumAtom> atoms;
  long p = 0;          // sum of multiplicities
  double varsigma = 0; // declared bound: varsigma <= sigma_p and sigma_1 <= 1/varsigma

  double sigma(long i) const;
  std::vector<double> expanded() const;
  double sigma_max() const { return atoms.front().value; }
  double sigma_min() const { return atoms.back().value; }
  double mean() const;
};

// Atoms are merged, sorted descending and validated. When varsigma is not
// supplied it defaults to min(sigma_p, 1/sigma_1)*(1 - 1e-9), which lies in
// (0,1) for every valid spectrum. strict rejects unsorted input instead of
// sorting it.
PopulationSpectrum make_spectrum(std::vector<SpectrumAtom> atoms,
                                 std::optional<double> varsigma = std::nullopt,
                                 bool strict = false);
// Flat value sequence; adjacent equal values collapse into one atom. A
// template so brace-enclosed atom lists never match this overload.
template <class Scalar>
  requires std::same_as<Scalar, double>
PopulationSpectrum make_spectrum(const std::vector<Scalar>& sigmas,
                                 std::optional<double> varsigma = std::nullopt,
                                 bool strict = false) {
  std::vector<SpectrumAtom> atoms;
  for (double v : sigmas) {
    if (!atoms.empty() && atoms.back().value == v)
      atoms.back().mult += 1;
    else
      atoms.push_back({v, 1});
  }
  return make_spectrum(std::move(atoms), varsigma, strict);
}

struct SpikeSet {
  std::vector<double> ds;  // descending, positive
  double varpi = 0.05;     // separation/window parameter, in (0,1)
};

struct BasisPolicy {
  enum Kind { identity, haar_random };
  Kind kind = identity;
  std::uint64_t seed = 0;  // haar_random only
};

// Fixed cap on the number of spikes; documented in the README.
inline constexpr int max_spikes = 32;

struct SpikedModel {
  Dimensions dims;
  PopulationSpectrum spectrum;
  SpikeSet spikes;
  std::vector<double> tilde_sigmas;  // (1 + ds[i]) * sigma(i+1), exactly
  BasisPolicy basis;

  int r() const { return static_cast<int>(spikes.ds.size()); }
};

SpikedModel build_model(const Dimensions& dims, PopulationSpectrum spectrum,
                        SpikeSet spikes, BasisPolicy basis = {},
                        bool strict = false);

struct SpikeWindow {
  int i = 0;        // 1-based spike index
  double lower = 0; // admissible window for sigma_tilde_i: (lower, upper)
  double upper = 0;
  bool admissible = false;
};

struct ValidationReport {
  std::vector<SpikeWindow> windows;
  // pairs (i, j), i < j, with |sigma_tilde_i - sigma_tilde_j| <= phi^{1/2} varpi
  std::vector<std::pair<int, int>> separation_violations;
  bool spectrum_lower_ok = false;  // varsigma <= sigma_p
  bool spectrum_upper_ok = false;  // sigma_1 <= 1/varsigma

  bool all_admissible() const;
};

// Report-style: every violation is a flag, never a failure. Pure.
ValidationReport validate_assumptions(const SpikedModel& model,
                                      const EquivalentLaw& law);

// JSON model document (schema in the README):
//   {"n":.., "p":.., "spectrum":{"atoms":[{"value":..,"mult":..},..]},
//    "spikes":[..], "varpi":.., "basis":"identity"|{"haar":seed}}
// Unknown keys are rejected with SchemaError.
SpikedModel model_from_json(const std::string& text, bool strict = false);
std::string model_to_json(const SpikedModel& m);

}  // namespace spikecov
