#include "spikecov/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikecov/errors.hpp"

namespace spikecov {

namespace {

void check_spike_index(const SpikedModel& model, int i) {
  if (i < 1 || i > model.r()) throw DimensionMismatch("spike index out of range");
}

OutlierPrediction require_admissible(const EquivalentLaw& law,
                                     const SpikedModel& model, int i) {
  const OutlierPrediction o = predict_outlier(law, model, i);
  if (!o.admissible) throw InadmissibleSpike("spike outside the admissibility window");
  return o;
}

}  // namespace

OutlierPrediction predict_outlier(const EquivalentLaw& law, const SpikedModel& model,
                                  int i) {
  check_spike_index(model, i);
  const double st = model.tilde_sigmas[static_cast<size_t>(i - 1)];

  OutlierPrediction o;
  o.i = i;
  o.m_at_a = -law.sqrt_phi() / st;

  const double shifted = law.c1() + model.spikes.varpi;
  const double lower = shifted < 0.0 ? -law.sqrt_phi() / shifted
                                     : std::numeric_limits<double>::infinity();
  const double upper = law.sqrt_phi() / model.spikes.varpi;
  o.admissible = st > lower && st < upper;
  if (!o.admissible) {
    o.a = o.b = o.edge_margin = std::numeric_limits<double>::quiet_NaN();
    return o;
  }

  o.a = law.f(o.m_at_a);
  o.b = law.sqrt_phi() / st * law.f(o.m_at_a, 1) / o.a;
  o.edge_margin = o.a - law.gamma_plus();
  o.near_critical = o.edge_margin < 1e-6;
  return o;
}

double outlier_location(const EquivalentLaw& law, const SpikedModel& model, int i) {
  return require_admissible(law, model, i).a;
}

double outlier_alignment(const EquivalentLaw& law, const SpikedModel& model, int i) {
  return require_admissible(law, model, i).b;
}

WeightSequence make_weights(std::vector<double> ells, double tau, int r) {
  if (!(tau > 0.0)) throw WeightBoundViolation("tau must be positive");
  if (static_cast<int>(ells.size()) < r + 1)
    throw DimensionMismatch("fewer weights than the spike hypothesis needs");
  for (double e : ells)
    if (!(e >= tau) || !(e <= 1.0 / tau))
      throw WeightBoundViolation("weight outside [tau, 1/tau]");
  for (int j = 1; j <= r; ++j)
    if (ells[static_cast<size_t>(j)] != ells[0])
      throw WeightBoundViolation("leading r+1 weights must coincide");
  return {std::move(ells), tau};
}

double m_dot(const EquivalentLaw& law, const SpikedModel& model, int i,
             const WeightSequence& ell) {
  const OutlierPrediction o = require_admissible(law, model, i);
  if (static_cast<long>(ell.ells.size()) != model.dims.p)
    throw DimensionMismatch("weight sequence length must equal p");

  // per-atom weight totals over the expanded descending index layout
  const double mphi = o.m_at_a / law.sqrt_phi();
  double sum = 0.0;
  size_t j = 0;
  for (const auto& atom : model.spectrum.atoms) {
    double block = 0.0;
    for (long k = 0; k < atom.mult; ++k, ++j) block += ell.ells[j];
    const double t = mphi + 1.0 / atom.value;
    sum += block / (atom.value * t * t);
  }
  const double mprime = 1.0 / law.f(o.m_at_a, 1);
  return law.phi() * mprime / (static_cast<double>(model.dims.p) * o.a) * sum;
}

double weighted_projection_sum(const EquivalentLaw& law, const SpikedModel& model,
                               int i, const WeightSequence& ell) {
  const OutlierPrediction o = require_admissible(law, model, i);
  const double st = model.tilde_sigmas[static_cast<size_t>(i - 1)];
  return o.a * o.b * st * m_dot(law, model, i, ell) / law.phi();
}

double explained_variance(const EquivalentLaw& law, const SpikedModel& model, int i) {
  const OutlierPrediction o = require_admissible(law, model, i);
  const double st = model.tilde_sigmas[static_cast<size_t>(i - 1)];
  const double tau =
      std::min(model.spectrum.sigma_min(), 1.0 / model.spectrum.sigma_max());
  const WeightSequence spectral =
      make_weights(model.spectrum.expanded(), tau, model.r());
  return st * o.b + weighted_projection_sum(law, model, i, spectral);
}

std::vector<NonOutlierTarget> nonoutlier_targets(const EquivalentLaw& law,
                                                 const SpikedModel& model, int n) {
  const int r = model.r();
  if (n <= r) throw DimensionMismatch("need more sample eigenvalues than spikes");
  const std::vector<double> g = law.quantiles(n);
  std::vector<NonOutlierTarget> out;
  out.reserve(static_cast<size_t>(n - r));
  for (int i = r + 1; i <= n; ++i) {
    NonOutlierTarget t;
    t.i = i;
    t.gamma = g[static_cast<size_t>(i - r - 1)];
    t.envelope = std::pow(static_cast<double>(std::min(i, n + 1 - i)), -1.0 / 3.0) *
                 std::pow(static_cast<double>(n), -2.0 / 3.0);
    out.push_back(t);
  }
  return out;
}

}  // namespace spikecov
