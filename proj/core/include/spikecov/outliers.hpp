#pragma once

#include <vector>

#include "spikecov/law.hpp"
#include "spikecov/model.hpp"

namespace spikecov {

struct OutlierPrediction {
  int i = 0;             // 1-based spike index
  double a = 0;          // predicted eigenvalue location
  double b = 0;          // predicted squared projection, in (0,1) when admissible
  double m_at_a = 0;     // -phi^{1/2}/sigma_tilde_i
  double edge_margin = 0;  // a - gamma_plus
  bool admissible = false;
  bool near_critical = false;  // admissible but edge_margin < 1e-6
};

// Full per-spike record; never throws on a subcritical spike (a, b and
// edge_margin are NaN with admissible=false).
OutlierPrediction predict_outlier(const EquivalentLaw& law,
                                  const SpikedModel& model, int i);

// Throwing accessors; InadmissibleSpike when the spike sits outside the
// admissibility window.
double outlier_location(const EquivalentLaw& law, const SpikedModel& model,
                        int i);
double outlier_alignment(const EquivalentLaw& law, const SpikedModel& model,
                         int i);

struct WeightSequence {
  std::vector<double> ells;  // length p, positive
  double tau = 0;            // declared bound: tau <= ell_j <= 1/tau
};

// Validates tau-bounds and the hypothesis ell_1 = ... = ell_{r+1}; throws
// WeightBoundViolation otherwise.
WeightSequence make_weights(std::vector<double> ells, double tau, int r);

// Derivative-of-m functional evaluated at a_i with m(a_i) and m'(a_i) in
// closed form (-phi^{1/2}/sigma_tilde_i and 1/f'(-phi^{1/2}/sigma_tilde_i)).
double m_dot(const EquivalentLaw& law, const SpikedModel& model, int i,
             const WeightSequence& ell);

// Limit of sum_{j>r} ell_j <u_i, v_j>^2: phi^{-1} a_i b_i sigma_tilde_i mdot.
// For ell == 1 this equals 1 - b_i exactly.
double weighted_projection_sum(const EquivalentLaw& law,
                               const SpikedModel& model, int i,
                               const WeightSequence& ell);

// sigma_tilde_i b_i + phi^{-1} a_i b_i sigma_tilde_i mdot with ell_j = sigma_j.
double explained_variance(const EquivalentLaw& law, const SpikedModel& model,
                          int i);

struct NonOutlierTarget {
  int i = 0;            // sample-eigenvalue index, r+1..n
  double gamma = 0;     // quantile gamma_{i-r}
  double envelope = 0;  // (min{i, n+1-i})^{-1/3} n^{-2/3}
};

std::vector<NonOutlierTarget> nonoutlier_targets(const EquivalentLaw& law,
                                                 const SpikedModel& model,
                                                 int n);

}  // namespace spikecov
