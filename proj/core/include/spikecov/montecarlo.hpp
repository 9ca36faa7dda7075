#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spikecov/law.hpp"
#include "spikecov/model.hpp"
#include "spikecov/outliers.hpp"

namespace spikecov {

enum class EntryDistribution { gaussian, rademacher, uniform };

const char* to_string(EntryDistribution d);
EntryDistribution distribution_from_string(const std::string& s);

struct TrialSpec {
  SpikedModel model;
  EntryDistribution distribution = EntryDistribution::gaussian;
  std::uint64_t seed = 1;          // master seed
  long trial_index = 0;
  std::vector<std::pair<int, int>> projections_requested;  // 1-based (i, j)
};

// p x n matrix with i.i.d. standardized entries scaled by (pn)^{-1/4}; fully
// determined by (seed, trial_index) at the bit level.
Eigen::MatrixXd sample_matrix(const TrialSpec& spec);

// Per-index spiked spectrum: sigma_tilde_j for j <= r, sigma_j beyond.
std::vector<double> tilde_sigma_expanded(const SpikedModel& model);

// Eigenbasis V from basis_policy. identity returns the identity matrix;
// haar_random orthonormalizes a seeded standard-Gaussian square matrix
// (O(p^3): simulation exercises at small p only).
Eigen::MatrixXd basis_matrix(const SpikedModel& model);

struct TrialResult {
  std::vector<double> eigs;   // nontrivial spectrum, descending, length n
  std::vector<double> eigs0;  // non-spiked spectrum from the same X (optional)
  std::map<std::pair<int, int>, double> projections;  // <u_i, v_j>^2
  std::vector<int> vector_indices;     // distinct requested i, ascending
  Eigen::MatrixXd vectors;             // u_i columns, one per vector_indices
  std::vector<double> residual_norms;  // ||Q u_i - lambda_i u_i||, per column
  std::vector<int> degenerate;         // requested i with a near-degenerate gap
};

// Companion-matrix path: forms the n x n matrix X^T Sigma X, never the p x p
// product (mandatory above p = 2048; the direct path lives in test oracles).
TrialResult spectral_decompose(const SpikedModel& model,
                               const Eigen::MatrixXd& X,
                               const std::vector<std::pair<int, int>>& requested,
                               bool with_nonspiked = false);

// Deterministic per-model comparison targets, evaluated once per sweep point.
struct TrialTargets {
  std::vector<double> a;   // outlier locations, i = 1..r (NaN if subcritical)
  std::vector<double> b;   // alignments, i = 1..r
  double gamma1 = 0;       // first quantile (sticking target for i = r+1)
  int deloc_index = 0;     // bulk sample index probed for delocalization
  bool with_weights = false;
  WeightSequence ell;      // weights for the projection sum (when with_weights)
  double wps = 0;          // predicted weighted projection sum for i = 1
  double ev = 0;           // predicted explained variance for i = 1
  bool with_interlacing = false;
};

// with_weights installs the spectral profile ell_j = sigma_j (constant across
// the top r+1 indices whenever the leading atom holds them), so the
// projection-sum error is not the alignment error in disguise.
TrialTargets make_trial_targets(const EquivalentLaw& law,
                                const SpikedModel& model, int deloc_offset,
                                bool with_weights, bool with_interlacing);

struct TrialRecord {
  long trial_index = 0;
  std::vector<double> outlier_err;  // |lambda_i - a_i|, i = 1..r
  double align_err = 0;             // |<u_1, v_1>^2 - b_1|
  double sticking_err = 0;          // |lambda_{r+1} - gamma_1|
  double deloc_max = 0;             // max_{j>r} <u_k, v_j>^2, k = deloc_index
  double wps_err = 0;               // weighted projection sum vs prediction
  double ev_err = 0;                // quadratic form u_1^T Sigma u_1 vs prediction
  int interlacing_violations = 0;   // beyond 1e-10 tolerance
  bool no_outlier_regime = false;   // model has no admissible spike
};

TrialRecord run_trial(const TrialSpec& spec, const EquivalentLaw& law,
                      const TrialTargets& targets);

enum class Quantity {
  outlier_location,
  outlier_alignment,
  edge_sticking,
  delocalization,
  weighted_sum,
  explained_variance,
};

const char* to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

struct AtomWeight {
  double value = 0;
  double weight = 0;  // fraction of p, weights sum to 1
};

// Model template for n-sweeps: p = round(c * n^alpha) per grid point, atom
// weights apportioned to multiplicities by largest remainder (ties toward the
// larger value), spike strengths d_i = g_i * phi^{1/2} so admissibility is
// preserved as phi grows.
struct SweepTemplate {
  std::vector<AtomWeight> atoms;
  std::vector<double> gs;  // spike strengths in units of phi^{1/2}
  double alpha = 1.5;
  double c = 1.0;
  double varpi = 0.05;
  EntryDistribution distribution = EntryDistribution::gaussian;
  std::uint64_t seed = 1;
  int deloc_offset = 5;  // probed non-outlier index = r + deloc_offset
};

SpikedModel instantiate(const SweepTemplate& tpl, int n);
long multiplicity_of(const std::vector<AtomWeight>& atoms, long p, int k);

struct RateFit {
  Quantity quantity;
  std::vector<int> ns;
  std::vector<long> ps;
  std::vector<int> reps;
  std::vector<double> medians, q25, q75;
  double slope = 0, intercept = 0, r2 = 0;
  double target_exponent = 0;
  double band = 0;  // calibration half-width on the slope
  bool pass = false;
};

double target_exponent_of(Quantity q, double alpha);
double band_of(Quantity q);

struct SweepResult {
  std::vector<RateFit> fits;  // one per requested quantity, request order
};

// Trials execute concurrently (worker pool of `threads`); records merge in
// trial_index order so results are independent of scheduling.
SweepResult sweep_and_fit(const SweepTemplate& tpl,
                          const std::vector<int>& n_grid,
                          const std::vector<int>& reps_per_n,
                          const std::vector<Quantity>& quantities,
                          int threads = 1);

// Order-preserving parallel map: fn(i) for i in [0, total).
void parallel_trials(int total, int threads, const std::function<void(int)>& fn);

double median_of(std::vector<double> v);
double quantile_of(std::vector<double> v, double q);  // linear interpolation

}  // namespace spikecov
