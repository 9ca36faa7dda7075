#include "spikecov/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "spikecov/errors.hpp"
#include "spikecov/rng.hpp"

namespace spikecov {

const char* to_string(EntryDistribution d) {
  switch (d) {
    case EntryDistribution::gaussian: return "gaussian";
    case EntryDistribution::rademacher: return "rademacher";
    case EntryDistribution::uniform: return "uniform";
  }
  throw Error("unhandled entry distribution");
}

EntryDistribution distribution_from_string(const std::string& s) {
  if (s == "gaussian") return EntryDistribution::gaussian;
  if (s == "rademacher") return EntryDistribution::rademacher;
  if (s == "uniform") return EntryDistribution::uniform;
  throw SchemaError("unknown entry distribution \"" + s + "\"");
}

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::outlier_location: return "outlier_location";
    case Quantity::outlier_alignment: return "outlier_alignment";
    case Quantity::edge_sticking: return "edge_sticking";
    case Quantity::delocalization: return "delocalization";
    case Quantity::weighted_sum: return "weighted_sum";
    case Quantity::explained_variance: return "explained_variance";
  }
  throw Error("unhandled quantity");
}

Quantity quantity_from_string(const std::string& s) {
  if (s == "outlier_location") return Quantity::outlier_location;
  if (s == "outlier_alignment") return Quantity::outlier_alignment;
  if (s == "edge_sticking") return Quantity::edge_sticking;
  if (s == "delocalization") return Quantity::delocalization;
  if (s == "weighted_sum") return Quantity::weighted_sum;
  if (s == "explained_variance") return Quantity::explained_variance;
  throw SchemaError("unknown quantity \"" + s + "\"");
}

Eigen::MatrixXd sample_matrix(const TrialSpec& spec) {
  const long p = spec.model.dims.p;
  const int n = spec.model.dims.n;
  const double scale = std::pow(static_cast<double>(p) * static_cast<double>(n), -0.25);
  Stream rng(spec.seed, static_cast<std::uint64_t>(spec.trial_index));
  Eigen::MatrixXd X(p, n);
  double* d = X.data();  // column-major: column j filled before column j+1
  const long total = p * static_cast<long>(n);
  switch (spec.distribution) {
    case EntryDistribution::gaussian:
      for (long k = 0; k < total; ++k) d[k] = scale * rng.next_gaussian();
      break;
    case EntryDistribution::rademacher:
      for (long k = 0; k < total; ++k) d[k] = scale * rng.next_rademacher();
      break;
    case EntryDistribution::uniform:
      for (long k = 0; k < total; ++k) d[k] = scale * rng.next_uniform();
      break;
  }
  return X;
}

std::vector<double> tilde_sigma_expanded(const SpikedModel& model) {
  std::vector<double> ts = model.spectrum.expanded();
  for (int i = 0; i < model.r(); ++i)
    ts[static_cast<size_t>(i)] = model.tilde_sigmas[static_cast<size_t>(i)];
  return ts;
}

Eigen::MatrixXd basis_matrix(const SpikedModel& model) {
  const long p = model.dims.p;
  if (model.basis.kind == BasisPolicy::identity)
    return Eigen::MatrixXd::Identity(p, p);
  Stream rng(model.basis.seed, 0u);
  Eigen::MatrixXd G(p, p);
  double* d = G.data();
  for (long k = 0; k < p * p; ++k) d[k] = rng.next_gaussian();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix the gauge so the factorization (and hence V) is unique
  for (long j = 0; j < p; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

TrialResult spectral_decompose(const SpikedModel& model, const Eigen::MatrixXd& X,
                               const std::vector<std::pair<int, int>>& requested,
                               bool with_nonspiked) {
  const long p = model.dims.p;
  const int n = model.dims.n;
  if (X.rows() != p || X.cols() != n)
    throw DimensionMismatch("sample matrix must be p x n");

  const bool id = model.basis.kind == BasisPolicy::identity;
  Eigen::MatrixXd V;
  if (!id) V = basis_matrix(model);

  const auto weigh = [&](const std::vector<double>& diag) {
    Eigen::VectorXd sq(p);
    for (long j = 0; j < p; ++j) sq[j] = std::sqrt(diag[static_cast<size_t>(j)]);
    if (id) return Eigen::MatrixXd(sq.asDiagonal() * X);
    return Eigen::MatrixXd(V * (sq.asDiagonal() * (V.transpose() * X)));
  };

  const auto companion_eigs = [&](const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    C.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success)
      throw EigensolverFailure("companion eigensolve did not converge");
    return es;
  };

  const Eigen::MatrixXd Y = weigh(tilde_sigma_expanded(model));
  const auto es = companion_eigs(Y);

  TrialResult out;
  out.eigs.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k)
    out.eigs[static_cast<size_t>(k)] = es.eigenvalues()[n - 1 - k];

  std::vector<int> idx;
  for (const auto& [i, j] : requested) {
    if (i < 1 || i > n || j < 1 || j > p)
      throw DimensionMismatch("projection index out of range");
    idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  out.vector_indices = idx;
  out.vectors.resize(p, static_cast<long>(idx.size()));
  const double lead = out.eigs[0];
  for (size_t c = 0; c < idx.size(); ++c) {
    const int i = idx[c];
    const double lam = out.eigs[static_cast<size_t>(i - 1)];
    Eigen::VectorXd u = Y * es.eigenvectors().col(n - i);
    const double nrm = u.norm();
    if (nrm == 0.0) throw EigensolverFailure("companion eigenvector has a null image");
    u /= nrm;
    out.vectors.col(static_cast<long>(c)) = u;
    out.residual_norms.push_back((Y * (Y.transpose() * u) - lam * u).norm());
    double gap = std::numeric_limits<double>::infinity();
    if (i > 1) gap = std::min(gap, out.eigs[static_cast<size_t>(i - 2)] - lam);
    if (i < n) gap = std::min(gap, lam - out.eigs[static_cast<size_t>(i)]);
    if (gap < 1e-6 * lead) out.degenerate.push_back(i);
  }

  std::map<int, Eigen::VectorXd> coeff_cache;
  for (const auto& [i, j] : requested) {
    const size_t c = static_cast<size_t>(
        std::lower_bound(idx.begin(), idx.end(), i) - idx.begin());
    double v;
    if (id) {
      v = out.vectors(j - 1, static_cast<long>(c));
    } else {
      auto it = coeff_cache.find(i);
      if (it == coeff_cache.end())
        it = coeff_cache.emplace(i, V.transpose() * out.vectors.col(static_cast<long>(c)))
                 .first;
      v = it->second[j - 1];
    }
    out.projections[{i, j}] = v * v;
  }

  if (with_nonspiked) {
    const auto es0 = companion_eigs(weigh(model.spectrum.expanded()));
    out.eigs0.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
      out.eigs0[static_cast<size_t>(k)] = es0.eigenvalues()[n - 1 - k];
  }
  return out;
}

TrialTargets make_trial_targets(const EquivalentLaw& law, const SpikedModel& model,
                                int deloc_offset, bool with_weights,
                                bool with_interlacing) {
  TrialTargets t;
  for (int i = 1; i <= model.r(); ++i) {
    const OutlierPrediction o = predict_outlier(law, model, i);
    t.a.push_back(o.a);
    t.b.push_back(o.b);
  }
  t.gamma1 = law.quantile(1, model.dims.n);
  t.deloc_index = model.r() + deloc_offset;
  t.with_weights = with_weights;
  t.with_interlacing = with_interlacing;
  t.wps = t.ev = std::numeric_limits<double>::quiet_NaN();
  if (with_weights) {
    const double tau =
        std::min(model.spectrum.sigma_min(), 1.0 / model.spectrum.sigma_max());
    t.ell = make_weights(model.spectrum.expanded(), tau, model.r());
    if (!t.a.empty() && std::isfinite(t.a[0])) {
      t.wps = weighted_projection_sum(law, model, 1, t.ell);
      t.ev = explained_variance(law, model, 1);
    }
  }
  return t;
}

TrialRecord run_trial(const TrialSpec& spec, const EquivalentLaw& law,
                      const TrialTargets& targets) {
  (void)law;
  const SpikedModel& model = spec.model;
  const int n = model.dims.n;
  const long p = model.dims.p;
  const int r = model.r();

  TrialRecord rec;
  rec.trial_index = spec.trial_index;
  const bool lead = !targets.a.empty() && std::isfinite(targets.a[0]);
  bool any = false;
  for (double a : targets.a) any = any || std::isfinite(a);
  rec.no_outlier_regime = !any;

  std::vector<std::pair<int, int>> req;
  if (lead) req.emplace_back(1, 1);
  const int k = targets.deloc_index;
  const bool probe = k >= 1 && k <= n;
  if (probe) req.emplace_back(k, 1);

  const TrialResult res =
      spectral_decompose(model, sample_matrix(spec), req, targets.with_interlacing);

  if (!rec.no_outlier_regime)
    for (int i = 1; i <= r; ++i)
      rec.outlier_err.push_back(std::fabs(res.eigs[static_cast<size_t>(i - 1)] -
                                          targets.a[static_cast<size_t>(i - 1)]));
  if (lead) rec.align_err = std::fabs(res.projections.at({1, 1}) - targets.b[0]);
  rec.sticking_err = std::fabs(res.eigs[static_cast<size_t>(r)] - targets.gamma1);

  const bool id = model.basis.kind == BasisPolicy::identity;
  Eigen::MatrixXd V;
  if (!id && (probe || (lead && targets.with_weights))) V = basis_matrix(model);
  const auto coeffs = [&](int i) {
    const long c = std::lower_bound(res.vector_indices.begin(),
                                    res.vector_indices.end(), i) -
                   res.vector_indices.begin();
    if (id) return Eigen::VectorXd(res.vectors.col(c));
    return Eigen::VectorXd(V.transpose() * res.vectors.col(c));
  };

  if (probe) {
    const Eigen::VectorXd ck = coeffs(k);
    double mx = 0.0;
    for (long j = r; j < p; ++j) mx = std::max(mx, ck[j] * ck[j]);
    rec.deloc_max = mx;
  }
  if (lead && targets.with_weights) {
    const Eigen::VectorXd c1 = coeffs(1);
    double wps = 0.0;
    for (long j = r; j < p; ++j)
      wps += targets.ell.ells[static_cast<size_t>(j)] * c1[j] * c1[j];
    rec.wps_err = std::fabs(wps - targets.wps);
    const std::vector<double> ts = tilde_sigma_expanded(model);
    double ev = 0.0;
    for (long j = 0; j < p; ++j) ev += ts[static_cast<size_t>(j)] * c1[j] * c1[j];
    rec.ev_err = std::fabs(ev - targets.ev);
  }
  if (targets.with_interlacing) {
    const double tol = 1e-10 * std::max(1.0, res.eigs[0]);
    for (int i = 0; i < n; ++i) {
      const size_t si = static_cast<size_t>(i);
      if (res.eigs[si] < res.eigs0[si] - tol) ++rec.interlacing_violations;
      if (i >= r && res.eigs[si] > res.eigs0[static_cast<size_t>(i - r)] + tol)
        ++rec.interlacing_violations;
    }
  }
  return rec;
}

long multiplicity_of(const std::vector<AtomWeight>& atoms, long p, int k) {
  const size_t K = atoms.size();
  if (k < 0 || static_cast<size_t>(k) >= K)
    throw DimensionMismatch("atom index out of range");
  std::vector<long> mult(K);
  std::vector<double> rem(K);
  long used = 0;
  for (size_t i = 0; i < K; ++i) {
    const double quota = atoms[i].weight * static_cast<double>(p);
    const double fl = std::floor(quota);
    mult[i] = static_cast<long>(fl);
    rem[i] = quota - fl;
    used += mult[i];
  }
  std::vector<size_t> order(K);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (rem[a] != rem[b]) return rem[a] > rem[b];
    if (atoms[a].value != atoms[b].value) return atoms[a].value > atoms[b].value;
    return a < b;
  });
  for (long left = p - used, t = 0; left > 0; --left, ++t)
    ++mult[order[static_cast<size_t>(t) % K]];
  return mult[static_cast<size_t>(k)];
}

SpikedModel instantiate(const SweepTemplate& tpl, int n) {
  const long p =
      std::llround(tpl.c * std::pow(static_cast<double>(n), tpl.alpha));
  const Dimensions dims = make_dimensions(p, n);
  std::vector<SpectrumAtom> atoms;
  for (int k = 0; k < static_cast<int>(tpl.atoms.size()); ++k) {
    const long m = multiplicity_of(tpl.atoms, p, k);
    if (m > 0) atoms.push_back({tpl.atoms[static_cast<size_t>(k)].value, m});
  }
  SpikeSet spikes;
  const double sp = std::sqrt(dims.phi);
  for (double g : tpl.gs) spikes.ds.push_back(g * sp);
  spikes.varpi = tpl.varpi;
  return build_model(dims, make_spectrum(std::move(atoms)), std::move(spikes));
}

double target_exponent_of(Quantity q, double alpha) {
  switch (q) {
    case Quantity::outlier_location: return -0.5;
    case Quantity::outlier_alignment: return -0.5 * alpha;
    case Quantity::edge_sticking: return -2.0 / 3.0;
    case Quantity::delocalization: return -alpha;
    case Quantity::weighted_sum: return -0.25;
    case Quantity::explained_variance: return -0.25;
  }
  throw Error("unhandled quantity");
}

double band_of(Quantity q) {
  switch (q) {
    case Quantity::outlier_location: return 0.2;
    case Quantity::outlier_alignment: return 0.35;
    case Quantity::edge_sticking: return 0.25;
    case Quantity::delocalization: return 0.3;
    case Quantity::weighted_sum: return 0.35;
    case Quantity::explained_variance: return 0.35;
  }
  throw Error("unhandled quantity");
}

namespace {

bool record_value(const TrialRecord& rec, Quantity q, double& v) {
  switch (q) {
    case Quantity::outlier_location:
      if (rec.outlier_err.empty()) return false;
      v = rec.outlier_err[0];
      return true;
    case Quantity::outlier_alignment:
      if (rec.no_outlier_regime) return false;
      v = rec.align_err;
      return true;
    case Quantity::edge_sticking:
      v = rec.sticking_err;
      return true;
    case Quantity::delocalization:
      v = rec.deloc_max;
      return true;
    case Quantity::weighted_sum:
      if (rec.no_outlier_regime) return false;
      v = rec.wps_err;
      return true;
    case Quantity::explained_variance:
      if (rec.no_outlier_regime) return false;
      v = rec.ev_err;
      return true;
  }
  return false;
}

void fit_loglog(RateFit& fit) {
  const double N = static_cast<double>(fit.ns.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t g = 0; g < fit.ns.size(); ++g) {
    const double med = fit.medians[g];
    if (!(med > 0.0) || !std::isfinite(med)) {
      fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double x = std::log(static_cast<double>(fit.ns[g]));
    const double y = std::log(med);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double den = N * sxx - sx * sx;
  fit.slope = (N * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / N;
  const double sst = N * syy - sy * sy;
  fit.r2 = sst > 0.0 ? (N * sxy - sx * sy) * (N * sxy - sx * sy) / (den * sst) : 0.0;
}

}  // namespace

SweepResult sweep_and_fit(const SweepTemplate& tpl, const std::vector<int>& n_grid,
                          const std::vector<int>& reps_per_n,
                          const std::vector<Quantity>& quantities, int threads) {
  if (n_grid.size() < 3)
    throw InsufficientGrid("rate fits need at least three grid points");
  if (reps_per_n.size() != n_grid.size())
    throw DimensionMismatch("one repetition count per grid point");
  for (int rep : reps_per_n)
    if (rep < 3)
      throw InsufficientGrid("quartiles need at least three repetitions per point");

  bool wants_weights = false;
  for (Quantity q : quantities)
    wants_weights = wants_weights || q == Quantity::weighted_sum ||
                    q == Quantity::explained_variance;

  const size_t G = n_grid.size();
  std::vector<long> ps(G);
  std::vector<std::vector<std::vector<double>>> errs(
      G, std::vector<std::vector<double>>(quantities.size()));

  long offset = 0;
  for (size_t g = 0; g < G; ++g) {
    const SpikedModel model = instantiate(tpl, n_grid[g]);
    ps[g] = model.dims.p;
    const EquivalentLaw law = EquivalentLaw::solve(model.spectrum, model.dims);
    const TrialTargets targets =
        make_trial_targets(law, model, tpl.deloc_offset, wants_weights, false);
    const int reps = reps_per_n[g];
    std::vector<TrialRecord> records(static_cast<size_t>(reps));
    const long base = offset;
    parallel_trials(reps, threads, [&](int t) {
      const TrialSpec spec{model, tpl.distribution, tpl.seed, base + t, {}};
      records[static_cast<size_t>(t)] = run_trial(spec, law, targets);
    });
    offset += reps;
    for (size_t q = 0; q < quantities.size(); ++q)
      for (const TrialRecord& rec : records) {
        double v;
        if (record_value(rec, quantities[q], v)) errs[g][q].push_back(v);
      }
  }

  SweepResult out;
  for (size_t q = 0; q < quantities.size(); ++q) {
    RateFit fit;
    fit.quantity = quantities[q];
    fit.ns = n_grid;
    fit.ps = ps;
    fit.reps = reps_per_n;
    for (size_t g = 0; g < G; ++g) {
      fit.medians.push_back(median_of(errs[g][q]));
      fit.q25.push_back(quantile_of(errs[g][q], 0.25));
      fit.q75.push_back(quantile_of(errs[g][q], 0.75));
    }
    fit_loglog(fit);
    fit.target_exponent = target_exponent_of(fit.quantity, tpl.alpha);
    fit.band = band_of(fit.quantity);
    fit.pass = std::isfinite(fit.slope) &&
               std::fabs(fit.slope - fit.target_exponent) <= fit.band;
    out.fits.push_back(std::move(fit));
  }
  return out;
}

void parallel_trials(int total, int threads, const std::function<void(int)>& fn) {
  if (total <= 0) return;
  if (threads <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex guard;
  std::vector<std::thread> pool;
  const int workers = std::min(threads, total);
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= total) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lk(guard);
          if (!first) first = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  if (q <= 0.0) return v.front();
  if (q >= 1.0) return v.back();
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

double median_of(std::vector<double> v) { return quantile_of(std::move(v), 0.5); }

}  // namespace spikecov
