#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <doctest.h>

#include "oracles/mp_closed_form.hpp"
#include "spikecov/errors.hpp"
#include "spikecov/law.hpp"
#include "spikecov/model.hpp"
#include "spikecov/mp.hpp"
#include "spikecov/outliers.hpp"
#include "spikecov/rng.hpp"

using namespace spikecov;

namespace {

struct Setup {
  SpikedModel model;
  EquivalentLaw law;
};

Setup identity_setup(double phi, std::vector<double> ds, double varpi = 0.05) {
  const long p = static_cast<long>(phi) * 4;
  SpikedModel m = build_model(make_dimensions(p, 4), make_spectrum({{1.0, p}}),
                              {std::move(ds), varpi});
  EquivalentLaw law = EquivalentLaw::solve(m.spectrum, m.dims);
  return {std::move(m), std::move(law)};
}

Setup two_atom_setup(std::vector<double> ds, double varpi = 0.05) {
  SpikedModel m = build_model(make_dimensions(16, 4),
                              make_spectrum({{2.0, 8}, {1.0, 8}}), {std::move(ds), varpi});
  EquivalentLaw law = EquivalentLaw::solve(m.spectrum, m.dims);
  return {std::move(m), std::move(law)};
}

WeightSequence unit_weights(long p, int r) {
  return make_weights(std::vector<double>(p, 1.0), 1.0, r);
}

// random admissible single-spike model over a random few-atom spectrum
Setup random_admissible(Stream& rng) {
  const int n = 8;
  const long p = 48 + static_cast<long>(rng.next_unit() * 8.0) * 8;
  std::vector<SpectrumAtom> atoms;
  double v = 0.4 + rng.next_unit();
  long left = p;
  const int k = 2 + static_cast<int>(rng.next_unit() * 2.0);
  for (int j = 0; j < k - 1; ++j) {
    const long m = std::max<long>(2, left / (k - j));
    atoms.push_back({v, m});
    left -= m;
    v *= 1.5 + rng.next_unit();
  }
  atoms.push_back({v, left});
  PopulationSpectrum spec = make_spectrum(std::move(atoms));
  const Dimensions dims = make_dimensions(p, n);
  EquivalentLaw law = EquivalentLaw::solve(spec, dims);
  // place the spike safely above the window bound
  const double varpi = 0.01;
  const double lower = -law.sqrt_phi() / (law.c1() + varpi);
  const double sigma1 = spec.sigma(1);
  const double d = (1.2 + 2.0 * rng.next_unit()) * lower / sigma1 - 1.0;
  SpikedModel model = build_model(dims, std::move(spec), {{d}, varpi});
  return {std::move(model), std::move(law)};
}

}  // namespace

TEST_CASE("outlier location, pinned identity-spectrum values") {
  const Setup s4 = identity_setup(4.0, {4.0});
  CHECK(outlier_location(s4.law, s4.model, 1) == doctest::Approx(5.0).epsilon(1e-10));

  const Setup s6 = identity_setup(4.0, {6.0});
  CHECK(outlier_location(s6.law, s6.model, 1) ==
        doctest::Approx(35.0 / 6.0).epsilon(1e-10));

  const Setup sub = identity_setup(4.0, {1.0});
  CHECK_THROWS_AS(outlier_location(sub.law, sub.model, 1), InadmissibleSpike);
  CHECK_THROWS_AS(outlier_alignment(sub.law, sub.model, 1), InadmissibleSpike);
}

TEST_CASE("alignment, pinned value and closed-form cross-check") {
  const Setup s = identity_setup(4.0, {4.0});
  CHECK(outlier_alignment(s.law, s.model, 1) == doctest::Approx(0.375).epsilon(1e-10));

  // general-solver predictions against the independent spectrum-free forms
  for (double phi : {2.0, 4.0, 9.0}) {
    for (double scale : {1.5, 2.0, 4.0}) {
      const double d = scale * std::sqrt(phi);
      const Setup t = identity_setup(phi, {d});
      const auto [a_ref, b_ref] = mp_outlier(phi, d);
      CHECK(outlier_location(t.law, t.model, 1) == doctest::Approx(a_ref).epsilon(1e-10));
      CHECK(outlier_alignment(t.law, t.model, 1) == doctest::Approx(b_ref).epsilon(1e-10));
      CHECK(outlier_alignment(t.law, t.model, 1) ==
            doctest::Approx(oracle::mp_outlier_b(phi, d)).epsilon(1e-10));
    }
  }
}

TEST_CASE("perfect alignment limit") {
  // a spike this large needs a tiny varpi to stay inside the window's
  // upper bound phi^{1/2}/varpi
  const Setup s = identity_setup(4.0, {1e6}, 1e-12);
  const double b = outlier_alignment(s.law, s.model, 1);
  CHECK(b > 1.0 - 1e-5);
  CHECK(b < 1.0);
}

TEST_CASE("near-threshold spike stays positive and flags near-critical") {
  const Setup s = identity_setup(4.0, {2.0 * 1.002}, 1e-4);
  const OutlierPrediction o = predict_outlier(s.law, s.model, 1);
  CHECK(o.admissible);
  CHECK(o.b > 0.0);
  CHECK(o.b < 0.01);
  CHECK(o.edge_margin > 0.0);

  // margin shrinks quadratically toward the threshold: d - 2 = 4e-4 puts it under 1e-6
  const Setup t = identity_setup(4.0, {2.0 * 1.0002}, 1e-9);
  const OutlierPrediction ot = predict_outlier(t.law, t.model, 1);
  CHECK(ot.admissible);
  CHECK(ot.edge_margin > 0.0);
  CHECK(ot.edge_margin < 1e-6);
  CHECK(ot.near_critical);
  CHECK_FALSE(o.near_critical);
}

TEST_CASE("subcritical prediction is a record, not a failure") {
  const Setup s = identity_setup(4.0, {0.5});
  const OutlierPrediction o = predict_outlier(s.law, s.model, 1);
  CHECK_FALSE(o.admissible);
  CHECK(std::isnan(o.a));
  CHECK(std::isnan(o.b));
  CHECK(o.m_at_a == doctest::Approx(-2.0 / 1.5).epsilon(1e-15));
}

TEST_CASE("ordering across spikes") {
  const Setup s = identity_setup(4.0, {8.0, 6.0, 4.5});
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 3; ++i) {
    const double a = outlier_location(s.law, s.model, i);
    CHECK(a < prev);
    CHECK(a > s.law.gamma_plus());
    prev = a;
  }
}

TEST_CASE("m at the outlier location matches the closed form through the solver") {
  Stream rng(43u, 0u);
  for (int k = 0; k < 10; ++k) {
    const Setup s = random_admissible(rng);
    const OutlierPrediction o = predict_outlier(s.law, s.model, 1);
    REQUIRE(o.admissible);
    const std::complex<double> m = s.law.solve_m({o.a, 0.0});
    CHECK(std::fabs(std::real(m) - o.m_at_a) < 1e-10);
  }
}

TEST_CASE("m_dot, pinned value and structure") {
  const Setup s = identity_setup(4.0, {4.0});
  const WeightSequence ell = unit_weights(s.model.dims.p, 1);
  CHECK(m_dot(s.law, s.model, 1, ell) == doctest::Approx(4.0 / 15.0).epsilon(1e-12));

  // linearity: scaling the weights scales the functional
  std::vector<double> scaled(s.model.dims.p, 3.0);
  const WeightSequence ell3 = make_weights(scaled, 1.0 / 3.0, 1);
  CHECK(m_dot(s.law, s.model, 1, ell3) ==
        doctest::Approx(3.0 * 4.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("m_dot telescopes for the synthetic weight choice") {
  const Setup s = two_atom_setup({2.0 * std::sqrt(4.0)});  // spike on sigma_1 = 2
  const OutlierPrediction o = predict_outlier(s.law, s.model, 1);
  REQUIRE(o.admissible);
  const double mphi = o.m_at_a / s.law.sqrt_phi();
  std::vector<double> ells;
  const std::vector<double> sig = s.model.spectrum.expanded();
  ells.reserve(sig.size());
  for (double sg : sig) {
    const double t = mphi + 1.0 / sg;
    ells.push_back(t * t * sg);
  }
  const double lo = *std::min_element(ells.begin(), ells.end());
  const WeightSequence w = make_weights(ells, lo, 1);
  const double md = m_dot(s.law, s.model, 1, w);
  const double mprime = 1.0 / s.law.f(o.m_at_a, 1);
  CHECK(md == doctest::Approx(s.law.phi() * mprime / o.a).epsilon(1e-12));
}

TEST_CASE("weighted projection sum, pinned value and the normalization identity") {
  const Setup s = identity_setup(4.0, {4.0});
  const WeightSequence ell = unit_weights(s.model.dims.p, 1);
  CHECK(weighted_projection_sum(s.law, s.model, 1, ell) ==
        doctest::Approx(0.625).epsilon(1e-12));

  Stream rng(47u, 0u);
  for (int k = 0; k < 20; ++k) {
    const Setup t = random_admissible(rng);
    const WeightSequence e1 = unit_weights(t.model.dims.p, 1);
    const double wps = weighted_projection_sum(t.law, t.model, 1, e1);
    const double b = outlier_alignment(t.law, t.model, 1);
    CHECK(std::fabs(wps + b - 1.0) <= 1e-9);
  }
}

TEST_CASE("weighted projection sum is linear in the weights") {
  const Setup s = two_atom_setup({3.0});
  const long p = s.model.dims.p;
  const WeightSequence one = unit_weights(p, 1);
  const WeightSequence two = make_weights(std::vector<double>(p, 2.0), 0.5, 1);
  const double w1 = weighted_projection_sum(s.law, s.model, 1, one);
  const double w2 = weighted_projection_sum(s.law, s.model, 1, two);
  CHECK(w2 == doctest::Approx(2.0 * w1).epsilon(1e-14));
}

TEST_CASE("explained variance") {
  const Setup s = identity_setup(4.0, {4.0});
  CHECK(explained_variance(s.law, s.model, 1) == doctest::Approx(2.5).epsilon(1e-12));

  // dominant-spike limit
  const Setup big = identity_setup(4.0, {1e8}, 1e-12);
  const double ev = explained_variance(big.law, big.model, 1);
  CHECK(std::fabs(ev / big.model.tilde_sigmas[0] - 1.0) < 1e-6);

  Stream rng(53u, 0u);
  for (int k = 0; k < 10; ++k) {
    const Setup t = random_admissible(rng);
    const double e = explained_variance(t.law, t.model, 1);
    const double floor = t.model.tilde_sigmas[0] * outlier_alignment(t.law, t.model, 1);
    CHECK(e >= floor);
  }
}

TEST_CASE("weight validation") {
  CHECK_THROWS_AS(make_weights({1.0, 2.0, 1.0, 1.0}, 0.5, 1), WeightBoundViolation);
  CHECK_THROWS_AS(make_weights({1.0, 1.0, 3.0, 1.0}, 0.5, 1), WeightBoundViolation);
  CHECK_THROWS_AS(make_weights({1.0, 1.0, -1.0, 1.0}, 0.5, 1), WeightBoundViolation);
  CHECK_NOTHROW(make_weights({1.0, 1.0, 2.0, 0.5}, 0.5, 1));
}

TEST_CASE("non-outlier targets") {
  const Setup s = two_atom_setup({3.0});
  const int n = s.model.dims.n;  // 4
  const auto targets = nonoutlier_targets(s.law, s.model, n);
  REQUIRE(targets.size() == static_cast<size_t>(n - s.model.r()));
  const std::vector<double> g = s.law.quantiles(n);
  for (size_t k = 0; k < targets.size(); ++k) {
    const int i = targets[k].i;
    CHECK(i == s.model.r() + 1 + static_cast<int>(k));
    CHECK(targets[k].gamma == doctest::Approx(g[i - s.model.r() - 1]).epsilon(1e-12));
    const double env = std::pow(std::min(i, n + 1 - i), -1.0 / 3.0) * std::pow(n, -2.0 / 3.0);
    CHECK(targets[k].envelope == doctest::Approx(env).epsilon(1e-12));
  }

  // r = 0: targets are exactly the quantiles
  SpikedModel flat = build_model(make_dimensions(16, 8), make_spectrum({{1.0, 16}}), {{}, 0.05});
  const EquivalentLaw law = EquivalentLaw::solve(flat.spectrum, flat.dims);
  const auto t0 = nonoutlier_targets(law, flat, 8);
  const std::vector<double> g0 = law.quantiles(8);
  REQUIRE(t0.size() == 8);
  for (int k = 0; k < 8; ++k) {
    CHECK(t0[k].i == k + 1);
    CHECK(t0[k].gamma == doctest::Approx(g0[k]).epsilon(1e-12));
  }
}
