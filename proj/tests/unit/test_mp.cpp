#include <cmath>
#include <complex>

#include <doctest.h>

#include "oracles/mp_closed_form.hpp"
#include "spikecov/errors.hpp"
#include "spikecov/mp.hpp"
#include "spikecov/rng.hpp"

using namespace spikecov;
using std::complex;

TEST_CASE("closed-form law fields") {
  const MpLaw l4 = mp_law(4.0);
  CHECK(l4.gamma_minus == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(l4.gamma_plus == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(l4.c1 == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(l4.c2 == doctest::Approx(2.0).epsilon(1e-15));

  const MpLaw l9 = mp_law(9.0);
  CHECK(l9.gamma_minus == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(l9.gamma_plus == doctest::Approx(16.0 / 3.0).epsilon(1e-15));
  CHECK(l9.c1 == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(l9.c2 == doctest::Approx(1.5).epsilon(1e-15));

  CHECK_THROWS_AS(mp_law(1.0), InvalidPhi);
  CHECK_THROWS_AS(mp_law(0.5), InvalidPhi);
}

TEST_CASE("stieltjes transform, pinned points") {
  const complex<double> m5 = mp_m(4.0, {5.0, 0.0});
  CHECK(std::abs(m5 - complex<double>(-0.4, 0.0)) < 1e-13);

  // bulk point: the quadratic 1.25 m^2 + m + 1 = 0 has roots (-1 +- 2i)/2.5
  const complex<double> mb = mp_m(4.0, {2.5, 0.0});
  CHECK(std::abs(mb - complex<double>(-0.4, 0.8)) < 1e-13);
  // Im m = pi * density
  CHECK(std::imag(mb) == doctest::Approx(M_PI * 0.25464790894703253).epsilon(1e-12));
}

TEST_CASE("stieltjes transform, residual sweep") {
  Stream rng(7u, 0u);
  for (int k = 0; k < 1000; ++k) {
    const double phi = 2.0 + 8.0 * rng.next_unit();
    const oracle::MpEdges e = oracle::mp_edges(phi);
    complex<double> z;
    switch (k % 3) {
      case 0:  // upper half plane
        z = {e.gamma_minus - 1.0 + 8.0 * rng.next_unit(), 1e-3 + 2.0 * rng.next_unit()};
        break;
      case 1:  // real, above the bulk
        z = {e.gamma_plus + 0.05 + 5.0 * rng.next_unit(), 0.0};
        break;
      default:  // real, below the bulk (including negative)
        z = {e.gamma_minus - 0.05 - 3.0 * rng.next_unit(), 0.0};
    }
    const complex<double> m = mp_m(phi, z);
    const complex<double> res = z - oracle::mp_f(phi, m);
    CHECK(std::abs(res) <= 1e-13 * std::max(1.0, std::abs(z)));
    if (std::imag(z) > 0.0) CHECK(std::imag(m) > 0.0);
  }
}

TEST_CASE("stieltjes transform agrees with the independent quadratic") {
  Stream rng(11u, 0u);
  for (int k = 0; k < 500; ++k) {
    const double phi = 1.5 + 9.0 * rng.next_unit();
    const complex<double> z{-1.0 + 12.0 * rng.next_unit(), 1e-6 + rng.next_unit()};
    CHECK(std::abs(mp_m(phi, z) - oracle::mp_m_quadratic(phi, z)) < 1e-11);
  }
}

TEST_CASE("outlier closed forms") {
  const auto [a, b] = mp_outlier(4.0, 4.0);
  CHECK(a == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(b == doctest::Approx(0.375).epsilon(1e-14));

  CHECK_THROWS_AS(mp_outlier(4.0, 2.0), Subcritical);
  CHECK_THROWS_AS(mp_outlier(4.0, 0.5), Subcritical);
  CHECK_THROWS_AS(mp_outlier(1.0, 4.0), InvalidPhi);

  // leading order as d grows: a ~ phi^{-1/2} d, b -> 1
  const auto [ah, bh] = mp_outlier(4.0, 1e6);
  CHECK(ah == doctest::Approx(0.5e6 + 2.5 + 2e-6).epsilon(1e-12));
  CHECK(bh > 1.0 - 1e-5);
  CHECK(bh < 1.0);

  // just above threshold the alignment is small but positive
  const auto [an, bn] = mp_outlier(4.0, 2.0 + 1e-6);
  CHECK(bn > 0.0);
  CHECK(bn < 1e-5);
  CHECK(an > 4.5);
}

TEST_CASE("outlier location is increasing in spike strength") {
  double prev = 0.0;
  for (double d : {2.5, 3.0, 4.0, 6.0, 10.0, 100.0}) {
    const auto [a, b] = mp_outlier(4.0, d);
    CHECK(a > prev);
    CHECK(b > 0.0);
    CHECK(b < 1.0);
    prev = a;
  }
}
