#include "spikecov/mp.hpp"

#include <cmath>

#include "spikecov/errors.hpp"

namespace spikecov {

namespace {

using C = std::complex<double>;

C mp_f(double phi, C m) {
  const double s = std::sqrt(phi);
  return -1.0 / m + s / (1.0 + m / s);
}

C mp_fprime(double phi, C m) {
  const double is = 1.0 / std::sqrt(phi);
  const C den = 1.0 + is * m;
  return 1.0 / (m * m) - 1.0 / (den * den);
}

}  // namespace

MpLaw mp_law(double phi) {
  if (!(phi > 1.0)) throw InvalidPhi("phi must exceed 1");
  const double s = std::sqrt(phi), is = 1.0 / s;
  MpLaw law;
  law.phi = phi;
  law.gamma_plus = s + is + 2.0;
  law.gamma_minus = s + is - 2.0;
  law.c1 = -1.0 / (1.0 + is);
  law.c2 = 1.0 / (1.0 - is);
  return law;
}

std::complex<double> mp_m(double phi, std::complex<double> z) {
  const MpLaw law = mp_law(phi);
  const double s = std::sqrt(phi), is = 1.0 / s;

  // clear denominators: (z/s) m^2 + (z + 1/s - s) m + 1 = 0
  const C A = z * is, B = z + is - s, Cc = 1.0;
  C r1, r2;
  if (std::abs(A) < 1e-300) {
    r1 = r2 = -Cc / B;
  } else {
    C sq = std::sqrt(B * B - 4.0 * A * Cc);
    if (std::real(std::conj(B) * sq) < 0.0) sq = -sq;
    const C q = -0.5 * (B + sq);
    r1 = q / A;
    r2 = Cc / q;
  }

  C m;
  if (std::imag(z) > 0.0) {
    m = std::imag(r1) > 0.0 ? r1 : r2;
  } else {
    const double E = std::real(z);
    if (E > law.gamma_plus) {
      const bool in1 = std::real(r1) > law.c1 && std::real(r1) < 0.0;
      m = in1 ? r1 : r2;
      m = C(std::real(m), 0.0);
    } else if (E < law.gamma_minus) {
      // both roots real; the physical branch is the one below c2
      C cand = std::real(r1) < std::real(r2) ? r1 : r2;
      if (E <= 0.0) cand = std::real(r1) > 0.0 ? r1 : r2;
      m = C(std::real(cand), 0.0);
    } else {
      m = std::imag(r1) > 0.0 ? r1 : r2;
    }
  }

  // polish while it helps; keeps the residual at the 1e-13 contract even for
  // large |z| where the quadratic loses a digit
  for (int it = 0; it < 2; ++it) {
    const C fp = mp_fprime(phi, m);
    if (std::abs(fp) < 1e-10) break;
    C next = m - (mp_f(phi, m) - z) / fp;
    if (std::imag(m) == 0.0) next = C(std::real(next), 0.0);
    const bool branch_kept = std::imag(m) == 0.0 || std::imag(next) > 0.0;
    if (branch_kept && std::abs(mp_f(phi, next) - z) < std::abs(mp_f(phi, m) - z))
      m = next;
    else
      break;
  }
  return m;
}

std::pair<double, double> mp_outlier(double phi, double d) {
  if (!(phi > 1.0)) throw InvalidPhi("phi must exceed 1");
  const double s = std::sqrt(phi);
  if (!(d > s)) throw Subcritical("spike strength at or below phi^{1/2}");
  const double a = s + 1.0 / s + d / s + s / d;
  const double b = (1.0 - phi / (d * d)) / (1.0 + phi / d);
  return {a, b};
}

}  // namespace spikecov
