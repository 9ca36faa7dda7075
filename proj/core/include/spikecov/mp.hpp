#pragma once

#include <complex>
#include <utility>

namespace spikecov {

// Closed-form specialization for the identity population spectrum, used as an
// independent oracle against the general solver.
struct MpLaw {
  double phi = 0;
  double gamma_plus = 0;   // phi^{1/2} + phi^{-1/2} + 2
  double gamma_minus = 0;  // phi^{1/2} + phi^{-1/2} - 2
  double c1 = 0;           // -(1 + phi^{-1/2})^{-1}
  double c2 = 0;           // (1 - phi^{-1/2})^{-1}
};

// Throws InvalidPhi for phi <= 1.
MpLaw mp_law(double phi);

// Stieltjes transform by the quadratic obtained from clearing denominators in
// z = -1/m + phi^{1/2}/(1 + phi^{-1/2} m): branch with Im > 0, or the (c1, 0)
// real branch above gamma_plus. Residual |z - f(m)| <= 1e-13.
std::complex<double> mp_m(double phi, std::complex<double> z);

// Outlier location and squared alignment for a single spike of strength d:
// a = phi^{1/2} + phi^{-1/2} + phi^{-1/2} d + phi^{1/2}/d,
// b = (1 - phi/d^2)/(1 + phi/d).
// Throws Subcritical for d <= phi^{1/2}, InvalidPhi for phi <= 1.
std::pair<double, double> mp_outlier(double phi, double d);

}  // namespace spikecov
