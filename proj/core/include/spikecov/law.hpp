#pragma once

#include <complex>
#include <vector>

#include "spikecov/model.hpp"

namespace spikecov {

using cplx = std::complex<double>;

struct DensityCurve {
  std::vector<double> grid;    // E values in [gamma_minus, gamma_plus]
  std::vector<double> values;  // rho(E) >= 0
  double mass = 0;             // adaptive quadrature of rho over the support
};

// Deterministic equivalent of the non-spiked law: the map f, its critical
// points c1 < 0 < c2, support edges gamma_minus = f(c2) <= gamma_plus = f(c1),
// the Stieltjes transform m(z), the density rho and its quantiles.
// Immutable once solved; all evaluators are pure and concurrently callable.
class EquivalentLaw {
 public:
  static EquivalentLaw solve(const PopulationSpectrum& spectrum,
                             const Dimensions& dims);

  double phi() const { return phi_; }
  double sqrt_phi() const { return sqrt_phi_; }
  long p() const { return p_; }
  const std::vector<SpectrumAtom>& atoms() const { return atoms_; }

  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double gamma_minus() const { return gamma_minus_; }
  double gamma_plus() const { return gamma_plus_; }
  double m1() const { return m1_; }

  // f and derivatives by the compressed-atom sum; order 0|1|2. Throws
  // PoleProximity within 1e-12 relative distance of {0} u {-phi^{1/2}/sigma}.
  double f(double x, int order = 0) const;
  cplx f(cplx x, int order = 0) const;

  // Unique solution of z = f(m) on the upper-half-plane branch. For real
  // z outside the support returns the real branch (in (c1, 0) above
  // gamma_plus, positive below gamma_minus); for real z strictly inside the
  // bulk returns the boundary value with Im m > 0. Residual contract:
  // |z - f(m)| <= 1e-12 * max(1, |z|).
  cplx solve_m(cplx z) const;

  // pi^{-1} Im m(E + 0i) inside (gamma_minus, gamma_plus); 0 outside.
  double density(double E) const;

  // gamma_i solving  integral_{gamma_i}^{gamma_plus} rho = i/n,  i = 1..n,
  // non-increasing, gamma_n = gamma_minus up to inversion tolerance.
  std::vector<double> quantiles(int n) const;
  double quantile(int i, int n) const;

  // K-point edge-clustered (Chebyshev) grid with density values and the
  // quadrature mass of rho.
  DensityCurve density_curve(int K) const;

 private:
  EquivalentLaw() = default;

  double phi_ = 0, sqrt_phi_ = 0;
  long p_ = 0;
  std::vector<SpectrumAtom> atoms_;
  double c1_ = 0, c2_ = 0;
  double gamma_minus_ = 0, gamma_plus_ = 0;
  double m1_ = 0;

  friend class TailMass;
  void check_pole(cplx x) const;
};

// Tail mass N(E) = integral_E^{gamma_plus} rho with the square-root edge
// singularities removed by the substitutions u = sqrt(gamma_plus - E) and
// v = sqrt(E - gamma_minus); panels cached for monotone-bisection inversion.
// Throws QuadratureFailure when |mass - 1| > 1e-6.
class TailMass {
 public:
  explicit TailMass(const EquivalentLaw& law);

  double mass() const { return mass_; }
  double N(double E) const;        // normalized: N(gamma_minus) = 1
  double invert(double q) const;   // bisection to 1e-10 interval width

 private:
  struct Panel {
    double a = 0, b = 0;   // subinterval in u (upper) or v (lower) space
    double integral = 0;
    double cum = 0;        // cumulative integral over [0, b]
  };

  double partial(const std::vector<Panel>& panels, double x) const;
  double invert_in(const std::vector<Panel>& panels, double target,
                   bool upper) const;

  const EquivalentLaw& law_;
  std::vector<Panel> upper_, lower_;  // u-space (gamma_plus side), v-space
  double u_max_ = 0, v_max_ = 0;
  double upper_mass_ = 0, lower_mass_ = 0, mass_ = 0;
};

}  // namespace spikecov
