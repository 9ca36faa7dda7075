#include "spikecov/law.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "spikecov/errors.hpp"

namespace spikecov {

namespace {

constexpr double kResidualTol = 1e-12;

// ---- adaptive Simpson ----

template <class F>
double simpson_refine(const F& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  if (depth <= 0 || std::fabs(refined - whole) <= 15.0 * tol)
    return refined + (refined - whole) / 15.0;
  return simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_refine(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 36);
}

// Terminal subintervals of the same refinement, left to right, as
// {a, b, integral} triples. partial-interval queries re-integrate inside one
// panel, so panels only need to be fine enough for their own error bound.
template <class F>
void panelize(const F& f, double a, double b, double fa, double fm, double fb,
              double whole, double tol, int depth,
              std::vector<std::array<double, 3>>& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  if (depth <= 0 || std::fabs(refined - whole) <= 15.0 * tol) {
    out.push_back({a, b, refined + (refined - whole) / 15.0});
    return;
  }
  panelize(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  panelize(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

// ---- critical points of f ----

// Root of f' inside (a, b) with f'(a) < 0 < f'(b) or the reverse; bisection
// carries the interval to rounding width, Newton then picks the best residual.
double refine_critical(const EquivalentLaw& law, double a, double b) {
  double fa = law.f(a, 1);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = law.f(mid, 1);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  double best = 0.5 * (a + b);
  double bestr = std::fabs(law.f(best, 1));
  double x = best;
  for (int it = 0; it < 8 && bestr > 0.0; ++it) {
    const double d2 = law.f(x, 2);
    if (d2 == 0.0) break;
    const double nx = x - law.f(x, 1) / d2;
    if (!(nx > a) || !(nx < b)) break;
    x = nx;
    const double r = std::fabs(law.f(x, 1));
    if (r < bestr) {
      bestr = r;
      best = x;
    }
  }
  if (bestr > kResidualTol * std::max(1.0, std::fabs(law.f(best, 2))))
    throw NonConvergence("critical point residual above contract");
  return best;
}

// Unique root of f' between the nearest pole -phi^{1/2}/sigma_1 and zero.
double find_c1(const EquivalentLaw& law) {
  const double pole = -law.sqrt_phi() / law.atoms().front().value;
  const double floor = 1e-11 * std::max(1.0, std::fabs(pole));
  double a = 0.0;
  bool found = false;
  for (double da = 0.25 * std::fabs(pole); da > floor; da *= 0.5) {
    a = pole + da;
    if (law.f(a, 1) < 0.0) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("f' never turns negative near the leading pole");
  double b = 0.0;
  found = false;
  for (double db = 0.25 * std::fabs(pole); db > floor; db *= 0.5) {
    b = -db;
    if (b <= a) continue;
    if (law.f(b, 1) > 0.0) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("f' never turns positive left of zero");
  return refine_critical(law, a, b);
}

// Unique root of f' on the positive axis.
double find_c2(const EquivalentLaw& law) {
  double a = 1.0;
  bool found = false;
  for (int k = 0; k < 40; ++k, a *= 0.5) {
    if (law.f(a, 1) > 0.0) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("f' never turns positive right of zero");
  double b = std::max(2.0 * a, 2.0);
  found = false;
  for (int k = 0; k < 60; ++k, b *= 2.0) {
    if (law.f(b, 1) < 0.0) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("f' never turns negative at large argument");
  return refine_critical(law, a, b);
}

// ---- upper-half-plane branch of z = f(m) ----

// Damped self-consistent map m <- (m + 1/(g(m) - z))/2 with
// g(m) = f(m) + 1/m; maps the upper half plane into itself for Im z > 0.
cplx fixed_point_start(const EquivalentLaw& law, cplx z) {
  cplx m = -1.0 / z;
  for (int it = 0; it < 50; ++it) {
    cplx g;
    try {
      g = law.f(m) + 1.0 / m;
    } catch (const PoleProximity&) {
      break;
    }
    const cplx next = 0.5 * m + 0.5 / (g - z);
    if (!(std::imag(next) > 0.0)) break;
    m = next;
  }
  return m;
}

// Guarded Newton toward f(m) = z keeping Im m > 0; steps are halved until the
// residual drops, budget counts every accepted or rejected iteration.
bool newton_uhp(const EquivalentLaw& law, cplx z, cplx& m, double tol, int max_it,
                int& budget) {
  double res = std::abs(law.f(m) - z);
  for (int it = 0; it < max_it && budget > 0; ++it, --budget) {
    if (res <= tol) return true;
    const cplx d1 = law.f(m, 1);
    if (std::abs(d1) == 0.0) break;
    cplx step = (law.f(m) - z) / d1;
    bool moved = false;
    for (int h = 0; h < 40; ++h, step *= 0.5) {
      const cplx cand = m - step;
      if (!(std::imag(cand) > 0.0)) continue;
      double rc;
      try {
        rc = std::abs(law.f(cand) - z);
      } catch (const PoleProximity&) {
        continue;
      }
      if (rc < res) {
        m = cand;
        res = rc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return res <= tol;
}

// Continuation from eta0 = max(1, eta) down to the requested height (0 picks
// the boundary value). Failed descents retry with a gentler ratio.
cplx solve_uhp(const EquivalentLaw& law, double E, double eta_target) {
  const double eta0 = std::max(1.0, eta_target);
  cplx m = fixed_point_start(law, cplx(E, eta0));
  int budget = 500;
  double eta = eta0;
  newton_uhp(law, cplx(E, eta), m, 1e-12 * std::max(1.0, std::hypot(E, eta)), 30, budget);
  while (eta > eta_target) {
    bool advanced = false;
    double drop = 4.0;
    for (int attempt = 0; attempt < 6 && !advanced && budget > 0; ++attempt) {
      double next = eta / drop;
      if (eta_target > 0.0 ? next <= eta_target : next < 1e-14) next = eta_target;
      cplx trial = m;
      if (newton_uhp(law, cplx(E, next), trial,
                     1e-11 * std::max(1.0, std::hypot(E, next)), 30, budget)) {
        m = trial;
        eta = next;
        advanced = true;
      }
      drop = std::sqrt(drop);
    }
    if (!advanced) throw NonConvergence("continuation toward the real axis stalled");
  }
  const cplx z(E, eta_target);
  if (!newton_uhp(law, z, m, 0.25 * kResidualTol * std::max(1.0, std::abs(z)), 40, budget))
    throw NonConvergence("upper-branch residual above contract");
  if (std::imag(m) < -1e-10) throw WrongBranch("upper-branch iterate left the half plane");
  return m;
}

// ---- real branches outside the support ----

// Monotone bisection for f(x) = E on (lo, hi) where f is increasing; flo and
// fhi are the known signs of f - E at the ends. Newton polishing keeps the
// best residual seen.
double solve_real_monotone(const EquivalentLaw& law, double E, double lo, double hi) {
  double a = lo, b = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (law.f(mid) < E)
      a = mid;
    else
      b = mid;
  }
  double best = 0.5 * (a + b);
  double bestr = std::fabs(law.f(best) - E);
  double x = best;
  for (int it = 0; it < 8 && bestr > 0.0; ++it) {
    const double d1 = law.f(x, 1);
    if (d1 == 0.0) break;
    const double nx = x - (law.f(x) - E) / d1;
    if (!(nx > lo) || !(nx < hi)) break;
    x = nx;
    const double r = std::fabs(law.f(x) - E);
    if (r < bestr) {
      bestr = r;
      best = x;
    }
  }
  if (bestr > kResidualTol * std::max(1.0, std::fabs(E)))
    throw NonConvergence("real-branch residual above contract");
  return best;
}

// E > gamma_plus: f climbs from gamma_plus to +inf on (c1, 0).
double solve_real_above(const EquivalentLaw& law, double E) {
  const double c1 = law.c1();
  double b = 0.0;
  bool found = false;
  for (double eps = 0.25 * std::fabs(c1); eps > 1e-300; eps *= 0.5) {
    b = -eps;
    if (b <= c1) continue;
    if (law.f(b) > E) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("no upper bracket end left of zero");
  const double x = solve_real_monotone(law, E, c1, b);
  if (!(x > c1) || !(x < 0.0)) throw WrongBranch("solution left (c1, 0)");
  return x;
}

// E < gamma_minus: f climbs from -inf to gamma_minus on (0, c2).
double solve_real_below(const EquivalentLaw& law, double E) {
  const double c2 = law.c2();
  double a = 0.0;
  bool found = false;
  for (double eps = 0.25 * c2; eps > 1e-300; eps *= 0.5) {
    a = eps;
    if (law.f(a) < E) {
      found = true;
      break;
    }
  }
  if (!found) throw BracketFailure("no lower bracket end right of zero");
  const double x = solve_real_monotone(law, E, a, c2);
  if (!(x > 0.0)) throw WrongBranch("solution left (0, c2)");
  return x;
}

}  // namespace

// ---- EquivalentLaw ----

EquivalentLaw EquivalentLaw::solve(const PopulationSpectrum& spectrum,
                                   const Dimensions& dims) {
  if (spectrum.p != dims.p)
    throw DimensionMismatch("spectrum multiplicities must sum to p");
  EquivalentLaw law;
  law.phi_ = dims.phi;
  law.sqrt_phi_ = std::sqrt(dims.phi);
  law.p_ = dims.p;
  law.atoms_ = spectrum.atoms;
  law.m1_ = spectrum.mean();
  law.c1_ = find_c1(law);
  law.c2_ = find_c2(law);
  law.gamma_plus_ = law.f(law.c1_);
  law.gamma_minus_ = law.f(law.c2_);
  return law;
}

void EquivalentLaw::check_pole(cplx x) const {
  if (std::abs(x) <= 1e-12) throw PoleProximity("argument within guard of the pole at zero");
  for (const auto& a : atoms_) {
    const double pole = -sqrt_phi_ / a.value;
    if (std::abs(x - pole) <= 1e-12 * std::max(1.0, std::fabs(pole)))
      throw PoleProximity("argument within guard of a spectral pole");
  }
}

double EquivalentLaw::f(double x, int order) const {
  check_pole(cplx(x, 0.0));
  const double isp = 1.0 / sqrt_phi_;
  const double p = static_cast<double>(p_);
  double s = 0.0;
  switch (order) {
    case 0:
      for (const auto& a : atoms_)
        s += static_cast<double>(a.mult) * a.value / (1.0 + isp * a.value * x);
      return -1.0 / x + sqrt_phi_ / p * s;
    case 1:
      for (const auto& a : atoms_) {
        const double d = 1.0 + isp * a.value * x;
        s += static_cast<double>(a.mult) * a.value * a.value / (d * d);
      }
      return 1.0 / (x * x) - s / p;
    case 2:
      for (const auto& a : atoms_) {
        const double d = 1.0 + isp * a.value * x;
        s += isp * static_cast<double>(a.mult) * a.value * a.value * a.value / (d * d * d);
      }
      return -2.0 / (x * x * x) + 2.0 * s / p;
    default:
      throw Error("derivative order must be 0, 1 or 2");
  }
}

cplx EquivalentLaw::f(cplx x, int order) const {
  check_pole(x);
  const double isp = 1.0 / sqrt_phi_;
  const double p = static_cast<double>(p_);
  cplx s = 0.0;
  switch (order) {
    case 0:
      for (const auto& a : atoms_)
        s += static_cast<double>(a.mult) * a.value / (1.0 + isp * a.value * x);
      return -1.0 / x + sqrt_phi_ / p * s;
    case 1:
      for (const auto& a : atoms_) {
        const cplx d = 1.0 + isp * a.value * x;
        s += static_cast<double>(a.mult) * a.value * a.value / (d * d);
      }
      return 1.0 / (x * x) - s / p;
    case 2:
      for (const auto& a : atoms_) {
        const cplx d = 1.0 + isp * a.value * x;
        s += isp * static_cast<double>(a.mult) * a.value * a.value * a.value / (d * d * d);
      }
      return -2.0 / (x * x * x) + 2.0 * s / p;
    default:
      throw Error("derivative order must be 0, 1 or 2");
  }
}

cplx EquivalentLaw::solve_m(cplx z) const {
  const double eta = std::imag(z);
  if (eta < 0.0) return std::conj(solve_m(std::conj(z)));
  if (eta > 0.0) return solve_uhp(*this, std::real(z), eta);
  const double E = std::real(z);
  if (E > gamma_plus_) return {solve_real_above(*this, E), 0.0};
  if (E < gamma_minus_) return {solve_real_below(*this, E), 0.0};
  return solve_uhp(*this, E, 0.0);
}

double EquivalentLaw::density(double E) const {
  if (E <= gamma_minus_ || E >= gamma_plus_) return 0.0;
  return std::imag(solve_uhp(*this, E, 0.0)) / M_PI;
}

std::vector<double> EquivalentLaw::quantiles(int n) const {
  if (n < 1) throw DimensionMismatch("quantile count must be positive");
  const TailMass tm(*this);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i)
    out.push_back(tm.invert(static_cast<double>(i) / static_cast<double>(n)));
  return out;
}

double EquivalentLaw::quantile(int i, int n) const {
  if (n < 1 || i < 1 || i > n) throw DimensionMismatch("quantile index out of range");
  const TailMass tm(*this);
  return tm.invert(static_cast<double>(i) / static_cast<double>(n));
}

DensityCurve EquivalentLaw::density_curve(int K) const {
  if (K < 2) throw DimensionMismatch("density grid needs at least two points");
  DensityCurve c;
  c.grid.reserve(static_cast<size_t>(K));
  c.values.reserve(static_cast<size_t>(K));
  const double span = gamma_plus_ - gamma_minus_;
  for (int k = 0; k < K; ++k) {
    const double theta = M_PI * static_cast<double>(k) / static_cast<double>(K - 1);
    const double E = gamma_minus_ + 0.5 * span * (1.0 - std::cos(theta));
    c.grid.push_back(E);
    c.values.push_back(density(E));
  }
  c.mass = TailMass(*this).mass();
  return c;
}

// ---- TailMass ----

TailMass::TailMass(const EquivalentLaw& law) : law_(law) {
  const double gp = law.gamma_plus(), gm = law.gamma_minus();
  if (!(gp > gm)) throw QuadratureFailure("degenerate support");
  const double mid = 0.5 * (gp + gm);
  u_max_ = std::sqrt(gp - mid);
  v_max_ = std::sqrt(mid - gm);
  const auto iu = [&](double u) { return 2.0 * u * law_.density(gp - u * u); };
  const auto iv = [&](double v) { return 2.0 * v * law_.density(gm + v * v); };

  std::vector<std::array<double, 3>> raw;
  const auto build = [&](const auto& f, double b, std::vector<Panel>& side,
                         double& side_mass) {
    raw.clear();
    const double fa = f(0.0), fb = f(b), fm = f(0.5 * b);
    panelize(f, 0.0, b, fa, fm, fb, b / 6.0 * (fa + 4.0 * fm + fb), 1e-10, 36, raw);
    side.clear();
    double cum = 0.0;
    for (const auto& t : raw) {
      cum += t[2];
      side.push_back({t[0], t[1], t[2], cum});
    }
    side_mass = cum;
  };
  build(iu, u_max_, upper_, upper_mass_);
  build(iv, v_max_, lower_, lower_mass_);
  mass_ = upper_mass_ + lower_mass_;
  if (std::fabs(mass_ - 1.0) > 1e-6)
    throw QuadratureFailure("law mass deviates from one beyond 1e-6");
}

double TailMass::partial(const std::vector<Panel>& panels, double x) const {
  const bool upper = &panels == &upper_;
  const double gp = law_.gamma_plus(), gm = law_.gamma_minus();
  const auto integrand = [&](double t) {
    return upper ? 2.0 * t * law_.density(gp - t * t) : 2.0 * t * law_.density(gm + t * t);
  };
  double acc = 0.0;
  for (const auto& pan : panels) {
    if (pan.b <= x) {
      acc = pan.cum;
      continue;
    }
    if (pan.a < x) acc += integrate(integrand, pan.a, x, 1e-11);
    break;
  }
  return acc;
}

double TailMass::N(double E) const {
  const double gp = law_.gamma_plus(), gm = law_.gamma_minus();
  if (E >= gp) return 0.0;
  if (E <= gm) return 1.0;
  const double mid = 0.5 * (gp + gm);
  const double raw = E >= mid ? partial(upper_, std::sqrt(gp - E))
                              : mass_ - partial(lower_, std::sqrt(E - gm));
  return raw / mass_;
}

double TailMass::invert_in(const std::vector<Panel>& panels, double target,
                           bool upper) const {
  double lo = 0.0, hi = upper ? u_max_ : v_max_;
  for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (partial(panels, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double TailMass::invert(double q) const {
  const double target = q * mass_;
  if (target <= upper_mass_) {
    const double u = invert_in(upper_, target, true);
    return law_.gamma_plus() - u * u;
  }
  const double v = invert_in(lower_, mass_ - target, false);
  return law_.gamma_minus() + v * v;
}

}  // namespace spikecov
