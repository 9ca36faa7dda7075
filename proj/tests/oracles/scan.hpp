#pragma once

// Brute-force numeric oracles: dense sign-scan root location, composite
// Simpson quadrature, central finite differences.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

// All sign-change locations of fn on a uniform N-point grid over (lo, hi),
// each refined by plain bisection. Endpoints are excluded (often poles).
inline std::vector<double> sign_scan_roots(const Fn& fn, double lo, double hi,
                                           int N = 1000000) {
  std::vector<double> roots;
  const double h = (hi - lo) / (N + 1);
  double xprev = lo + h, fprev = fn(xprev);
  for (int k = 2; k <= N; ++k) {
    const double x = lo + k * h, fx = fn(x);
    if ((fprev < 0.0) != (fx < 0.0)) {
      double a = xprev, b = x, fa = fprev;
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::fabs(a)); ++it) {
        const double m = 0.5 * (a + b), fm = fn(m);
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    xprev = x;
    fprev = fx;
  }
  return roots;
}

inline double simpson(const Fn& fn, double a, double b, int panels = 4000) {
  const double h = (b - a) / (2.0 * panels);
  double acc = fn(a) + fn(b);
  for (int k = 1; k < 2 * panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * fn(a + k * h);
  return acc * h / 3.0;
}

inline double fd1(const Fn& fn, double x, double h = 0.0) {
  if (h == 0.0) h = 1e-6 * std::max(1.0, std::fabs(x));
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

inline double fd2(const Fn& fn, double x, double h = 0.0) {
  if (h == 0.0) h = 3e-5 * std::max(1.0, std::fabs(x));
  return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h);
}

}  // namespace oracle
