#include "spikecov/rng.hpp"

#include <cmath>

namespace spikecov {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// atanh series: log(m) = 2 atanh((m-1)/(m+1)), m in [0.5, 1). With
// |t| <= 1/3 the series t + t^3/3 + ... reaches double precision well
// inside 25 terms; every operation is correctly rounded, so the result is
// reproducible across libms.
double log_mantissa(double m) {
  const double t = (m - 1.0) / (m + 1.0);
  const double t2 = t * t;
  double term = t;
  double acc = 0.0;
  for (int k = 0; k < 25; ++k) {
    acc += term / (2.0 * k + 1.0);
    term *= t2;
  }
  return 2.0 * acc;
}

// ln 2 to the last bit; multiplication by an int exponent stays exact enough
// because the error is one rounding per operation.
constexpr double kLn2 = 0.6931471805599453094172321214581766;

}  // namespace

double portable_log(double x) {
  if (x == 1.0) return 0.0;
  int e = 0;
  double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
  return log_mantissa(m) + static_cast<double>(e) * kLn2;
}

std::uint64_t fmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

Stream::Stream(std::uint64_t master_seed, std::uint64_t trial_index)
    : s0_(fmix64(fmix64(master_seed + (trial_index + 1) * kGolden))) {}

std::uint64_t Stream::next_u64() { return fmix64(s0_ + (k_++) * kGolden); }

double Stream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  for (;;) {
    const double u = 2.0 * next_unit() - 1.0;
    const double v = 2.0 * next_unit() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double scale = std::sqrt(-2.0 * portable_log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }
}

double Stream::next_uniform() {
  constexpr double kSqrt3 = 1.7320508075688772935274463415059;
  return kSqrt3 * (2.0 * next_unit() - 1.0);
}

double Stream::next_rademacher() {
  return (next_u64() >> 63) ? 1.0 : -1.0;
}

}  // namespace spikecov
