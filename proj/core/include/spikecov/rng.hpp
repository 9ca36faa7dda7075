#pragma once

#include <cstdint>

namespace spikecov {

// Deterministic natural log for x in (0, 1]: frexp reduction plus an atanh
// series using only +,-,*,/ (all correctly rounded), so results are
// bit-identical across platforms and libms.
double portable_log(double x);

// Counter-based per-trial stream. Draw k of stream (seed, t) is
//   fmix64(stream_seed + k * GOLDEN),  stream_seed = fmix64(fmix64(seed + (t+1) * GOLDEN)),
// with fmix64 the splitmix64 finalizer and GOLDEN = 0x9E3779B97F4A7C15.
// Streams for distinct trial indices never share draws; within a stream the
// draw counter advances sequentially (variate transforms may consume a
// variable number of draws).
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t trial_index);

  std::uint64_t next_u64();
  double next_unit();       // [0, 1), 53-bit resolution

  // Standardized variates (mean 0, variance 1).
  double next_gaussian();   // Marsaglia polar with portable_log
  double next_uniform();    // U[-sqrt(3), sqrt(3)]
  double next_rademacher(); // +1 or -1

 private:
  std::uint64_t s0_ = 0;
  std::uint64_t k_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

std::uint64_t fmix64(std::uint64_t z);

}  // namespace spikecov
