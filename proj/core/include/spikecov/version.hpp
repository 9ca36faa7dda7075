#pragma once

namespace spikecov {

inline constexpr const char* tool_name = "spikecov";
inline constexpr const char* tool_version = "0.1.0";

// Stream-derivation identifier carried in output metadata; bump on any change
// to the mixing function, the draw order, or the variate transforms.
inline constexpr const char* rng_version = "sm64ctr-1";

}  // namespace spikecov
