#pragma once

#include <optional>

namespace adamas {

enum class SimdLevel {
    scalar,
    avx2,
};

// True if the CPU this process runs on supports AVX2.
bool cpu_supports_avx2();

// Level the dispatcher resolves to: the override if one is set, otherwise the
// best level the CPU supports. The environment variable ADAMAS_SIMD
// (values: "scalar", "avx2") acts as an initial override.
SimdLevel active_simd_level();

// Force a level (tests use this to compare kernel variants). Requesting avx2
// on a CPU without it throws. nullopt restores auto detection.
void set_simd_override(std::optional<SimdLevel> level);

const char* simd_level_name(SimdLevel level);

}  // namespace adamas
