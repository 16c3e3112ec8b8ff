#include "adamas/simd.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace adamas {

namespace {

std::optional<SimdLevel> parse_env_override() {
    const char* env = std::getenv("ADAMAS_SIMD");
    if (env == nullptr) return std::nullopt;
    std::string v(env);
    if (v == "scalar") return SimdLevel::scalar;
    if (v == "avx2") return SimdLevel::avx2;
    return std::nullopt;
}

std::optional<SimdLevel>& override_slot() {
    static std::optional<SimdLevel> slot = parse_env_override();
    return slot;
}

}  // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported;
#else
    return false;
#endif
}

SimdLevel active_simd_level() {
    if (auto forced = override_slot()) return *forced;
    return cpu_supports_avx2() ? SimdLevel::avx2 : SimdLevel::scalar;
}

void set_simd_override(std::optional<SimdLevel> level) {
    if (level == SimdLevel::avx2 && !cpu_supports_avx2()) {
        throw std::runtime_error("AVX2 requested but not supported by this CPU");
    }
    override_slot() = level;
}

const char* simd_level_name(SimdLevel level) {
    switch (level) {
        case SimdLevel::scalar: return "scalar";
        case SimdLevel::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace adamas
