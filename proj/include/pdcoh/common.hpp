#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pdcoh {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex iunit{0.0, 1.0};

// thrown when a scenario/config file fails validation
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// thrown when an internal numerical consistency check fails (e.g. a rate
// that comes out negative beyond quadrature tolerance)
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// thrown when a closed form degenerates in a flagged limit
struct unsupported_limit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::domain_error(std::string("non-finite ") + what);
}

// splitmix64; used to derive independent per-chunk seeds so parallel
// sampling is schedule-independent
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t chunk) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace pdcoh
