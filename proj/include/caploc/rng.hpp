#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace caploc {

/// splitmix64 hash step; used to derive decorrelated seed streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for one acquisition location: base XOR index * golden-gamma, mod 2^64.
inline std::uint64_t location_seed(std::uint64_t base_seed, std::uint64_t index) {
    return base_seed ^ (index * 0x9E3779B97F4A7C15ULL);
}

/// Deterministic random source. std::mt19937_64 has a fully specified bit
/// stream; the distribution transforms are written out here because the
/// standard library's distribution objects are implementation-defined and
/// would break the bitwise reproducibility contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes two engine draws per call.
    double gaussian() {
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform offset within a disc of the given radius (polar transform).
    std::pair<double, double> disc(double radius) {
        const double r = radius * std::sqrt(uniform());
        const double theta = 2.0 * std::numbers::pi * uniform();
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace caploc
