#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tart {

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits of the generator.
inline double uniform_draw(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Consumes exactly two uniforms per draw and
// keeps no internal state, so seeded streams are reproducible everywhere
// (std::normal_distribution is implementation-defined).
inline double normal_draw(Rng& rng) {
    const double u1 = 1.0 - uniform_draw(rng); // (0, 1], keeps log finite
    const double u2 = uniform_draw(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace tart
