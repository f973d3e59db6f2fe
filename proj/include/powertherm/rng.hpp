#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace powertherm {

// Deterministic Gaussian stream used wherever this toolkit needs noise.
//
// The generator is fully specified so fixtures can be reproduced outside
// this codebase (see README): an std::mt19937_64 seeded with `seed`
// produces 64-bit words; each uniform draw maps the top 53 bits to
// [0, 1) via (x >> 11) * 2^-53; each Gaussian draw consumes two uniforms
// u1, u2 and returns the Box-Muller cosine branch only:
//
//   z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
//
// std::normal_distribution is avoided on purpose: its output is
// implementation-defined and would break cross-platform fixtures.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double uniform01()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal(double mean, double sigma)
    {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return mean + sigma * z;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace powertherm
