#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mim {

// All randomness flows through named streams so that inserting one consumer
// never perturbs another. A stream is keyed by (seed, label); the label is
// hashed with FNV-1a and mixed with the seed through splitmix64. mt19937_64
// output is fully specified by the standard, so sequences are reproducible
// across platforms. Floating draws use an explicit 53-bit mapping instead of
// std::uniform_real_distribution (whose output is implementation-defined).

std::uint64_t fnv1a(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    // Uniform in [0, 1).
    double uniform();

    std::uint64_t bits() { return engine_(); }

    // Index sample by inverse CDF over the given weights (need not be
    // normalized). Ties and rounding resolve toward lower indices.
    std::size_t sample(const std::vector<double>& weights);

private:
    std::mt19937_64 engine_;
};

}  // namespace mim
