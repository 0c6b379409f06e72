#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace agn {

std::uint64_t splitmix64(std::uint64_t& state);

/// Child seed for an independent stream. Deterministic in (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double normal();
    bool bernoulli(double p) { return uniform() < p; }
    // Uniform index in [0, n).
    std::uint64_t below(std::uint64_t n);

    void unit_vector(std::span<double> out);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

// Stream identifiers used to split one experiment seed across subsystems.
namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t train = 2;
inline constexpr std::uint64_t validation = 3;
inline constexpr std::uint64_t test = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t outer = 6;
inline constexpr std::uint64_t diagnostics = 7;
}  // namespace stream

}  // namespace agn
