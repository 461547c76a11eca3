#pragma once

#include <cstdint>
#include <vector>

namespace cellflow {

/// Counter-based generator (SplitMix64 over a keyed counter).
///
/// Output depends only on (seed, stream, draw index), so identical seeds give
/// identical streams on every platform, and substreams can be handed to workers
/// without perturbing the sequential stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent generator keyed by this generator's key and `tag`.
    Rng substream(std::uint64_t tag) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal, polar method.
    double normal();
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p);
    /// Poisson variate; inversion for small means, PTRS rejection otherwise.
    std::uint64_t poisson(double mean);

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::int64_t> permutation(std::int64_t n);

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);
/// Deterministic seed derivation from a parent seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

}  // namespace cellflow
