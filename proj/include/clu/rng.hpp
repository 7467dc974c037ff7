#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace clu {

/// Deterministic, serializable pseudo-random generator (xoshiro256**).
///
/// Every stochastic component in the workbench draws from one of these so
/// that runs are reproducible bit-for-bit and generator state can be stored
/// in checkpoints as four 64-bit words. Sub-streams for independent purposes
/// are derived with fork() rather than by sharing one stream.
class Rng {
public:
    using State = std::array<std::uint64_t, 4>;

    explicit Rng(std::uint64_t seed);
    explicit Rng(const State& state) : s_(state) {}

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller. Stateless between calls (the second
    /// variate of each pair is discarded so no spare needs serializing).
    double normal();

    /// Uniform integer in [0, n). n must be > 0. Unbiased (rejection).
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Derive an independent generator for a tagged purpose. The same
    /// (parent seed, tag) pair always yields the same child stream.
    Rng fork(std::uint64_t tag) const;

    const State& state() const noexcept { return s_; }
    void restore(const State& state) noexcept { s_ = state; }

private:
    State s_{};
};

/// 64-bit mixing function (splitmix64 finalizer); used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace clu
