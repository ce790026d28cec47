#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ghicast {

/// Seeded generator whose derived draws (uniforms, indices, normals) are
/// specified here rather than by the standard library's distributions, so
/// shuffles and bootstraps reproduce across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n). Requires n > 0.
    std::size_t index(std::size_t n);

    /// Standard normal via Box-Muller.
    double normal();

    template<typename T>
    void shuffle(std::vector<T>& values)
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent per-stream seeds such as
/// (master seed, tree index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace ghicast
