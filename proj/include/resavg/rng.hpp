#pragma once

#include "resavg/complexcore.hpp"

#include <cstdint>
#include <random>

namespace resavg {

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`. Streams are independent of the order in
/// which they are consumed, so trajectories can run on any thread.
[[nodiscard]] constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index,
                                                         std::uint64_t salt = 0) noexcept {
    return mix64(master ^ (0x9E3779B97F4A7C15ULL * (index + 1)) ^ mix64(salt));
}

/// One RNG stream, owned by one execution strand at a time.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Re and Im independent N(0, 1), so E|z|^2 = 2.
    Complex complex_gaussian() {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re, im};
    }
    std::size_t index(std::size_t bound) {
        return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace resavg
