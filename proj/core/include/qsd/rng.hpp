#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace qsd {

/// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent lanes of the counter space. Each lane is addressed by
/// (step, slot) so draws never depend on call order.
enum class Lane : std::uint32_t { Noise = 0, Restart = 1, Auxiliary = 2, Sequential = 3 };

/// Counter-based random stream keyed by (seed, chain). The Gaussian increment
/// for (step, component) and the restart uniforms for (step, slot) are pure
/// functions of those indices, so runs are reproducible regardless of thread
/// count and coarse/fine grids can share noise.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t chain) noexcept
        : seed_(seed), chain_(chain) {
        const std::uint64_t k = splitmix64(seed ^ splitmix64(chain + 0x632BE59BD9B4E019ull));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t chain() const noexcept { return chain_; }

    std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t slot, Lane lane) const noexcept {
        return philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                           slot, static_cast<std::uint32_t>(lane)},
                          key_);
    }

    /// Standard normal N(0,1) for (step, component). Pairs of components share
    /// one Box-Muller draw; the last pair is cached.
    double gaussian(std::uint64_t step, std::uint32_t component) noexcept {
        const std::uint32_t pair = component >> 1;
        if (!(cache_valid_ && cache_step_ == step && cache_pair_ == pair)) {
            const auto w = block(step, pair, Lane::Noise);
            const double u1 = to_open_unit(join(w[0], w[1]));
            const double u2 = to_unit(join(w[2], w[3]));
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 2.0 * std::numbers::pi * u2;
            cache_[0] = r * std::cos(a);
            cache_[1] = r * std::sin(a);
            cache_step_ = step;
            cache_pair_ = pair;
            cache_valid_ = true;
        }
        return cache_[component & 1u];
    }

    /// Uniform in [0, 1) for (step, slot) on the given lane.
    double uniform(std::uint64_t step, std::uint32_t slot, Lane lane = Lane::Restart) const noexcept {
        const auto w = block(step, slot >> 1, lane);
        return (slot & 1u) ? to_unit(join(w[2], w[3])) : to_unit(join(w[0], w[1]));
    }

    /// Uniform in the open interval (0, 1).
    double open_uniform(std::uint64_t step, std::uint32_t slot, Lane lane = Lane::Restart) const noexcept {
        const auto w = block(step, slot >> 1, lane);
        return (slot & 1u) ? to_open_unit(join(w[2], w[3])) : to_open_unit(join(w[0], w[1]));
    }

    static double to_unit(std::uint64_t x) noexcept {
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }
    /// Midpoints of a 2^-52 grid: never 0 or 1 after rounding.
    static double to_open_unit(std::uint64_t x) noexcept {
        return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
    }

private:
    static std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept {
        return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
    }

    std::uint64_t seed_;
    std::uint64_t chain_;
    std::array<std::uint32_t, 2> key_{};
    double cache_[2] = {0.0, 0.0};
    std::uint64_t cache_step_ = 0;
    std::uint32_t cache_pair_ = 0;
    bool cache_valid_ = false;
};

/// Call-order driven view of an RngStream for work that is not indexed by a
/// simulation step (projections, test-statistic resampling). Also models
/// std::uniform_random_bit_generator.
class SequentialRng {
public:
    using result_type = std::uint64_t;

    explicit SequentialRng(RngStream stream) noexcept : stream_(stream) {}
    SequentialRng(std::uint64_t seed, std::uint64_t chain) noexcept : stream_(seed, chain) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const auto w = stream_.block(counter_ >> 1, 0, Lane::Sequential);
        const bool hi = counter_ & 1u;
        ++counter_;
        return hi ? (static_cast<std::uint64_t>(w[2]) | (static_cast<std::uint64_t>(w[3]) << 32))
                  : (static_cast<std::uint64_t>(w[0]) | (static_cast<std::uint64_t>(w[1]) << 32));
    }

    double uniform() noexcept { return RngStream::to_unit((*this)()); }
    double open_uniform() noexcept { return RngStream::to_open_unit((*this)()); }
    double gaussian() noexcept {
        const double r = std::sqrt(-2.0 * std::log(open_uniform()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

private:
    RngStream stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace qsd
