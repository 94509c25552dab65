#ifndef BBM_RNG_HPP
#define BBM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "vec2.hpp"

namespace bbm
{

/// SplitMix64 finalizer (Steele, Lea & Flood). Used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under master seed `seed`:
///   splitmix64(splitmix64(seed) ^ splitmix64(index + 1)).
/// The rule is fixed so that other implementations can reproduce the
/// per-path stream assignment. `salt` separates unrelated uses of one seed
/// (e.g. billiard paths vs. SDE paths); it is xor-ed into `index`.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index,
                                    std::uint64_t salt = 0) noexcept
{
    return splitmix64(splitmix64(seed) ^ splitmix64((index ^ salt) + 1));
}

/// mt19937_64 with portable floating-point draws: the standard library
/// distributions are implementation defined, these are not.
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0)
    {
        return Rng(stream_seed(seed, index, salt));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open()
    {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    Vec2 normal2()
    {
        const double a = normal();
        const double b = normal();
        return {a, b};
    }

    Vec2 unit_vector()
    {
        const double ang = 2.0 * std::numbers::pi * uniform();
        return {std::cos(ang), std::sin(ang)};
    }

    // UniformRandomBitGenerator interface, for std::shuffle and friends.
    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bbm

#endif // BBM_RNG_HPP
