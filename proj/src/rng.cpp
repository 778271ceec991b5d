#include "keg/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "keg/special.hpp"

namespace keg {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;

inline void mulhilo(std::uint32_t a,
                    std::uint32_t b,
                    std::uint32_t& hi,
                    std::uint32_t& lo) noexcept
{
    std::uint64_t const product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline PhiloxCounter
make_counter(std::uint64_t stream, std::uint64_t block) noexcept
{
    return {static_cast<std::uint32_t>(block),
            static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
}

inline PhiloxKey make_key(std::uint64_t seed) noexcept
{
    return {static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32)};
}

inline double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 11) + 0.5) * kTwoPowMinus53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream)
{
}

CounterRng CounterRng::split(std::uint64_t tag) const noexcept
{
    return CounterRng(seed_, mix64(stream_ ^ mix64(tag + 0x5851f42d4c957f2dull)));
}

std::uint64_t CounterRng::next_u64() noexcept
{
    if (used_ >= 4)
    {
        buffer_ = philox4x32(make_counter(stream_, block_++), make_key(seed_));
        used_ = 0;
    }
    std::uint64_t const lo = buffer_[used_];
    std::uint64_t const hi = buffer_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double CounterRng::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * kTwoPowMinus53;
}

double CounterRng::uniform_open() noexcept
{
    return to_open_unit(next_u64());
}

double CounterRng::uniform_at(std::uint64_t seed,
                              std::uint64_t stream,
                              std::uint64_t index) noexcept
{
    auto const out = philox4x32(make_counter(stream, index), make_key(seed));
    return to_open_unit((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

double sample_exponential(CounterRng& rng, double rate) noexcept
{
    return -std::log(rng.uniform_open()) / rate;
}

std::uint64_t sample_poisson(CounterRng& rng, double mean)
{
    if (!(mean >= 0) || !std::isfinite(mean))
    {
        throw std::invalid_argument("Poisson mean must be finite and >= 0");
    }
    if (mean == 0)
    {
        return 0;
    }
    if (mean < 10)
    {
        // Sequential search of the CDF
        double p = std::exp(-mean);
        double cdf = p;
        double const u = rng.uniform();
        std::uint64_t k = 0;
        while (u > cdf && k < 1000)
        {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    // Transformed rejection with squeeze
    double const slam = std::sqrt(mean);
    double const loglam = std::log(mean);
    double const b = 0.931 + 2.53 * slam;
    double const a = -0.059 + 0.02483 * b;
    double const invalpha = 1.1239 + 1.1328 / (b - 3.4);
    double const vr = 0.9277 - 3.6224 / (b - 2);
    for (;;)
    {
        double const u = rng.uniform() - 0.5;
        double const v = rng.uniform();
        double const us = 0.5 - std::fabs(u);
        double const k = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr)
        {
            return static_cast<std::uint64_t>(k);
        }
        if (k < 0 || (us < 0.013 && v > us))
        {
            continue;
        }
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b)
            <= -mean + k * loglam - log_gamma(k + 1))
        {
            return static_cast<std::uint64_t>(k);
        }
    }
}

std::uint64_t sample_geometric_skip(CounterRng& rng, double q) noexcept
{
    if (q >= 1)
    {
        return 0;
    }
    if (!(q > 0))
    {
        return std::numeric_limits<std::uint64_t>::max();
    }
    double const skip = std::floor(std::log(rng.uniform_open()) / std::log1p(-q));
    if (!(skip < 1.8e19))
    {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(skip);
}

}  // namespace keg
