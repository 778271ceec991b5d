#pragma once

#include <array>
#include <cstdint>

namespace keg {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure function of (counter, key).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// SplitMix64 finalizer; used to derive stream identifiers.
std::uint64_t mix64(std::uint64_t z) noexcept;

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator addressed by (seed, stream, position).
 *
 * The seed is the Philox key, the stream id occupies the upper two counter
 * words and the block position the lower two. Distinct streams never overlap
 * and any position can be read without generating its predecessors, so the
 * output of a stream does not depend on scheduling.
 */
class CounterRng
{
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    //! Child stream derived from this stream and a tag.
    CounterRng split(std::uint64_t tag) const noexcept;

    std::uint64_t next_u64() noexcept;
    //! Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    //! Uniform on the open interval (0, 1).
    double uniform_open() noexcept;

    //! Random-access uniform on (0, 1): the index-th value of a stream.
    static double uniform_at(std::uint64_t seed,
                             std::uint64_t stream,
                             std::uint64_t index) noexcept;

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
};

//! Exponential variate with the given rate (> 0).
double sample_exponential(CounterRng& rng, double rate) noexcept;

//! Poisson variate. Inversion for small means, PTRS (Hoermann 1993) above.
std::uint64_t sample_poisson(CounterRng& rng, double mean);

/*!
 * Number of failures before the first success of Bernoulli(q) trials.
 *
 * Returns 0 for q >= 1 and UINT64_MAX for q <= 0.
 */
std::uint64_t sample_geometric_skip(CounterRng& rng, double q) noexcept;

inline bool sample_bernoulli(CounterRng& rng, double p) noexcept
{
    return rng.uniform() < p;
}

}  // namespace keg
