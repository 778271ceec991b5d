#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "keg/rng.hpp"
#include "keg/stats.hpp"

using namespace keg;

TEST_CASE("philox known-answer vectors")
{
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0})
          == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                     {0xffffffff, 0xffffffff})
          == PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                     {0xa4093822, 0x299f31d0})
          == PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct")
{
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    CounterRng c(42, 8);
    CounterRng d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i)
    {
        auto const x = a.next_u64();
        CHECK(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);

    std::set<std::uint64_t> streams;
    CounterRng base(1, 0);
    for (std::uint64_t tag = 0; tag < 1000; ++tag)
        streams.insert(base.split(tag).stream());
    CHECK(streams.size() == 1000);
}

TEST_CASE("uniform ranges")
{
    CounterRng rng(3, 0);
    for (int i = 0; i < 100000; ++i)
    {
        double const u = rng.uniform();
        CHECK_UNARY(u >= 0);
        CHECK_UNARY(u < 1);
        double const v = rng.uniform_open();
        CHECK_UNARY(v > 0);
        CHECK_UNARY(v < 1);
    }
    double const w = CounterRng::uniform_at(5, 6, 123456789);
    CHECK(w == CounterRng::uniform_at(5, 6, 123456789));
    CHECK(w > 0);
    CHECK(w < 1);
}

namespace {

Summary poisson_moments(double mean, int n, std::uint64_t stream)
{
    CounterRng rng(11, stream);
    std::vector<double> xs(n);
    for (auto& x : xs)
        x = static_cast<double>(sample_poisson(rng, mean));
    return summarize(xs);
}

}  // namespace

TEST_CASE("poisson moments across both regimes")
{
    for (double mean : {0.0, 0.3, 4.0, 9.9, 10.5, 55.0, 2500.0})
    {
        CAPTURE(mean);
        int const n = 200000;
        Summary const s = poisson_moments(mean, n, static_cast<std::uint64_t>(mean * 10));
        double const se = std::sqrt(mean / n);
        CHECK(std::fabs(s.mean - mean) <= 5 * se + 1e-12);
        // Variance of the sample variance for Poisson: (mean + 2 mean^2 / (n-1)) / n approx
        double const var_se = std::sqrt((mean + 2 * mean * mean) / n);
        CHECK(std::fabs(s.sd * s.sd - mean) <= 5 * var_se + 1e-12);
    }
    CounterRng rng(0, 0);
    CHECK_THROWS(sample_poisson(rng, -1.0));
    CHECK_THROWS(sample_poisson(rng, INFINITY));
}

TEST_CASE("poisson pmf matches by chi-square")
{
    for (double mean : {2.5, 30.0})
    {
        CounterRng rng(99, static_cast<std::uint64_t>(mean));
        std::vector<std::uint64_t> xs(100000);
        for (auto& x : xs)
            x = sample_poisson(rng, mean);
        CHECK(chi_square_poisson(xs, mean).p_value > 1e-4);
    }
}

TEST_CASE("geometric skip and exponential")
{
    CounterRng rng(21, 0);
    double const q = 0.05;
    std::vector<double> skips(200000);
    for (auto& s : skips)
        s = static_cast<double>(sample_geometric_skip(rng, q));
    Summary const g = summarize(skips);
    CHECK(g.mean == doctest::Approx((1 - q) / q).epsilon(0.02));
    CHECK(sample_geometric_skip(rng, 1.0) == 0);
    CHECK(sample_geometric_skip(rng, 0.0) == UINT64_MAX);

    std::vector<double> e(200000);
    for (auto& x : e)
        x = sample_exponential(rng, 4.0);
    CHECK(summarize(e).mean == doctest::Approx(0.25).epsilon(0.01));
}
