#include <atomic>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "keg/harness.hpp"
#include "keg/rng.hpp"
#include "keg/stats.hpp"

using namespace keg;

namespace {

Graphex zero_kernel()
{
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0;
    return build(s);
}

Graphex slow()
{
    GraphexSpec s;
    s.family = Family::slow_decay;
    return build(s);
}

}  // namespace

TEST_CASE("parallel_for visits every index once")
{
    for (unsigned threads : {1u, 2u, 5u})
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::uint64_t i) { ++hits[i]; });
        for (auto const& h : hits)
            CHECK(h.load() == 1);
    }
    CHECK(replicate_stream(1, 2, 3) != replicate_stream(1, 3, 2));
    CHECK(replicate_stream(0, 0, 5) != replicate_stream(1, 0, 5));
}

TEST_CASE("summaries")
{
    Summary const s = summarize({1, 2, 3, 4});
    CHECK(s.mean == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3) / 2));
    std::vector<double> v(1001, 0.1);
    CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(100.1).epsilon(1e-14));
}

TEST_CASE("kolmogorov-smirnov")
{
    // Tabulated critical values of the Kolmogorov distribution
    CHECK(kolmogorov_survival(1.2238) == doctest::Approx(0.10).epsilon(2e-3));
    CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    CHECK(kolmogorov_survival(1.9495) == doctest::Approx(0.001).epsilon(2e-3));
    CHECK(kolmogorov_survival(0) == 1);
    std::vector<double> a{1, 2, 3, 4, 5};
    CHECK(ks_two_sample(a, a).statistic == 0);
    CHECK(ks_two_sample(a, a).p_value == 1);
    CounterRng rng(1, 0);
    std::vector<double> x(2000);
    std::vector<double> y(2000);
    std::vector<double> z(2000);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        x[i] = rng.uniform();
        y[i] = rng.uniform();
        z[i] = rng.uniform() + 0.1;
    }
    CHECK(ks_two_sample(x, y).p_value > 1e-3);
    CHECK(ks_two_sample(x, z).p_value < 1e-6);
}

TEST_CASE("chi-square")
{
    TestResult const r = chi_square_gof({20, 30, 50}, {0.2, 0.3, 0.5});
    CHECK(r.statistic == 0);
    CHECK(r.df == 2);
    CHECK(r.p_value == doctest::Approx(1));
    TestResult const s = chi_square_gof({30, 30, 40}, {0.2, 0.3, 0.5});
    CHECK(s.statistic == doctest::Approx(100.0 / 20 + 0 + 100.0 / 50));
    boost::math::chi_squared_distribution<double> dist(2);
    CHECK(s.p_value == doctest::Approx(boost::math::cdf(boost::math::complement(dist, 7.0))));

    std::vector<std::uint64_t> wrong(5000, 3);
    CHECK(chi_square_poisson(wrong, 3).p_value < 1e-10);
}

TEST_CASE("validation on a zero kernel")
{
    ValidateConfig cfg;
    cfg.nu_grid = {5, 10};
    cfg.replicates = 50;
    ValidationReport const r = validate_expectations(zero_kernel(), cfg);
    CHECK(r.all_pass());
    REQUIRE(r.rows.size() == 8);
    for (auto const& row : r.rows)
    {
        CHECK(row.mean == 0);
        CHECK(row.theory == 0);
        CHECK(row.z == 0);
    }
}

TEST_CASE("validation is deterministic and thread-count independent")
{
    ValidateConfig cfg;
    cfg.nu_grid = {5, 10};
    cfg.replicates = 100;
    cfg.seed = 12;
    ValidationReport const a = validate_expectations(slow(), cfg);
    ValidationReport const b = validate_expectations(slow(), cfg);
    cfg.threads = 3;
    ValidationReport const c = validate_expectations(slow(), cfg);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(to_json(a).dump() == to_json(c).dump());
    CHECK(to_csv(a) == to_csv(c));
    CHECK(a.all_pass());

    cfg.stats = {"triangles"};
    CHECK_THROWS_AS(validate_expectations(slow(), cfg), ConfigError);
    cfg.stats = {"edges"};
    cfg.replicates = 10;
    CHECK_THROWS_AS(validate_expectations(slow(), cfg), ConfigError);
}

TEST_CASE("a wrong theory is caught")
{
    // Mean of a sample against a theory off by ten percent
    ValidateConfig cfg;
    cfg.nu_grid = {20};
    cfg.replicates = 500;
    cfg.stats = {"edges"};
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0.5;
    s.c = 2;
    Graphex const truth = build(s);
    s.p = 0.55;
    Graphex const other = build(s);
    ValidationReport const good = validate_expectations(truth, cfg);
    CHECK(good.all_pass());
    double const theory_other = 0.5 * 400 * other.kernel_norm();
    double const z = (good.rows[0].mean - theory_other) / good.rows[0].se;
    CHECK(std::fabs(z) > 4);
}

TEST_CASE("experiments reject empty inputs")
{
    DegdistConfig d;
    d.nu_grid = {10};
    d.replicates = 20;
    CHECK_THROWS_AS(degdist_experiment(zero_kernel(), d), DegenerateError);

    ConnectivityConfig c;
    c.nu_grid = {10};
    c.replicates = 5;
    CHECK_THROWS_AS(connectivity_experiment(separable_from_expression("0*x"), c),
                    DegenerateError);

    ProjectivityConfig p;
    p.replicates = 100;
    ProjectivityReport const pr = projectivity_test(zero_kernel(), p);
    CHECK(pr.pass);
    CHECK(pr.mean_direct == 0);
    CHECK(pr.mean_restricted == 0);
}

TEST_CASE("isolated-only projectivity")
{
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0;
    s.isolated_rate = 0.1;
    ProjectivityConfig p;
    p.nu = 5;
    p.replicates = 1000;
    ProjectivityReport const r = projectivity_test(build(s), p);
    CHECK(r.pass);
    CHECK(std::fabs(r.mean_direct - 2.5) < 4 * std::sqrt(2.5 / 1000));
    CHECK(std::fabs(r.mean_restricted - 2.5) < 4 * std::sqrt(2.5 / 1000));
}

TEST_CASE("compact separable kernel connects quickly")
{
    ConnectivityConfig c;
    c.nu_grid = {20, 40};
    c.replicates = 20;
    ConnectivityReport const r
        = connectivity_experiment(separable_from_expression("1", 1.0), c);
    CHECK(r.pass);
    CHECK(r.rows.back().mean_fraction == doctest::Approx(1));
}

TEST_CASE("planted degree on a small run")
{
    PlantedConfig cfg;
    cfg.nu = 10;
    cfg.replicates = 2000;
    cfg.latent = {0.0, 1.0};
    PlantedReport const r = planted_degree_test(slow(), cfg);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].poisson_mean == doctest::Approx(10.0 / 3));
    CHECK(r.rows[1].poisson_mean == doctest::Approx(10.0 / 12));
    CHECK(r.pass);
}
