#include <cmath>

#include "doctest.h"
#include "keg/errors.hpp"
#include "keg/quadrature.hpp"
#include "keg/rng.hpp"

using namespace keg;

TEST_CASE("semi-infinite examples")
{
    auto r = integrate_semiinf([](double x) { return std::exp(-x); });
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 1) < 1e-8);

    r = integrate_semiinf([](double x) { return 1 / ((x + 1) * (x + 1)); });
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 1) < 1e-8);

    r = integrate_semiinf([](double x) { return 1 / (3 * (x + 1) * (x + 1)); },
                          1e-8,
                          [](double a) { return 1 / (3 * (a + 1)); });
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 1.0 / 3) < 1e-8);
    CHECK(r.error_estimate <= 1e-8 * std::max(1.0, std::fabs(r.value)));
}

TEST_CASE("finite intervals and analytic values")
{
    auto r = integrate([](double x) { return std::sin(x); }, 0, M_PI);
    CHECK(r.value == doctest::Approx(2).epsilon(1e-12));
    r = integrate([](double x) { return std::sqrt(x); }, 0, 1);
    CHECK(r.value == doctest::Approx(2.0 / 3).epsilon(1e-9));
    r = integrate([](double x) { return x < 0.3 ? 1.0 : 0.0; }, 0, 1);
    CHECK(r.value == doctest::Approx(0.3).epsilon(1e-7));
    r = integrate_from([](double x) { return std::exp(-2 * x); }, 1.5);
    CHECK(r.value == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("errors and non-convergence")
{
    CHECK_THROWS_AS(integrate_semiinf([](double x) { return std::exp(-x); }, 0.5),
                    ConfigError);
    CHECK_THROWS_AS(integrate_semiinf([](double x) { return std::exp(-x); }, 0.0),
                    ConfigError);
    CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0, 1), QuadratureError);
    QuadratureOptions opts;
    opts.max_evaluations = 200000;
    auto const r = integrate_semiinf([](double) { return 1.0; }, 1e-8, {}, opts);
    CHECK_FALSE(r.converged);
}

TEST_CASE("linearity on random integrands")
{
    CounterRng rng(5, 0);
    for (int trial = 0; trial < 20; ++trial)
    {
        double const a = 3 * rng.uniform() - 1;
        double const b = 3 * rng.uniform() - 1;
        double const p = 0.2 + 2 * rng.uniform();
        double const q = 1.5 + 2 * rng.uniform();
        Integrand const f = [p](double x) { return std::exp(-p * x) * (1 + std::cos(x)); };
        Integrand const g = [q](double x) { return std::pow(x + 1, -q); };
        auto const rf = integrate_semiinf(f);
        auto const rg = integrate_semiinf(g);
        auto const rh = integrate_semiinf([&](double x) { return a * f(x) + b * g(x); });
        double const combined = std::fabs(a) * rf.error_estimate
                                + std::fabs(b) * rg.error_estimate + rh.error_estimate;
        CHECK(std::fabs(rh.value - (a * rf.value + b * rg.value))
              <= combined + 1e-8 * std::fabs(rh.value) + 1e-12);
        // Analytic check of the power law piece
        CHECK(rg.value == doctest::Approx(1 / (q - 1)).epsilon(1e-7));
    }
}
