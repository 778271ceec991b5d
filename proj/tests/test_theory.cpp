#include <cmath>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "keg/theory.hpp"

using namespace keg;

namespace {

Graphex family(Family f)
{
    GraphexSpec s;
    s.family = f;
    return build(s);
}

double slow_vertices(double nu)
{
    double const r = std::sqrt(nu / 3);
    return nu * (std::sqrt(M_PI) * r * boost::math::erf(r) + std::exp(-nu / 3) - 1);
}

double slow_degree(double nu, int k)
{
    double const a = k - 0.5;
    double const lower = boost::math::tgamma(a) - boost::math::tgamma(a, nu / 3);
    return std::pow(nu, 1.5) * lower / (2 * std::sqrt(3.0) * boost::math::factorial<double>(k));
}

double fast_vertices(double nu)
{
    return nu * (boost::math::constants::euler<double>() + boost::math::expint(1, nu)
                 + std::log(nu));
}

double fast_degree(double nu, int k)
{
    return nu / boost::math::factorial<double>(k)
           * (boost::math::tgamma(static_cast<double>(k))
              - boost::math::tgamma(static_cast<double>(k), nu));
}

}  // namespace

TEST_CASE("slow decay closed forms")
{
    Graphex const g = family(Family::slow_decay);
    for (double nu : {1.0, 12.0, 100.0})
    {
        CAPTURE(nu);
        CHECK(expected_vertices(g, nu).value
              == doctest::Approx(slow_vertices(nu)).epsilon(1e-6));
        for (int k : {1, 2, 5})
            CHECK(expected_degree_k(g, nu, k).value
                  == doctest::Approx(slow_degree(nu, k)).epsilon(1e-6));
    }
    CHECK(slow_vertices(12) == doctest::Approx(12 * (std::sqrt(M_PI) * 2 * std::erf(2.0)
                                                     + std::exp(-4.0) - 1)));
    double const large = expected_vertices(g, 1e4).value / std::pow(1e4, 1.5);
    CHECK(large >= 0.97 * std::sqrt(M_PI / 3));
    CHECK(large <= 1.03 * std::sqrt(M_PI / 3));
}

TEST_CASE("fast decay closed forms")
{
    Graphex const g = family(Family::fast_decay);
    for (double nu : {1.0, 5.0, 100.0})
    {
        CAPTURE(nu);
        CHECK(expected_vertices(g, nu).value
              == doctest::Approx(fast_vertices(nu)).epsilon(1e-6));
        for (int k : {1, 2, 5})
            CHECK(expected_degree_k(g, nu, k).value
                  == doctest::Approx(fast_degree(nu, k)).epsilon(1e-6));
    }
}

TEST_CASE("expected edge examples")
{
    // The built-in slow-decay kernel is scaled so that mu(0) = 1/3
    Graphex const slow = family(Family::slow_decay);
    TheoryResult const e = expected_edges(slow, 10);
    CHECK(e.components.at("W") == doctest::Approx(0.5 * 100 / 3).epsilon(1e-8));
    CHECK(e.value == doctest::Approx(50.0 / 3).epsilon(1e-8));

    // The unscaled product kernel has unit mass
    GraphexSpec lit;
    lit.family = Family::separable;
    lit.exprs["f"] = "(x+1)^(-2)";
    Graphex const literal = build(lit);
    CHECK(literal.kernel_norm() == doctest::Approx(1).epsilon(1e-8));
    CHECK(expected_edges(literal, 10).components.at("W") == doctest::Approx(50).epsilon(1e-8));

    GraphexSpec k;
    k.family = Family::constant;
    k.p = 0.5;
    k.c = 2;
    k.self_edges = true;
    Graphex const c = build(k);
    TheoryResult const ec = expected_edges(c, 3);
    CHECK(ec.value == doctest::Approx(12).epsilon(1e-12));
    CHECK(ec.components.at("W") == doctest::Approx(9));
    CHECK(ec.components.at("diagonal") == doctest::Approx(3));
    CHECK(expected_edges(c, 0).value == 0);

    GraphexSpec ind;
    ind.family = Family::custom;
    ind.exprs["W"] = "le(x*y,1)";
    CHECK_THROWS_AS(expected_edges(build(ind), 5), InfiniteExpectation);
}

TEST_CASE("star and isolated components")
{
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0;
    s.isolated_rate = 0.2;
    s.exprs["S"] = "exp(-x)";
    Graphex const g = build(s);
    TheoryResult const e = expected_edges(g, 10);
    CHECK(e.components.at("isolated") == doctest::Approx(20));
    CHECK(e.components.at("star") == doctest::Approx(100).epsilon(1e-8));
    TheoryResult const v = expected_vertices(g, 10);
    CHECK(v.components.at("isolated") == doctest::Approx(40));
    CHECK(v.components.at("star_leaves") == doctest::Approx(100).epsilon(1e-8));
    // Centers: 10 * int (1 - exp(-10 exp(-x))) dx = 10 * Ein(10)
    double ein = 0;
    double term = 1;
    for (int n = 1; n < 80; ++n)
    {
        term *= 10.0 / n;
        ein += (n % 2 ? 1 : -1) * term / n;
    }
    CHECK(v.components.at("star_centers") == doctest::Approx(10 * ein).epsilon(1e-7));
}

TEST_CASE("zero kernel")
{
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0;
    Graphex const g = build(s);
    for (double nu : {0.0, 1.0, 50.0})
    {
        CHECK(expected_edges(g, nu).value == 0);
        CHECK(expected_vertices(g, nu).value == 0);
        CHECK(expected_degree_k(g, nu, 1).value == 0);
    }
    CHECK_THROWS_AS(degree_ccdf(g, 5, 1), DegenerateError);
}

TEST_CASE("degree sums recover vertices and edges")
{
    for (Family f : {Family::slow_decay, Family::fast_decay})
    {
        Graphex const g = family(f);
        for (double nu : {5.0, 20.0})
        {
            CAPTURE(nu);
            double count = 0;
            double weighted = 0;
            // mu <= 1, so Poisson(nu mu) tails beyond K are below 1e-9
            for (int k = 1; k <= 80; ++k)
            {
                double const n = expected_degree_k(g, nu, k).value;
                count += n;
                weighted += k * n;
            }
            CHECK(count == doctest::Approx(expected_vertices(g, nu).value).epsilon(1e-6));
            CHECK(weighted == doctest::Approx(2 * expected_edges(g, nu).value).epsilon(1e-6));
        }
    }
}

TEST_CASE("degree ccdf")
{
    Graphex const g = family(Family::slow_decay);
    for (double nu : {1.0, 30.0, 1e4})
        CHECK(degree_ccdf(g, nu, 0).value == 1.0);
    double const p1 = 1 - degree_ccdf(g, 1e6, 1).value;
    CHECK(p1 == doctest::Approx(0.5).epsilon(3e-3));
    // ccdf is nonincreasing in k
    double prev = 1;
    for (int k = 0; k < 20; ++k)
    {
        double const v = degree_ccdf(g, 50, k).value;
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("edge density asymptotics")
{
    GraphexSpec s;
    s.family = Family::constant;
    s.p = 0.5;
    s.c = 2;
    s.self_edges = true;
    Graphex const g = build(s);
    double const norm = g.kernel_norm();
    double prev = INFINITY;
    for (double nu : {10.0, 100.0, 1000.0, 1e4})
    {
        double const gap = std::fabs(expected_edges(g, nu).value / (0.5 * nu * nu) - norm);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
    CHECK(expected_edges(family(Family::fast_decay), 300).value
          == doctest::Approx(0.5 * 300 * 300).epsilon(1e-8));
}

TEST_CASE("density classification")
{
    GraphexSpec d;
    d.family = Family::graphon_dilation;
    d.grid = Eigen::MatrixXd::Constant(1, 1, 0.5);
    d.c = 4;
    CHECK(classify_density(build(d)) == Density::dense);
    CHECK(classify_density(family(Family::slow_decay)) == Density::sparse);
    GraphexSpec ind;
    ind.family = Family::custom;
    ind.exprs["W"] = "le(x*y,1)";
    CHECK(classify_density(build(ind)) == Density::unknown);
}
