#include <cmath>
#include <vector>

#include "doctest.h"
#include "keg/graphex.hpp"
#include "keg/quadrature.hpp"
#include "keg/rng.hpp"

using namespace keg;

namespace {

GraphexSpec family_spec(Family f)
{
    GraphexSpec s;
    s.family = f;
    return s;
}

GraphexSpec custom(std::string const& w)
{
    GraphexSpec s;
    s.family = Family::custom;
    s.exprs["W"] = w;
    return s;
}

double direct_marginal(Graphex const& g, double x)
{
    // Split at x so the diagonal is an endpoint, never an interior node
    QuadratureOptions opts;
    opts.rel_tol = 1e-11;
    auto const left = integrate([&](double y) { return g.kernel(x, y); }, 0, x, opts);
    auto const right = integrate_from([&](double y) { return g.kernel(x, y); }, x, 1e-10);
    return left.value + right.value;
}

std::vector<Graphex> zoo()
{
    std::vector<Graphex> out;
    out.push_back(build(family_spec(Family::slow_decay)));
    out.push_back(build(family_spec(Family::fast_decay)));
    GraphexSpec cf = family_spec(Family::caron_fox);
    cf.exprs["g"] = "exp(-x)";
    out.push_back(build(cf));
    GraphexSpec sep = family_spec(Family::separable);
    sep.exprs["f"] = "1/(1+x)^2";
    out.push_back(build(sep));
    GraphexSpec k = family_spec(Family::constant);
    k.p = 0.3;
    k.c = 2;
    out.push_back(build(k));
    Eigen::MatrixXd grid(2, 2);
    grid << 0.2, 0.9, 0.9, 0.5;
    out.push_back(dilate(grid, 3));
    out.push_back(build(custom("exp(-x-y)/(1+x*y)")));
    return out;
}

}  // namespace

TEST_CASE("slow decay kernel and marginal")
{
    Graphex const g = build(family_spec(Family::slow_decay));
    CHECK(g.kernel(1, 1) == 0);
    CHECK(g.kernel(0, 1) == doctest::Approx(0.25 / 3).epsilon(1e-15));
    CHECK(g.kernel(0, 1) * 3 == doctest::Approx(std::pow(1.0, -2) * std::pow(2.0, -2)));
    CHECK(marginal(g, 0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    for (double x : {0.5, 2.0, 7.0})
        CHECK(marginal(g, x) == doctest::Approx(1 / (3 * (x + 1) * (x + 1))).epsilon(1e-14));
}

TEST_CASE("zero and fast decay examples")
{
    GraphexSpec zero = family_spec(Family::constant);
    zero.p = 0;
    Graphex const z = build(zero);
    CHECK(z.kernel(0.3, 0.4) == 0);
    CHECK(marginal(z, 0.3) == 0);

    Graphex const f = build(family_spec(Family::fast_decay));
    CHECK(marginal(f, 0) == doctest::Approx(1).epsilon(1e-14));
    for (double x : {0.0, 1.0, 2.0})
    {
        CAPTURE(x);
        CHECK(std::fabs(direct_marginal(f, x) - std::exp(-x)) < 1e-8);
    }

    GraphexSpec k = family_spec(Family::constant);
    k.p = 0.7;
    k.c = 2;
    Graphex const c = build(k);
    CHECK(marginal(c, 2.5) == 0);
    CHECK(marginal(c, 1.0) == doctest::Approx(1.4));
    CHECK_THROWS_AS(marginal(c, -1), ConfigError);
}

TEST_CASE("kernels are symmetric and within [0, 1]")
{
    CounterRng rng(7, 0);
    for (Graphex const& g : zoo())
    {
        for (int i = 0; i < 10000; ++i)
        {
            double const x = -std::log(rng.uniform_open()) * 3;
            double const y = -std::log(rng.uniform_open()) * 3;
            double const w = g.kernel(x, y);
            CHECK_UNARY(w == g.kernel(y, x));
            CHECK_UNARY(w >= 0);
            CHECK_UNARY(w <= 1);
        }
    }
}

TEST_CASE("marginal agrees with direct quadrature")
{
    CounterRng rng(8, 0);
    for (Graphex const& g : zoo())
    {
        for (int i = 0; i < 50; ++i)
        {
            double const x = 6 * rng.uniform();
            CAPTURE(x);
            double const reference = direct_marginal(g, x);
            CHECK(std::fabs(marginal(g, x) - reference) <= 1e-6 * std::max(1.0, reference));
        }
    }
}

TEST_CASE("custom kernel with hidden jumps")
{
    // W = exp(-x-y) 1[|x-y| <= 1]; the jumps at y = x +- 1 are not declared
    Graphex const g = build(custom("exp(-x-y)*le(abs(x-y), 1)"));
    CounterRng rng(9, 0);
    for (int i = 0; i < 50; ++i)
    {
        double const x = 6 * rng.uniform();
        CAPTURE(x);
        double const exact = std::exp(-x) * (std::exp(-std::max(0.0, x - 1)) - std::exp(-x - 1));
        CHECK(std::fabs(marginal(g, x) - exact) <= 1e-6 * exact);
    }
}

TEST_CASE("caron-fox matches its series")
{
    GraphexSpec cf = family_spec(Family::caron_fox);
    cf.exprs["g"] = "exp(-x)";
    Graphex const g = build(cf);
    CHECK(g.kernel(0, 0.5) == doctest::Approx(1 - std::exp(-2 * std::exp(-0.5))));
    for (double x : {0.0, 0.4, 1.0, 3.0})
    {
        // mu(x) = sum_n (-1)^(n+1) (2a)^n / (n n!), a = exp(-x)
        double const a2 = 2 * std::exp(-x);
        double series = 0;
        double term = 1;
        for (int n = 1; n < 60; ++n)
        {
            term *= a2 / n;
            series += (n % 2 ? 1 : -1) * term / n;
        }
        CHECK(marginal(g, x) == doctest::Approx(series).epsilon(1e-8));
    }
}

TEST_CASE("graphon dilation")
{
    Eigen::MatrixXd one(1, 1);
    one << 0.4;
    Graphex const g1 = dilate(one, 1);
    CHECK(g1.kernel(0.2, 0.9) == doctest::Approx(0.4));
    CHECK(g1.kernel(0.2, 1.1) == 0);
    CHECK(g1.kernel_norm() == doctest::Approx(0.4).epsilon(1e-12));

    Eigen::MatrixXd checker(2, 2);
    checker << 0, 1, 1, 0;
    Graphex const cb = dilate(checker, 2);
    CHECK(marginal(cb, 0.5) == doctest::Approx(1).epsilon(1e-12));
    CHECK(direct_marginal(cb, 0.5) == doctest::Approx(1).epsilon(1e-9));

    Eigen::MatrixXd grid(3, 3);
    grid << 0.1, 0.5, 0.3, 0.5, 0.9, 0.0, 0.3, 0.0, 0.6;
    // Nested quadrature, cell by cell so that no rule straddles a step
    auto quadrature_norm = [](Graphex const& g, double c) {
        QuadratureOptions opts;
        opts.rel_tol = 1e-10;
        auto cell = [c](int i) { return c * i / 3; };
        double total = 0;
        for (int i = 0; i < 3; ++i)
        {
            auto const row = [&](double x) {
                double sum = 0;
                for (int j = 0; j < 3; ++j)
                {
                    sum += integrate([&](double y) { return g.kernel(x, y); }, cell(j),
                                     cell(j + 1), opts)
                               .value;
                }
                return sum;
            };
            total += integrate(row, cell(i), cell(i + 1), opts).value;
        }
        return total;
    };
    double const base = quadrature_norm(dilate(grid, 1), 1);
    CHECK(base == doctest::Approx(grid.sum() / 9).epsilon(1e-8));
    for (double c : {0.5, 2.5})
    {
        Graphex const g = dilate(grid, c);
        CHECK(quadrature_norm(g, c) == doctest::Approx(c * c * base).epsilon(1e-8));
        CHECK(g.kernel_norm() == doctest::Approx(c * c * base).epsilon(1e-8));
    }

    Eigen::MatrixXd bad(2, 2);
    bad << 0, 1, 0.5, 0;
    CHECK_THROWS_AS(dilate(bad, 1), ConfigError);
    bad << 0, 1.5, 1.5, 0;
    CHECK_THROWS_AS(dilate(bad, 1), ConfigError);
}

TEST_CASE("local finiteness conditions")
{
    FinitenessReport const slow = check_local_finiteness(build(family_spec(Family::slow_decay)));
    REQUIRE(slow.conditions.size() == 5);
    CHECK(slow.all_hold());
    CHECK(slow.marginal_finite.verdict == Verdict::holds_analytic);

    Graphex const indicator = build(custom("le(x*y,1)"));
    CHECK_THROWS_AS(indicator.kernel_norm(), InfiniteExpectation);
    FinitenessReport const ind = check_local_finiteness(indicator);
    REQUIRE(ind.conditions.size() == 5);
    for (int i : {2, 3})
    {
        CAPTURE(ind.conditions[i].name);
        CHECK((ind.conditions[i].verdict == Verdict::holds_analytic
               || ind.conditions[i].verdict == Verdict::holds_numeric));
    }

    GraphexSpec inf = family_spec(Family::fast_decay);
    inf.isolated_rate = INFINITY;
    FinitenessReport const r = check_local_finiteness(build(inf));
    CHECK(r.conditions[0].verdict == Verdict::violated);
    CHECK_FALSE(r.all_hold());
}

TEST_CASE("spec validation and JSON round trip")
{
    GraphexSpec s = family_spec(Family::separable);
    s.exprs["f"] = "exp(-x)";
    s.exprs["S"] = "exp(-2*x)";
    s.isolated_rate = 0.25;
    s.self_edges = true;
    nlohmann::json const doc = to_json(s);
    GraphexSpec const back = spec_from_json(doc);
    CHECK(to_json(back) == doc);
    CHECK(back.exprs == s.exprs);
    CHECK(back.isolated_rate == 0.25);

    GraphexSpec d = family_spec(Family::graphon_dilation);
    d.grid = Eigen::MatrixXd::Constant(2, 2, 0.5);
    d.c = 3;
    CHECK(to_json(spec_from_json(to_json(d))) == to_json(d));

    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"nope"})")), ConfigError);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"slow-decay","bogus":1})")),
                    ConfigError);
    CHECK_THROWS_AS(build(custom("x*")), ConfigError);
    CHECK_THROWS_AS(build(custom("x + 2")), ConfigError);       // exceeds 1
    CHECK_THROWS_AS(build(custom("le(x, 1) * y")), ConfigError);  // asymmetric
    GraphexSpec negative = family_spec(Family::constant);
    negative.isolated_rate = -1;
    CHECK_THROWS_AS(build(negative), ConfigError);
}
