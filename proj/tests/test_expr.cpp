#include <cmath>
#include <string>

#include "doctest.h"
#include "keg/expr.hpp"
#include "keg/rng.hpp"

using namespace keg;

TEST_CASE("parse and evaluate documented expressions")
{
    Expr const e = parse_expr("exp(-x)");
    REQUIRE(e.nodes().size() == 3);
    CHECK(e.eval(0) == 1);
    CHECK_FALSE(e.uses_y());

    Expr const w = parse_expr("(x+1)^(-2)*(y+1)^(-2)");
    CHECK(w.uses_y());
    CHECK(w.eval(0, 0.0) == 1);

    Expr const le = parse_expr("le(x*y,1)");
    CHECK(le.eval(2, 0.4) == 1);
    CHECK(le.eval(2, 0.6) == 0);

    CHECK(parse_expr("x").eval(3.5) == 3.5);
    CHECK(parse_expr("1 - exp(-2*exp(-x)*exp(-y))").eval(0, 0.0)
          == doctest::Approx(1 - std::exp(-2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(parse_expr("x/0").eval(1), DomainError);
}

TEST_CASE("precedence and associativity")
{
    CHECK(parse_expr("2+3*4").eval(0) == 14);
    CHECK(parse_expr("2^3^2").eval(0) == 512);
    CHECK(parse_expr("-2^2").eval(0) == -4);
    CHECK(parse_expr("2^-1").eval(0) == 0.5);
    CHECK(parse_expr("10-4-3").eval(0) == 3);
    CHECK(parse_expr("64/4/2").eval(0) == 8);
    CHECK(parse_expr("(2+3)*4").eval(0) == 20);
    CHECK(parse_expr("min(x, 3) + max(x, 3)").eval(5) == 8);
    CHECK(parse_expr("abs(-x)").eval(2) == 2);
    CHECK(parse_expr("sqrt(x)").eval(16) == 4);
    CHECK(parse_expr("1.5e2").eval(0) == 150);
}

TEST_CASE("syntax errors carry offsets")
{
    try
    {
        (void)parse_expr("1 + * 2");
        FAIL("expected a parse error");
    }
    catch (ParseError const& e)
    {
        CHECK(e.offset() == 4);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr("z"), ParseError);
    CHECK_THROWS_AS(parse_expr("exp(x"), ParseError);
    CHECK_THROWS_AS(parse_expr("exp(x, y)"), ParseError);
    CHECK_THROWS_AS(parse_expr("min(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("x y"), ParseError);
}

TEST_CASE("domain errors and missing bindings")
{
    CHECK_THROWS_AS(parse_expr("log(x)").eval(0), DomainError);
    CHECK_THROWS_AS(parse_expr("log(x)").eval(-1), DomainError);
    CHECK_THROWS_AS(parse_expr("sqrt(x)").eval(-1), DomainError);
    CHECK_THROWS_AS(parse_expr("0/0").eval(0), DomainError);
    CHECK_THROWS_AS(parse_expr("x^0.5").eval(-2), DomainError);
    CHECK(parse_expr("x^2").eval(-2) == 4);
    CHECK_THROWS_AS(parse_expr("x*y").eval(1), MissingVariable);
}

namespace {

std::string random_expr(CounterRng& rng, int depth)
{
    auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n); };
    if (depth == 0 || pick(4) == 0)
    {
        switch (pick(4))
        {
            case 0: return "x";
            case 1: return "y";
            case 2: return std::to_string(pick(100));
            default: return std::to_string(pick(1000)) + ".25";
        }
    }
    std::string const a = random_expr(rng, depth - 1);
    std::string const b = random_expr(rng, depth - 1);
    switch (pick(12))
    {
        case 0: return a + "+" + b;
        case 1: return a + "-" + b;
        case 2: return a + "*" + b;
        case 3: return a + "/" + b;
        case 4: return a + "^" + b;
        case 5: return "-" + a;
        case 6: return "(" + a + ")";
        case 7: return "exp(" + a + ")";
        case 8: return "le(" + a + "," + b + ")";
        case 9: return "min(" + a + ", " + b + ")";
        case 10: return "max(" + a + "," + b + ")";
        default: return "abs(" + a + ")";
    }
}

}  // namespace

TEST_CASE("print round trip over a generated corpus")
{
    CounterRng rng(2024, 0);
    for (int i = 0; i < 1000; ++i)
    {
        std::string const text = random_expr(rng, 5);
        CAPTURE(text);
        Expr const e = parse_expr(text);
        Expr const again = parse_expr(e.print());
        CHECK(again == e);
        CHECK(again.print() == e.print());
    }
}

TEST_CASE("evaluation is pure")
{
    Expr const e = parse_expr("1 - exp(-2*exp(-x)*exp(-y)) + log(1 + x*y)^2");
    for (double x : {0.0, 0.1, 3.0})
    {
        for (double y : {0.0, 0.7, 12.0})
        {
            double const first = e.eval(x, y);
            for (int i = 0; i < 5; ++i)
                CHECK(e.eval(x, y) == first);
        }
    }
}
