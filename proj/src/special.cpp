#include "keg/special.hpp"

#include <cmath>
#include <limits>
#include <math.h>

#include "keg/errors.hpp"

namespace keg {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 200000;

// Series for P(a, x); valid for x < a + 1. Returns log of the prefactor
// separately so callers can stay in log space.
double gamma_series(double a, double x, double& log_prefactor)
{
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n)
    {
        ap += 1;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps)
        {
            break;
        }
    }
    log_prefactor = -x + a * std::log(x) - log_gamma(a);
    return sum;
}

// Continued fraction for Q(a, x) (modified Lentz); valid for x >= a + 1.
double gamma_continued_fraction(double a, double x, double& log_prefactor)
{
    double b = x + 1 - a;
    double c = 1 / kTiny;
    double d = 1 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i)
    {
        double const an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1 / d;
        double const del = d * c;
        h *= del;
        if (std::fabs(del - 1) < kEps)
        {
            break;
        }
    }
    log_prefactor = -x + a * std::log(x) - log_gamma(a);
    return h;
}

void check_gamma_args(double a, double x)
{
    if (!(a > 0) || !(x >= 0) || std::isnan(a) || std::isnan(x))
    {
        throw ConfigError("incomplete gamma requires a > 0 and x >= 0");
    }
}

}  // namespace

double log_gamma(double x)
{
    if (std::isnan(x) || (x <= 0 && x == std::floor(x)))
    {
        throw ConfigError("log_gamma: argument is a pole or NaN");
    }
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double erf(double x)
{
    return std::erf(x);
}

double gamma_p(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0)
        return 0;
    if (std::isinf(x))
        return 1;
    double log_pre = 0;
    if (x < a + 1)
    {
        double const s = gamma_series(a, x, log_pre);
        return std::exp(log_pre + std::log(s));
    }
    double const h = gamma_continued_fraction(a, x, log_pre);
    return 1 - std::exp(log_pre + std::log(h));
}

double gamma_q(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0)
        return 1;
    if (std::isinf(x))
        return 0;
    double log_pre = 0;
    if (x < a + 1)
    {
        double const s = gamma_series(a, x, log_pre);
        return 1 - std::exp(log_pre + std::log(s));
    }
    double const h = gamma_continued_fraction(a, x, log_pre);
    return std::exp(log_pre + std::log(h));
}

double log_gamma_q(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0)
        return 0;
    if (std::isinf(x))
        return -std::numeric_limits<double>::infinity();
    double log_pre = 0;
    if (x < a + 1)
    {
        double const s = gamma_series(a, x, log_pre);
        return std::log1p(-std::exp(log_pre + std::log(s)));
    }
    double const h = gamma_continued_fraction(a, x, log_pre);
    return log_pre + std::log(h);
}

double expint_e1(double x)
{
    if (!(x > 0))
    {
        throw ConfigError("expint_e1 requires x > 0");
    }
    if (std::isinf(x))
        return 0;
    if (x > 1)
    {
        double b = x + 1;
        double c = 1 / kTiny;
        double d = 1 / b;
        double h = d;
        for (int i = 1; i < kMaxIter; ++i)
        {
            double const an = -static_cast<double>(i) * i;
            b += 2;
            d = 1 / (an * d + b);
            c = b + an / c;
            double const del = c * d;
            h *= del;
            if (std::fabs(del - 1) < kEps)
            {
                break;
            }
        }
        return h * std::exp(-x);
    }
    double ans = -std::log(x) - kEulerGamma;
    double fact = 1;
    for (int i = 1; i < kMaxIter; ++i)
    {
        fact *= -x / i;
        double const del = -fact / i;
        ans += del;
        if (std::fabs(del) < std::fabs(ans) * kEps)
        {
            break;
        }
    }
    return ans;
}

double upper_incomplete_gamma(double s, double x)
{
    if (!(s >= 0) || !(x > 0))
    {
        throw ConfigError("upper_incomplete_gamma requires s >= 0 and x > 0");
    }
    if (s == 0)
    {
        return expint_e1(x);
    }
    return std::exp(log_gamma(s) + log_gamma_q(s, x));
}

double poisson_tail(double lambda, std::uint64_t k)
{
    if (!(lambda >= 0))
    {
        throw ConfigError("poisson_tail requires lambda >= 0");
    }
    if (lambda == 0)
        return 0;
    return gamma_p(static_cast<double>(k) + 1, lambda);
}

double poisson_log_pmf(double lambda, std::uint64_t k)
{
    if (lambda == 0)
    {
        return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    double const kd = static_cast<double>(k);
    return kd * std::log(lambda) - lambda - log_gamma(kd + 1);
}

}  // namespace keg
