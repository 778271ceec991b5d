#include "keg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "keg/errors.hpp"
#include "keg/special.hpp"

namespace keg {

double pairwise_sum(double const* values, std::size_t n)
{
    if (n <= 8)
    {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += values[i];
        return s;
    }
    std::size_t const half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

Summary summarize(std::vector<double> const& values)
{
    Summary s;
    s.n = values.size();
    if (s.n == 0)
        return s;
    s.mean = pairwise_sum(values.data(), values.size()) / static_cast<double>(s.n);
    if (s.n > 1)
    {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            double const d = values[i] - s.mean;
            sq[i] = d * d;
        }
        double const var
            = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(s.n - 1);
        s.sd = std::sqrt(var);
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

double kolmogorov_survival(double t)
{
    if (t <= 0)
        return 1;
    if (t < 1.18)
    {
        // Small-t form converges faster here
        double const y = std::exp(-M_PI * M_PI / (8 * t * t));
        double s = 0;
        for (int k = 1; k <= 7; k += 2)
            s += std::pow(y, k * k);
        return std::clamp(1 - std::sqrt(2 * M_PI) / t * s, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k)
    {
        double const term = std::exp(-2.0 * k * k * t * t);
        s += (k % 2 == 1 ? 2 : -2) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ConfigError("KS test needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double const x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na
                                  - static_cast<double>(j) / nb));
    }
    double const m = std::sqrt(na * nb / (na + nb));
    TestResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((m + 0.12 + 0.11 / m) * d);
    return r;
}

TestResult chi_square_gof(std::vector<double> const& observed,
                          std::vector<double> const& probabilities,
                          int estimated_parameters)
{
    if (observed.size() != probabilities.size() || observed.size() < 2)
        throw ConfigError("chi-square test needs matching bins (at least two)");
    double const total = pairwise_sum(observed.data(), observed.size());
    TestResult r;
    for (std::size_t k = 0; k < observed.size(); ++k)
    {
        double const e = total * probabilities[k];
        if (!(e > 0))
            throw ConfigError("chi-square bin with zero expectation");
        double const d = observed[k] - e;
        r.statistic += d * d / e;
    }
    r.df = static_cast<double>(observed.size()) - 1 - estimated_parameters;
    if (r.df < 1)
        throw ConfigError("chi-square test has no degrees of freedom");
    r.p_value = gamma_q(0.5 * r.df, 0.5 * r.statistic);
    return r;
}

TestResult chi_square_poisson(std::vector<std::uint64_t> const& observations,
                              double mean,
                              double min_expected)
{
    if (observations.empty())
        throw ConfigError("chi-square test needs observations");
    double const n = static_cast<double>(observations.size());
    std::uint64_t top = *std::max_element(observations.begin(), observations.end());
    // Raw bins 0..top, the last one open-ended
    std::vector<double> count(top + 1, 0.0);
    for (auto x : observations)
        ++count[x];
    std::vector<double> prob(top + 1, 0.0);
    for (std::uint64_t k = 0; k < top; ++k)
    {
        prob[k] = mean > 0 ? std::exp(poisson_log_pmf(mean, k)) : (k == 0 ? 1.0 : 0.0);
    }
    prob[top] = top == 0 ? 1.0 : poisson_tail(mean, top - 1);

    // Pool from the left, then merge an undersized remainder backwards
    std::vector<double> pooled_obs;
    std::vector<double> pooled_prob;
    double acc_o = 0;
    double acc_p = 0;
    for (std::size_t k = 0; k < count.size(); ++k)
    {
        acc_o += count[k];
        acc_p += prob[k];
        if (acc_p * n >= min_expected)
        {
            pooled_obs.push_back(acc_o);
            pooled_prob.push_back(acc_p);
            acc_o = 0;
            acc_p = 0;
        }
    }
    if (acc_p > 0 || acc_o > 0)
    {
        if (pooled_obs.empty())
        {
            pooled_obs.push_back(acc_o);
            pooled_prob.push_back(acc_p);
        }
        else
        {
            pooled_obs.back() += acc_o;
            pooled_prob.back() += acc_p;
        }
    }
    if (pooled_obs.size() < 2)
    {
        // Everything in one bin: no evidence against the law
        TestResult r;
        r.p_value = 1;
        return r;
    }
    return chi_square_gof(pooled_obs, pooled_prob);
}

}  // namespace keg
