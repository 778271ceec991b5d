#pragma once

#include <cstdint>
#include <vector>

namespace keg {

//! Sample moments, accumulated by pairwise summation.
struct Summary
{
    std::uint64_t n = 0;
    double mean = 0;
    double sd = 0;  //!< with n - 1 in the denominator
    double se = 0;  //!< sd / sqrt(n)
};

Summary summarize(std::vector<double> const& values);

//! Sum of values in a fixed pairwise order.
double pairwise_sum(double const* values, std::size_t n);

struct TestResult
{
    double statistic = 0;
    double p_value = 1;
    double df = 0;
};

/*!
 * Two-sample Kolmogorov-Smirnov test.
 *
 * The p-value uses the asymptotic Kolmogorov distribution with the
 * small-sample correction (sqrt(m) + 0.12 + 0.11 / sqrt(m)) D, where m is
 * the effective sample size.
 */
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

//! P(K > t) for the Kolmogorov distribution.
double kolmogorov_survival(double t);

/*!
 * Chi-square goodness of fit of integer observations to a Poisson law.
 *
 * Bins are the values 0, 1, ... with adjacent bins pooled until each
 * expected count is at least \c min_expected; the last bin collects the
 * upper tail.
 */
TestResult chi_square_poisson(std::vector<std::uint64_t> const& observations,
                              double mean,
                              double min_expected = 5);

//! Pearson statistic and p-value for observed counts against probabilities.
TestResult chi_square_gof(std::vector<double> const& observed,
                          std::vector<double> const& probabilities,
                          int estimated_parameters = 0);

}  // namespace keg
