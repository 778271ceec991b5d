#pragma once

#include <cstdint>

namespace keg {

//! Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286060651209;

double log_gamma(double x);
double erf(double x);

//! Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
//! Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
//! log Q(a, x); finite even when Q underflows.
double log_gamma_q(double a, double x);

//! Exponential integral E1(x) = Gamma(0, x), x > 0.
double expint_e1(double x);

/*!
 * Non-regularized upper incomplete gamma Gamma(s, x) for s >= 0, x > 0.
 *
 * Gamma(0, x) is the exponential integral E1(x).
 */
double upper_incomplete_gamma(double s, double x);

//! P(Poisson(lambda) > k), computed as P(k + 1, lambda).
double poisson_tail(double lambda, std::uint64_t k);

//! log P(Poisson(lambda) = k); -inf when the mass is zero.
double poisson_log_pmf(double lambda, std::uint64_t k);

}  // namespace keg
