#pragma once

#include <cstddef>
#include <functional>

namespace keg {

struct IntegralResult
{
    double value = 0;
    double error_estimate = 0;
    bool converged = false;
    std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;
//! Upper bound on the integral of |f| over [a, infinity).
using TailBound = std::function<double(double)>;

struct QuadratureOptions
{
    double rel_tol = 1e-8;
    double abs_tol = 0;
    std::size_t max_evaluations = 2'000'000;
};

/*!
 * Adaptive 15-point Gauss-Kronrod integration on [a, b].
 *
 * Each segment also samples the two strips between its endpoints and the
 * outermost nodes, so that a jump hidden there still raises the error.
 *
 * The interval with the largest error estimate is bisected until the summed
 * estimate falls below max(abs_tol, rel_tol * |value|) or the evaluation
 * budget is spent. Throws QuadratureError on a non-finite integrand sample.
 */
IntegralResult
integrate(Integrand const& f, double a, double b, QuadratureOptions const& opts = {});

/*!
 * Integral of f over [0, infinity).
 *
 * Integrates [0, 1] and then shells [A, 2A] with A doubling. The remaining
 * tail is bounded by \c tail_hint when supplied, otherwise it is
 * extrapolated geometrically from successive shells. If the shells do not
 * settle within budget, the substitution x = t / (1 - t) is tried on [0, 1).
 * Non-convergence is reported through \c converged, never thrown.
 */
IntegralResult integrate_semiinf(Integrand const& f,
                                 double rel_tol = 1e-8,
                                 TailBound const& tail_hint = {},
                                 QuadratureOptions opts = {});

//! Integral of f over [a, infinity); hint is called with absolute positions.
IntegralResult integrate_from(Integrand const& f,
                              double a,
                              double rel_tol = 1e-8,
                              TailBound const& tail_hint = {},
                              QuadratureOptions opts = {});

}  // namespace keg
