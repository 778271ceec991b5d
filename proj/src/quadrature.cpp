#include "keg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "keg/errors.hpp"

namespace keg {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct Segment
{
    double a;
    double b;
    double value;
    double error;
    bool operator<(Segment const& other) const { return error < other.error; }
};

double sample(Integrand const& f, double x)
{
    double const y = f(x);
    if (!std::isfinite(y))
    {
        throw QuadratureError("non-finite integrand sample at x = "
                                  + std::to_string(x),
                              y,
                              0);
    }
    return y;
}

// Probe halfway between an endpoint and the outermost Kronrod node
constexpr double kGapProbe = 0.5 * (1 + 0.991455371120812639206854697526329);

Segment gauss_kronrod(Integrand const& f, double a, double b)
{
    double const center = 0.5 * (a + b);
    double const half = 0.5 * (b - a);
    double const fc = sample(f, center);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double lo[7];
    double hi[7];
    for (int j = 0; j < 7; ++j)
    {
        double const dx = half * kXgk[j];
        lo[j] = sample(f, center - dx);
        hi[j] = sample(f, center + dx);
    }
    for (int j = 0; j < 3; ++j)
    {
        int const jtw = 2 * j + 1;
        double const sum = lo[jtw] + hi[jtw];
        resg += kWg[j] * sum;
        resk += kWgk[jtw] * sum;
    }
    for (int j = 0; j < 4; ++j)
    {
        int const jtwm1 = 2 * j;
        resk += kWgk[jtwm1] * (lo[jtwm1] + hi[jtwm1]);
    }
    double error = std::fabs((resk - resg) * half);

    // The rule never looks at the strips next to the endpoints, so a jump
    // there goes unnoticed. A probe that disagrees with the outermost node
    // by more than the next node spacing suggests one.
    double const gap = half * (1 - kXgk[0]);
    double const pa = sample(f, center - half * kGapProbe);
    double const pb = sample(f, center + half * kGapProbe);
    double const da = std::fabs(pa - lo[0]);
    double const db = std::fabs(pb - hi[0]);
    if (da > std::fabs(lo[0] - lo[1]))
        error += da * gap;
    if (db > std::fabs(hi[0] - hi[1]))
        error += db * gap;
    return {a, b, resk * half, error};
}

}  // namespace

IntegralResult
integrate(Integrand const& f, double a, double b, QuadratureOptions const& opts)
{
    IntegralResult result;
    if (a == b)
    {
        result.converged = true;
        return result;
    }
    std::priority_queue<Segment> heap;
    Segment const first = gauss_kronrod(f, a, b);
    result.evaluations = 17;
    heap.push(first);
    double total = first.value;
    double error = first.error;
    // Segments too narrow to bisect further; their error is kept in the sum.
    std::vector<Segment> frozen;

    auto target = [&] {
        return std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
    };
    while (!heap.empty() && error > target()
           && result.evaluations + 34 <= opts.max_evaluations)
    {
        Segment const worst = heap.top();
        heap.pop();
        double const mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a)
                   < 1e-14 * std::max(1.0, std::fabs(mid)))
        {
            frozen.push_back(worst);
            continue;
        }
        Segment const left = gauss_kronrod(f, worst.a, mid);
        Segment const right = gauss_kronrod(f, mid, worst.b);
        result.evaluations += 34;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to avoid drift from incremental updates
    total = 0;
    error = 0;
    for (auto const& seg : frozen)
    {
        total += seg.value;
        error += seg.error;
    }
    while (!heap.empty())
    {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    result.value = total;
    result.error_estimate = error;
    result.converged = error <= target();
    return result;
}

IntegralResult integrate_semiinf(Integrand const& f,
                                 double rel_tol,
                                 TailBound const& tail_hint,
                                 QuadratureOptions opts)
{
    if (!(rel_tol > 0 && rel_tol <= 1e-2))
    {
        throw ConfigError("integrate_semiinf: rel_tol must lie in (0, 1e-2]");
    }
    opts.rel_tol = rel_tol;

    IntegralResult shells;
    QuadratureOptions piece_opts = opts;
    piece_opts.rel_tol = 0.1 * rel_tol;

    auto add_piece = [&](double a, double b) {
        piece_opts.abs_tol = std::max(opts.abs_tol * 0.1,
                                      0.1 * rel_tol * std::fabs(shells.value));
        piece_opts.max_evaluations
            = opts.max_evaluations > shells.evaluations
                  ? opts.max_evaluations - shells.evaluations
                  : 0;
        IntegralResult const r = integrate(f, a, b, piece_opts);
        shells.value += r.value;
        shells.error_estimate += r.error_estimate;
        shells.evaluations += r.evaluations;
        return r.value;
    };

    add_piece(0, 1);
    double upper = 1;
    std::vector<double> recent;
    constexpr int kMaxShells = 90;
    for (int k = 0; k < kMaxShells && shells.evaluations < opts.max_evaluations;
         ++k)
    {
        double const s = add_piece(upper, 2 * upper);
        upper *= 2;
        recent.push_back(s);
        double const target
            = std::max(opts.abs_tol, 0.5 * rel_tol * std::fabs(shells.value));
        if (tail_hint)
        {
            double const bound = tail_hint(upper);
            if (std::isfinite(bound) && bound <= target
                && shells.error_estimate
                       <= std::max(opts.abs_tol,
                                   rel_tol * std::fabs(shells.value)))
            {
                shells.converged = true;
                return shells;
            }
            continue;
        }
        std::size_t const n = recent.size();
        if (n >= 3 && recent[n - 1] == 0 && recent[n - 2] == 0
            && recent[n - 3] == 0)
        {
            shells.converged = shells.error_estimate
                               <= std::max(opts.abs_tol,
                                           rel_tol * std::fabs(shells.value));
            if (shells.converged)
                return shells;
            continue;
        }
        if (n >= 3 && recent[n - 2] != 0 && recent[n - 3] != 0)
        {
            double const r = recent[n - 1] / recent[n - 2];
            double const r_prev = recent[n - 2] / recent[n - 3];
            if (r >= 0 && r < 0.95 && r_prev >= 0 && r_prev < 0.95)
            {
                double const tail = recent[n - 1] * r / (1 - r);
                if (std::fabs(tail) <= target)
                {
                    shells.value += tail;
                    shells.error_estimate += std::fabs(tail);
                    shells.converged
                        = shells.error_estimate
                          <= std::max(opts.abs_tol,
                                      rel_tol * std::fabs(shells.value));
                    if (shells.converged)
                        return shells;
                }
            }
        }
    }

    // Fallback: compactify the half-line
    Integrand const transformed = [&f](double t) {
        double const one_minus = 1 - t;
        return f(t / one_minus) / (one_minus * one_minus);
    };
    IntegralResult mapped;
    try
    {
        mapped = integrate(transformed, 0, 1, opts);
    }
    catch (QuadratureError const&)
    {
        mapped.converged = false;
        mapped.error_estimate = INFINITY;
    }
    mapped.evaluations += shells.evaluations;
    if (mapped.converged)
    {
        return mapped;
    }
    shells.converged = false;
    if (mapped.error_estimate < shells.error_estimate)
    {
        mapped.converged = false;
        return mapped;
    }
    return shells;
}

IntegralResult integrate_from(Integrand const& f,
                              double a,
                              double rel_tol,
                              TailBound const& tail_hint,
                              QuadratureOptions opts)
{
    Integrand const shifted = [&f, a](double t) { return f(a + t); };
    TailBound shifted_hint;
    if (tail_hint)
    {
        shifted_hint = [&tail_hint, a](double t) { return tail_hint(a + t); };
    }
    return integrate_semiinf(shifted, rel_tol, shifted_hint, opts);
}

}  // namespace keg
