#include "numeric_tail.hpp"

#include <algorithm>
#include <cmath>

#include "keg/quadrature.hpp"

namespace keg::detail {

namespace {
constexpr double kBinTol = 1e-11;
}

NumericTail::NumericTail(Fn1 h, std::optional<double> support)
    : h_(std::move(h)), support_(support)
{
    if (support_)
    {
        int const bins = 64;
        for (int k = 0; k <= bins; ++k)
        {
            edges_.push_back(*support_ * k / bins);
        }
    }
    else
    {
        IntegralResult const whole = integrate_semiinf(h_, 1e-10);
        if (!whole.converged)
        {
            throw InfiniteExpectation("envelope function is not integrable");
        }
        for (int k = 0; k <= 32; ++k)
        {
            edges_.push_back(0.125 * k);
        }
        // Geometric bins until the remaining mass is negligible
        double remaining = whole.value;
        double x = edges_.back();
        double acc = 0;
        for (int k = 0; k < 32; ++k)
        {
            acc += partial(0.125 * k, 0.125 * (k + 1));
        }
        remaining = whole.value - acc;
        while (remaining > 1e-14 * whole.value && x < 1e15)
        {
            double const next = x * 1.25;
            remaining -= partial(x, next);
            x = next;
            edges_.push_back(x);
        }
    }
    cumulative_.assign(edges_.size(), 0.0);
    for (std::size_t k = 1; k < edges_.size(); ++k)
    {
        cumulative_[k] = cumulative_[k - 1] + partial(edges_[k - 1], edges_[k]);
    }
    total_ = cumulative_.back();
    if (!support_)
    {
        IntegralResult const beyond = integrate_from(h_, edges_.back(), 1e-6);
        total_ += beyond.value;
    }
}

double NumericTail::partial(double a, double b) const
{
    if (b <= a)
        return 0;
    QuadratureOptions opts;
    opts.rel_tol = kBinTol;
    opts.abs_tol = 1e-300;
    return integrate(h_, a, b, opts).value;
}

double NumericTail::tail(double x) const
{
    if (x <= 0)
        return total_;
    if (x >= edges_.back())
    {
        if (support_)
            return 0;
        return integrate_from(h_, x, 1e-8).value;
    }
    auto const it = std::upper_bound(edges_.begin(), edges_.end(), x);
    std::size_t const k = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return std::max(0.0, total_ - cumulative_[k] - partial(edges_[k], x));
}

double NumericTail::inverse(double u) const
{
    double const target = total_ - u;
    if (target <= 0)
        return 0;
    if (target >= cumulative_.back())
    {
        if (support_)
            return edges_.back();
        // Beyond the table: expand then bisect on the tail itself
        double lo = edges_.back();
        double hi = 2 * lo;
        while (tail(hi) > u && hi < 1e300)
            hi *= 2;
        for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i)
        {
            double const mid = 0.5 * (lo + hi);
            (tail(mid) > u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    auto const it
        = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t const k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    double const need = target - cumulative_[k];
    double lo = edges_[k];
    double hi = edges_[k + 1];
    double x = lo + (hi - lo) * need / std::max(1e-300, cumulative_[k + 1] - cumulative_[k]);
    for (int iter = 0; iter < 100; ++iter)
    {
        double const f = partial(edges_[k], x) - need;
        if (std::fabs(f) <= 1e-13 * std::max(need, 1e-300) || hi - lo <= 1e-14 * hi)
            break;
        (f > 0 ? hi : lo) = x;
        double const slope = h_(x);
        double next = slope > 0 ? x - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

}  // namespace keg::detail
