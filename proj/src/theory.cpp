#include "keg/theory.hpp"

#include <algorithm>
#include <cmath>

#include "keg/quadrature.hpp"
#include "keg/special.hpp"

namespace keg {

namespace {

void check_nu(double nu)
{
    if (!(nu >= 0 && std::isfinite(nu)))
        throw ConfigError("nu must be nonnegative and finite");
}

//! exp(-lambda) lambda^k / k!, evaluated in log space.
double poisson_pmf(double lambda, int k)
{
    if (k < 0)
        return 0;
    if (lambda <= 0)
        return k == 0 ? 1.0 : 0.0;
    return std::exp(poisson_log_pmf(lambda, static_cast<std::uint64_t>(k)));
}

//! Everything a latent point at x contributes to the integrands.
struct PointProfile
{
    double mu;
    double star;
    double diag;
};

class Profile
{
  public:
    Profile(Graphex const& g, double rel_tol) : g_(g), rel_tol_(rel_tol) {}

    PointProfile at(double x) const
    {
        return {marginal(g_, x, 0.1 * rel_tol_), g_.star(x), g_.diagonal(x)};
    }

    /*!
     * Integral over the latent axis of f. The tail bound is
     * a * int_x mu + b * int_x S + c * int_x W(t,t), used when every
     * needed tail has a closed form.
     */
    IntegralResult integrate(Integrand const& f, double a, double b, double c) const
    {
        GraphexMeta const& m = g_.meta();
        auto const support = m.support_bound;
        if (support)
        {
            double const end = *support;
            std::vector<double> cuts{0.0};
            for (double p : m.breakpoints)
            {
                if (p > 0 && p < end)
                    cuts.push_back(p);
            }
            cuts.push_back(end);
            std::sort(cuts.begin(), cuts.end());
            IntegralResult total;
            total.converged = true;
            QuadratureOptions opts;
            opts.rel_tol = rel_tol_;
            opts.abs_tol = 1e-300;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            {
                accumulate(total, keg::integrate(f, cuts[i], cuts[i + 1], opts));
            }
            if (!g_.star_is_zero())
            {
                accumulate(total, integrate_from(f, end, rel_tol_, hint(0, b, 0)));
            }
            return total;
        }
        return integrate_semiinf(f, rel_tol_, hint(a, b, c));
    }

  private:
    static void accumulate(IntegralResult& total, IntegralResult const& r)
    {
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }

    TailBound hint(double a, double b, double c) const
    {
        GraphexMeta const& m = g_.meta();
        bool const need_mu = a > 0;
        bool const need_star = b > 0 && !g_.star_is_zero();
        bool const need_diag = c > 0 && g_.self_edges();
        if ((need_mu && !m.marginal_tail) || (need_star && !m.star_tail)
            || (need_diag && !m.diagonal_tail))
        {
            return {};
        }
        Graphex const g = g_;
        return [g, a, b, c, need_mu, need_star, need_diag](double x) {
            GraphexMeta const& meta = g.meta();
            double t = 0;
            if (need_mu)
                t += a * meta.marginal_tail(x);
            if (need_star)
                t += b * meta.star_tail(x);
            if (need_diag)
                t += c * meta.diagonal_tail(x);
            return t;
        };
    }

    Graphex g_;
    double rel_tol_;
};

void require_converged(IntegralResult const& r, char const* what)
{
    if (!r.converged)
    {
        throw QuadratureError(std::string(what) + ": quadrature did not converge",
                              r.value,
                              r.error_estimate);
    }
}

double finite_isolated(Graphex const& g)
{
    double const i = g.isolated_rate();
    if (!std::isfinite(i))
        throw InfiniteExpectation("isolated-edge rate I is infinite");
    return i;
}

}  // namespace

nlohmann::json to_json(TheoryResult const& r)
{
    nlohmann::json query{{"stat", r.stat}, {"nu", r.nu}};
    if (r.k)
        query["k"] = *r.k;
    return {{"query", query},
            {"value", r.value},
            {"components", r.components},
            {"error_estimate", r.error_estimate}};
}

TheoryResult expected_edges(Graphex const& g, double nu, double rel_tol)
{
    check_nu(nu);
    TheoryResult r;
    r.stat = "edges";
    r.nu = nu;
    double const nu2 = nu * nu;
    double const i = finite_isolated(g);
    double const norm = g.kernel_norm(rel_tol);
    double const diag = g.diagonal_tail(0, rel_tol);
    double const star = g.star_tail(0, rel_tol);
    r.components["W"] = 0.5 * nu2 * norm;
    r.components["diagonal"] = nu * diag;
    r.components["star"] = nu2 * star;
    r.components["isolated"] = nu2 * i;
    for (auto const& [name, v] : r.components)
        r.value += v;
    if (!g.meta().analytic)
        r.error_estimate = rel_tol * r.value;
    return r;
}

TheoryResult expected_vertices(Graphex const& g, double nu, double rel_tol)
{
    check_nu(nu);
    TheoryResult r;
    r.stat = "vertices";
    r.nu = nu;
    double const i = finite_isolated(g);
    r.components["isolated"] = 2 * nu * nu * i;
    r.components["star_leaves"] = nu * nu * g.star_tail(0, rel_tol);
    if (nu == 0)
    {
        r.components["W"] = 0;
        r.components["star_centers"] = 0;
        return r;
    }
    Profile const profile(g, rel_tol);
    IntegralResult const w = profile.integrate(
        [&](double x) {
            PointProfile const p = profile.at(x);
            double const e = std::exp(-nu * p.mu);
            return nu * (-std::expm1(-nu * p.mu) + e * p.diag);
        },
        nu * nu,
        0,
        nu);
    require_converged(w, "expected vertices");
    r.components["W"] = w.value;
    r.error_estimate = w.error_estimate;
    double centers = 0;
    if (!g.star_is_zero())
    {
        IntegralResult const s = profile.integrate(
            [&](double x) {
                PointProfile const p = profile.at(x);
                return nu * (1 - p.diag) * std::exp(-nu * p.mu)
                       * -std::expm1(-nu * p.star);
            },
            0,
            nu * nu,
            0);
        require_converged(s, "expected star centers");
        centers = s.value;
        r.error_estimate += s.error_estimate;
    }
    r.components["star_centers"] = centers;
    for (auto const& [name, v] : r.components)
        r.value += v;
    return r;
}

TheoryResult expected_degree_k(Graphex const& g, double nu, int k, double rel_tol)
{
    check_nu(nu);
    if (k < 1)
        throw ConfigError("expected_degree_k requires k >= 1");
    TheoryResult r;
    r.stat = "degk";
    r.nu = nu;
    r.k = k;
    double const i = finite_isolated(g);
    double const leaves = nu * nu * g.star_tail(0, rel_tol);
    r.components["star_leaves"] = k == 1 ? leaves : 0.0;
    r.components["isolated"] = k == 1 ? 2 * nu * nu * i : 0.0;
    if (nu == 0)
    {
        r.components["latent"] = 0;
        return r;
    }
    Profile const profile(g, rel_tol);
    IntegralResult const d = profile.integrate(
        [&](double x) {
            PointProfile const p = profile.at(x);
            double const lambda = nu * (p.mu + p.star);
            return nu
                   * ((1 - p.diag) * poisson_pmf(lambda, k)
                      + p.diag * poisson_pmf(lambda, k - 2));
        },
        nu * nu,
        nu * nu,
        nu);
    require_converged(d, "expected degree count");
    r.components["latent"] = d.value;
    r.error_estimate = d.error_estimate;
    for (auto const& [name, v] : r.components)
        r.value += v;
    return r;
}

TheoryResult degree_ccdf(Graphex const& g, double nu, int k, double rel_tol)
{
    check_nu(nu);
    if (k < 0)
        throw ConfigError("degree_ccdf requires k >= 0");
    TheoryResult r;
    r.stat = "ccdf";
    r.nu = nu;
    r.k = k;
    Profile const profile(g, rel_tol);
    IntegralResult const den = profile.integrate(
        [&](double x) { return -std::expm1(-nu * profile.at(x).mu); }, nu, 0, 0);
    require_converged(den, "degree ccdf denominator");
    if (!(den.value >= 1e-300))
        throw DegenerateError("degree ccdf: no visible vertices at this nu");
    r.components["denominator"] = den.value;
    if (k == 0)
    {
        r.value = 1;
        r.components["numerator"] = den.value;
        return r;
    }
    IntegralResult const num = profile.integrate(
        [&](double x) { return poisson_tail(nu * profile.at(x).mu, static_cast<std::uint64_t>(k)); }, nu, 0, 0);
    require_converged(num, "degree ccdf numerator");
    r.components["numerator"] = num.value;
    r.value = std::clamp(num.value / den.value, 0.0, 1.0);
    r.error_estimate = num.error_estimate / den.value
                       + r.value * den.error_estimate / den.value;
    return r;
}

std::string to_string(Density d)
{
    switch (d)
    {
        case Density::dense:
            return "dense";
        case Density::sparse:
            return "sparse";
        case Density::unknown:
            return "unknown";
    }
    return "unknown";
}

Density classify_density(Graphex const& g)
{
    if (g.support_bound())
        return Density::dense;
    try
    {
        g.kernel_norm();
        return Density::sparse;
    }
    catch (Error const&)
    {
        return Density::unknown;
    }
}

}  // namespace keg
