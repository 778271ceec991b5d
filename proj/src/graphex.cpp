#include "keg/graphex.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "keg/expr.hpp"
#include "keg/quadrature.hpp"
#include "keg/rng.hpp"
#include "numeric_tail.hpp"

namespace keg {

namespace {

Graphex::Parts
dilation_parts(Eigen::MatrixXd const& graphon, double c, bool self_edges);

struct FamilyName
{
    Family family;
    char const* name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::constant, "constant"},
    {Family::graphon_dilation, "graphon-dilation"},
    {Family::separable, "separable"},
    {Family::slow_decay, "slow-decay"},
    {Family::fast_decay, "fast-decay"},
    {Family::caron_fox, "caron-fox"},
    {Family::custom, "custom"},
};

//! Probe abscissae: 0 and a geometric sweep, clipped to the support.
std::vector<double> probe_points(std::optional<double> support)
{
    std::vector<double> xs{0.0};
    for (int k = -12; k <= 40; ++k)
    {
        xs.push_back(std::pow(1.5, k));
    }
    if (support)
    {
        xs.erase(std::remove_if(xs.begin(),
                                xs.end(),
                                [&](double x) { return x > *support; }),
                 xs.end());
        xs.push_back(*support);
    }
    return xs;
}

Expr parse_field(GraphexSpec const& spec, char const* key, bool bivariate)
{
    auto const it = spec.exprs.find(key);
    if (it == spec.exprs.end())
    {
        throw ConfigError(std::string("family ") + to_string(spec.family)
                          + " requires expression '" + key + "'");
    }
    Expr e = [&] {
        try
        {
            return parse_expr(it->second);
        }
        catch (ParseError const& err)
        {
            throw ConfigError(std::string("expression '") + key + "': "
                              + err.what());
        }
    }();
    if (e.uses_y() && !bivariate)
    {
        throw ConfigError(std::string("expression '") + key
                          + "' must depend on x only");
    }
    return e;
}

//! Evaluate on probes, mapping expression failures to ConfigError.
template<class F>
double probe(F&& f, char const* what)
{
    try
    {
        return f();
    }
    catch (DomainError const& err)
    {
        throw ConfigError(std::string(what) + ": " + err.what());
    }
}

void check_univariate(Fn1 const& f,
                      std::optional<double> support,
                      double upper,
                      char const* what)
{
    for (double x : probe_points(support))
    {
        double const v = probe([&] { return f(x); }, what);
        if (!(v >= 0) || v > upper)
        {
            std::ostringstream os;
            os << what << " evaluates to " << v << " at x = " << x
               << ", outside [0, " << upper << "]";
            throw ConfigError(os.str());
        }
    }
}

void check_kernel(Fn2 const& w, std::optional<double> support, double sym_tol)
{
    auto const xs = probe_points(support);
    for (double x : xs)
    {
        for (double y : xs)
        {
            double const v = probe([&] { return w(x, y); }, "W");
            if (!(v >= 0 && v <= 1))
            {
                std::ostringstream os;
                os << "W evaluates to " << v << " at (" << x << ", " << y
                   << "), outside [0, 1]";
                throw ConfigError(os.str());
            }
        }
    }
    // Symmetry on a pseudo-random grid
    CounterRng rng(0x5eed, 0x5a11);
    double const span = support.value_or(50.0);
    for (int i = 0; i < 2000; ++i)
    {
        double const x = span * rng.uniform();
        double const y = span * rng.uniform();
        double const a = probe([&] { return w(x, y); }, "W");
        double const b = probe([&] { return w(y, x); }, "W");
        if (std::fabs(a - b) > sym_tol)
        {
            std::ostringstream os;
            os << "W is not symmetric: W(" << x << ", " << y << ") = " << a
               << " but W(" << y << ", " << x << ") = " << b;
            throw ConfigError(os.str());
        }
    }
}

Fn1 restrict_to(Fn1 f, std::optional<double> support)
{
    if (!support)
        return f;
    double const c = *support;
    return [f = std::move(f), c](double x) { return x <= c ? f(x) : 0.0; };
}

Fn2 restrict_to(Fn2 f, std::optional<double> support)
{
    if (!support)
        return f;
    double const c = *support;
    return [f = std::move(f), c](double x, double y) {
        return (x <= c && y <= c) ? f(x, y) : 0.0;
    };
}

Envelope numeric_envelope(Fn1 h, std::optional<double> support, bool exact)
{
    auto table = std::make_shared<detail::NumericTail>(h, support);
    Envelope env;
    env.h = std::move(h);
    env.tail = [table](double x) { return table->tail(x); };
    env.tail_inverse = [table](double u) { return table->inverse(u); };
    env.monotone = false;
    env.exact = exact;
    return env;
}

Graphex::Parts base_parts(GraphexSpec const& spec)
{
    if (!(spec.isolated_rate >= 0))
    {
        throw ConfigError("I must be nonnegative");
    }
    Graphex::Parts parts;
    parts.spec = spec;
    parts.isolated_rate = spec.isolated_rate;
    parts.self_edges = spec.self_edges;
    if (auto it = spec.exprs.find("S"); it != spec.exprs.end())
    {
        Expr const s = parse_field(spec, "S", false);
        parts.star = [s](double x) { return s.eval(x); };
        check_univariate(parts.star, std::nullopt, INFINITY, "S");
    }
    return parts;
}

void reject_unused(GraphexSpec const& spec, std::vector<std::string> allowed)
{
    allowed.push_back("S");
    for (auto const& [key, text] : spec.exprs)
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            throw ConfigError("expression '" + key + "' is not used by family "
                              + to_string(spec.family));
        }
    }
}

void check_support(std::optional<double> const& support)
{
    if (support && !(*support > 0 && std::isfinite(*support)))
    {
        throw ConfigError("support_bound must be positive and finite");
    }
}

//---------------------------------------------------------------------------//
Graphex build_constant(GraphexSpec const& spec)
{
    reject_unused(spec, {});
    double const p = spec.p;
    double const c = spec.c;
    if (!(p >= 0 && p <= 1))
        throw ConfigError("constant: p must lie in [0, 1]");
    if (!(c > 0 && std::isfinite(c)))
        throw ConfigError("constant: c must be positive and finite");
    Graphex::Parts parts = base_parts(spec);
    parts.kernel = [p, c](double x, double y) {
        return (x <= c && y <= c) ? p : 0.0;
    };
    parts.diagonal = [p, c](double x) { return x <= c ? p : 0.0; };

    GraphexMeta& m = parts.meta;
    m.analytic = true;
    m.marginal = [p, c](double x) { return x <= c ? p * c : 0.0; };
    m.marginal_tail = [p, c](double x) { return p * c * std::max(0.0, c - x); };
    m.kernel_norm = p * c * c;
    m.diagonal_tail = [p, c](double x) { return p * std::max(0.0, c - x); };
    m.support_bound = c;
    m.breakpoints = {0.0, c};
    m.marginal_sup = p * c;
    double const root = std::sqrt(p);
    Envelope env;
    env.h = [root, c](double x) { return x <= c ? root : 0.0; };
    env.tail = [root, c](double x) { return root * std::max(0.0, c - x); };
    env.tail_inverse = [root, c](double u) {
        return root > 0 ? std::max(0.0, c - u / root) : c;
    };
    env.monotone = true;
    env.exact = true;
    m.envelope = env;
    return Graphex(std::move(parts));
}

Graphex build_slow_decay(GraphexSpec const& spec)
{
    reject_unused(spec, {});
    Graphex::Parts parts = base_parts(spec);
    // mu_W(x) = (x + 1)^-2 / 3 requires the factor 1/3 on the kernel
    parts.kernel = [](double x, double y) {
        double const a = 1 / ((x + 1) * (y + 1));
        return a * a / 3;
    };
    parts.diagonal = [](double x) {
        double const a = 1 / ((x + 1) * (x + 1));
        return a * a / 3;
    };
    GraphexMeta& m = parts.meta;
    m.analytic = true;
    m.marginal = [](double x) { return 1 / (3 * (x + 1) * (x + 1)); };
    m.marginal_tail = [](double x) { return 1 / (3 * (x + 1)); };
    m.kernel_norm = 1.0 / 3;
    m.diagonal_tail = [](double x) { return 1 / (9 * std::pow(x + 1, 3)); };
    m.marginal_sup = 1.0 / 3;
    double const inv_root3 = 1 / std::sqrt(3.0);
    Envelope env;
    env.h = [inv_root3](double x) { return inv_root3 / ((x + 1) * (x + 1)); };
    env.tail = [inv_root3](double x) { return inv_root3 / (x + 1); };
    env.tail_inverse = [inv_root3](double u) {
        return std::max(0.0, inv_root3 / u - 1);
    };
    env.monotone = true;
    env.exact = true;
    m.envelope = env;
    return Graphex(std::move(parts));
}

Graphex build_fast_decay(GraphexSpec const& spec)
{
    reject_unused(spec, {});
    Graphex::Parts parts = base_parts(spec);
    parts.kernel = [](double x, double y) { return std::exp(-x - y); };
    parts.diagonal = [](double x) { return std::exp(-2 * x); };
    GraphexMeta& m = parts.meta;
    m.analytic = true;
    m.marginal = [](double x) { return std::exp(-x); };
    m.marginal_tail = [](double x) { return std::exp(-x); };
    m.kernel_norm = 1.0;
    m.diagonal_tail = [](double x) { return 0.5 * std::exp(-2 * x); };
    m.marginal_sup = 1.0;
    Envelope env;
    env.h = [](double x) { return std::exp(-x); };
    env.tail = [](double x) { return std::exp(-x); };
    env.tail_inverse = [](double u) { return std::max(0.0, -std::log(u)); };
    env.monotone = true;
    env.exact = true;
    m.envelope = env;
    return Graphex(std::move(parts));
}

Graphex build_separable(GraphexSpec const& spec)
{
    reject_unused(spec, {"f"});
    check_support(spec.support_bound);
    Expr const f_expr = parse_field(spec, "f", false);
    Fn1 const f = restrict_to([f_expr](double x) { return f_expr.eval(x); },
                              spec.support_bound);
    check_univariate(f, spec.support_bound, 1.0, "f");
    Graphex::Parts parts = base_parts(spec);
    parts.kernel = [f](double x, double y) { return f(x) * f(y); };
    parts.diagonal = [f](double x) { return f(x) * f(x); };
    GraphexMeta& m = parts.meta;
    m.support_bound = spec.support_bound;
    if (spec.support_bound)
        m.breakpoints = {0.0, *spec.support_bound};
    Envelope env = numeric_envelope(f, spec.support_bound, true);
    double const mass = env.tail(0);
    Fn1 const tail = env.tail;
    m.marginal = [f, mass](double x) { return f(x) * mass; };
    m.marginal_tail = [tail, mass](double x) { return mass * tail(x); };
    m.kernel_norm = mass * mass;
    m.envelope = std::move(env);
    return Graphex(std::move(parts));
}

Graphex build_caron_fox(GraphexSpec const& spec)
{
    reject_unused(spec, {"g"});
    check_support(spec.support_bound);
    Expr const g_expr = parse_field(spec, "g", false);
    Fn1 const g = restrict_to([g_expr](double x) { return g_expr.eval(x); },
                              spec.support_bound);
    check_univariate(g, spec.support_bound, INFINITY, "g");
    Graphex::Parts parts = base_parts(spec);
    parts.kernel = [g](double x, double y) { return -std::expm1(-2 * g(x) * g(y)); };
    parts.diagonal = [g](double x) {
        double const v = g(x);
        return -std::expm1(-v * v);
    };
    GraphexMeta& m = parts.meta;
    m.support_bound = spec.support_bound;
    if (spec.support_bound)
        m.breakpoints = {0.0, *spec.support_bound};
    // 1 - exp(-2 g g') <= 2 g g' = (sqrt2 g)(sqrt2 g')
    double const root2 = std::sqrt(2.0);
    Envelope base = numeric_envelope(g, spec.support_bound, false);
    Envelope env;
    env.h = [g, root2](double x) { return root2 * g(x); };
    env.tail = [t = base.tail, root2](double x) { return root2 * t(x); };
    env.tail_inverse = [inv = base.tail_inverse, root2](double u) {
        return inv(u / root2);
    };
    env.exact = false;
    m.envelope = std::move(env);
    return Graphex(std::move(parts));
}

Graphex build_custom(GraphexSpec const& spec)
{
    reject_unused(spec, {"W"});
    check_support(spec.support_bound);
    Expr const w_expr = parse_field(spec, "W", true);
    Fn2 const w = restrict_to(
        [w_expr](double x, double y) { return w_expr.eval(x, y); },
        spec.support_bound);
    check_kernel(w, spec.support_bound, 1e-12);
    Graphex::Parts parts = base_parts(spec);
    parts.kernel = w;
    parts.diagonal = [w](double x) { return w(x, x); };
    parts.meta.support_bound = spec.support_bound;
    if (spec.support_bound)
        parts.meta.breakpoints = {0.0, *spec.support_bound};
    return Graphex(std::move(parts));
}

//! Integrate f over [0, c] split at breakpoints, or over [0, inf).
IntegralResult integrate_domain(Fn1 const& f,
                                GraphexMeta const& meta,
                                double from,
                                double rel_tol,
                                TailBound const& hint = {},
                                std::size_t budget = 2'000'000)
{
    if (meta.support_bound)
    {
        double const c = *meta.support_bound;
        IntegralResult total;
        total.converged = true;
        std::vector<double> cuts;
        cuts.push_back(from);
        for (double b : meta.breakpoints)
        {
            if (b > from && b < c)
                cuts.push_back(b);
        }
        cuts.push_back(std::max(from, c));
        std::sort(cuts.begin(), cuts.end());
        QuadratureOptions opts;
        opts.rel_tol = rel_tol;
        opts.abs_tol = 1e-300;
        opts.max_evaluations = budget;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        {
            IntegralResult const r = integrate(f, cuts[i], cuts[i + 1], opts);
            total.value += r.value;
            total.error_estimate += r.error_estimate;
            total.evaluations += r.evaluations;
            total.converged = total.converged && r.converged;
        }
        return total;
    }
    QuadratureOptions opts;
    opts.max_evaluations = budget;
    return integrate_from(f, from, rel_tol, hint, opts);
}

}  // namespace

//---------------------------------------------------------------------------//
std::string to_string(Family f)
{
    for (auto const& entry : kFamilyNames)
    {
        if (entry.family == f)
            return entry.name;
    }
    return "unknown";
}

Family family_from_string(std::string const& name)
{
    for (auto const& entry : kFamilyNames)
    {
        if (name == entry.name)
            return entry.family;
    }
    throw ConfigError("unknown graphex family '" + name + "'");
}

std::string to_string(Verdict v)
{
    switch (v)
    {
        case Verdict::holds_analytic:
            return "holds-analytic";
        case Verdict::holds_numeric:
            return "holds-numeric";
        case Verdict::violated:
            return "violated";
        case Verdict::undecidable:
            return "undecidable";
    }
    return "undecidable";
}

//---------------------------------------------------------------------------//
// JSON
//---------------------------------------------------------------------------//
nlohmann::json to_json(GraphexSpec const& spec)
{
    nlohmann::json params = nlohmann::json::object();
    switch (spec.family)
    {
        case Family::constant:
            params["p"] = spec.p;
            params["c"] = spec.c;
            break;
        case Family::graphon_dilation: {
            params["c"] = spec.c;
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index i = 0; i < spec.grid.rows(); ++i)
            {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index j = 0; j < spec.grid.cols(); ++j)
                    row.push_back(spec.grid(i, j));
                rows.push_back(row);
            }
            params["grid"] = rows;
            break;
        }
        default:
            break;
    }
    if (spec.support_bound)
        params["support_bound"] = *spec.support_bound;
    nlohmann::json doc;
    doc["family"] = to_string(spec.family);
    doc["params"] = params;
    doc["exprs"] = spec.exprs;
    if (std::isinf(spec.isolated_rate))
        doc["I"] = "inf";
    else
        doc["I"] = spec.isolated_rate;
    doc["self_edges"] = spec.self_edges;
    return doc;
}

GraphexSpec spec_from_json(nlohmann::json const& doc)
{
    if (!doc.is_object())
        throw ConfigError("graphex spec must be a JSON object");
    for (auto const& [key, value] : doc.items())
    {
        if (key != "family" && key != "params" && key != "exprs" && key != "I"
            && key != "self_edges")
        {
            throw ConfigError("unknown graphex spec field '" + key + "'");
        }
    }
    GraphexSpec spec;
    try
    {
        spec.family = family_from_string(doc.at("family").get<std::string>());
        if (doc.contains("params"))
        {
            auto const& params = doc.at("params");
            if (!params.is_object())
                throw ConfigError("params must be an object");
            for (auto const& [key, value] : params.items())
            {
                if (key == "p")
                    spec.p = value.get<double>();
                else if (key == "c")
                    spec.c = value.get<double>();
                else if (key == "support_bound")
                    spec.support_bound = value.get<double>();
                else if (key == "grid")
                {
                    auto const n = static_cast<Eigen::Index>(value.size());
                    spec.grid.resize(n, n);
                    for (Eigen::Index i = 0; i < n; ++i)
                    {
                        auto const& row = value.at(static_cast<std::size_t>(i));
                        if (static_cast<Eigen::Index>(row.size()) != n)
                            throw ConfigError("graphon grid must be square");
                        for (Eigen::Index j = 0; j < n; ++j)
                            spec.grid(i, j)
                                = row.at(static_cast<std::size_t>(j)).get<double>();
                    }
                }
                else
                    throw ConfigError("unknown parameter '" + key + "'");
            }
        }
        if (doc.contains("exprs"))
        {
            spec.exprs = doc.at("exprs").get<std::map<std::string, std::string>>();
        }
        if (doc.contains("I"))
        {
            auto const& i = doc.at("I");
            if (i.is_string() && i.get<std::string>() == "inf")
                spec.isolated_rate = INFINITY;
            else
                spec.isolated_rate = i.get<double>();
        }
        if (doc.contains("self_edges"))
            spec.self_edges = doc.at("self_edges").get<bool>();
    }
    catch (nlohmann::json::exception const& err)
    {
        throw ConfigError(std::string("malformed graphex spec: ") + err.what());
    }
    return spec;
}

//---------------------------------------------------------------------------//
// Graphex
//---------------------------------------------------------------------------//
struct Graphex::Cache
{
    std::mutex mutex;
    std::optional<double> kernel_norm;
    bool kernel_norm_failed = false;
};

Graphex::Graphex(Parts parts)
    : parts_(std::make_shared<Parts const>(std::move(parts)))
    , cache_(std::make_shared<Cache>())
{
}

double Graphex::star(double x) const
{
    return parts_->star ? parts_->star(x) : 0.0;
}

double Graphex::kernel(double x, double y) const
{
    if (x == y)
        return diagonal(x);
    return parts_->kernel(x, y);
}

double Graphex::diagonal(double x) const
{
    return parts_->self_edges ? parts_->diagonal(x) : 0.0;
}

double Graphex::marginal_tail(double x, double rel_tol) const
{
    GraphexMeta const& m = parts_->meta;
    if (m.marginal_tail)
        return m.marginal_tail(x);
    Graphex const self = *this;
    Fn1 const mu = [self, rel_tol](double t) {
        return marginal(self, t, rel_tol * 0.1);
    };
    IntegralResult r;
    try
    {
        // Each sample is itself a quadrature, so keep the outer budget small
        r = integrate_domain(mu, m, x, rel_tol, {}, 30'000);
    }
    catch (QuadratureError const& err)
    {
        throw InfiniteExpectation(std::string("marginal is not integrable: ")
                                  + err.what());
    }
    if (!r.converged)
    {
        throw InfiniteExpectation("integral of the marginal did not converge "
                                  "(estimate "
                                  + std::to_string(r.value) + ", error "
                                  + std::to_string(r.error_estimate) + ")");
    }
    return r.value;
}

double Graphex::kernel_norm(double rel_tol) const
{
    if (parts_->meta.kernel_norm)
        return *parts_->meta.kernel_norm;
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        if (cache_->kernel_norm)
            return *cache_->kernel_norm;
        if (cache_->kernel_norm_failed)
            throw InfiniteExpectation("||W||_1 is not finite");
    }
    try
    {
        double const v = marginal_tail(0, rel_tol);
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->kernel_norm = v;
        return v;
    }
    catch (InfiniteExpectation const&)
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->kernel_norm_failed = true;
        throw;
    }
}

double Graphex::star_tail(double x, double rel_tol) const
{
    if (!parts_->star)
        return 0;
    if (parts_->meta.star_tail)
        return parts_->meta.star_tail(x);
    IntegralResult const r = integrate_from(parts_->star, x, rel_tol);
    if (!r.converged)
        throw InfiniteExpectation("integral of S did not converge");
    return r.value;
}

double Graphex::diagonal_tail(double x, double rel_tol) const
{
    if (!parts_->self_edges)
        return 0;
    if (parts_->meta.diagonal_tail)
        return parts_->meta.diagonal_tail(x);
    IntegralResult const r
        = integrate_domain(parts_->diagonal, parts_->meta, x, rel_tol);
    if (!r.converged)
        throw InfiniteExpectation("integral of W(x, x) did not converge");
    return r.value;
}

//---------------------------------------------------------------------------//
Graphex build(GraphexSpec const& spec)
{
    switch (spec.family)
    {
        case Family::constant:
            return build_constant(spec);
        case Family::graphon_dilation: {
            reject_unused(spec, {});
            Graphex::Parts const extra = base_parts(spec);
            Graphex::Parts parts
                = dilation_parts(spec.grid, spec.c, spec.self_edges);
            parts.isolated_rate = extra.isolated_rate;
            parts.star = extra.star;
            parts.spec = spec;
            return Graphex(std::move(parts));
        }
        case Family::separable:
            return build_separable(spec);
        case Family::slow_decay:
            return build_slow_decay(spec);
        case Family::fast_decay:
            return build_fast_decay(spec);
        case Family::caron_fox:
            return build_caron_fox(spec);
        case Family::custom:
            return build_custom(spec);
    }
    throw ConfigError("unknown family");
}

double marginal(Graphex const& g, double x, double rel_tol)
{
    if (!(x >= 0))
        throw ConfigError("marginal: x must be nonnegative");
    GraphexMeta const& m = g.meta();
    if (m.marginal)
        return m.marginal(x);
    if (m.support_bound && x > *m.support_bound)
        return 0;
    Fn1 const row = [&g, x](double y) {
        return g.kernel(x, y == x ? std::nextafter(y, INFINITY) : y);
    };
    IntegralResult const r = integrate_domain(row, m, 0, rel_tol);
    if (!r.converged)
    {
        throw QuadratureError("marginal quadrature did not converge at x = "
                                  + std::to_string(x),
                              r.value,
                              r.error_estimate);
    }
    return r.value;
}

Graphex dilate(Eigen::MatrixXd const& graphon, double c, bool self_edges)
{
    return Graphex(dilation_parts(graphon, c, self_edges));
}

namespace {

Graphex::Parts
dilation_parts(Eigen::MatrixXd const& graphon, double c, bool self_edges)
{
    Eigen::Index const n = graphon.rows();
    if (n == 0 || graphon.cols() != n)
        throw ConfigError("graphon grid must be square and nonempty");
    if (!(c > 0 && std::isfinite(c)))
        throw ConfigError("dilation factor must be positive and finite");
    if ((graphon.array() < 0).any() || (graphon.array() > 1).any()
        || !graphon.allFinite())
        throw ConfigError("graphon values must lie in [0, 1]");
    if (graphon != graphon.transpose())
        throw ConfigError("graphon grid must be symmetric");

    auto const grid = std::make_shared<Eigen::MatrixXd const>(graphon);
    double const width = c / static_cast<double>(n);
    auto cell = [n, c](double x) {
        auto const i = static_cast<Eigen::Index>(std::floor(
            static_cast<double>(n) * x / c));
        return std::min<Eigen::Index>(std::max<Eigen::Index>(i, 0), n - 1);
    };
    Eigen::VectorXd const row_mass = graphon.rowwise().sum() * width;
    auto const rows = std::make_shared<Eigen::VectorXd const>(row_mass);
    Eigen::VectorXd const diag = graphon.diagonal();
    auto const diagonal_cells = std::make_shared<Eigen::VectorXd const>(diag);

    // Integral over [x, c] of a function constant on cells
    auto cell_tail = [n, c, width, cell](Eigen::VectorXd const& values,
                                         double x) {
        if (x >= c)
            return 0.0;
        x = std::max(x, 0.0);
        Eigen::Index const i = cell(x);
        double acc = values[i] * (width * static_cast<double>(i + 1) - x);
        for (Eigen::Index j = i + 1; j < n; ++j)
            acc += values[j] * width;
        return acc;
    };

    GraphexSpec spec;
    spec.family = Family::graphon_dilation;
    spec.grid = graphon;
    spec.c = c;
    spec.self_edges = self_edges;

    Graphex::Parts parts;
    parts.spec = spec;
    parts.self_edges = self_edges;
    parts.kernel = [grid, cell, c](double x, double y) {
        return (x <= c && y <= c) ? (*grid)(cell(x), cell(y)) : 0.0;
    };
    parts.diagonal = [diagonal_cells, cell, c](double x) {
        return x <= c ? (*diagonal_cells)[cell(x)] : 0.0;
    };
    GraphexMeta& m = parts.meta;
    m.analytic = true;
    m.marginal = [rows, cell, c](double x) {
        return x <= c ? (*rows)[cell(x)] : 0.0;
    };
    m.marginal_tail = [rows, cell_tail](double x) {
        return cell_tail(*rows, x);
    };
    m.kernel_norm = graphon.sum() * width * width;
    m.diagonal_tail = [diagonal_cells, cell_tail](double x) {
        return cell_tail(*diagonal_cells, x);
    };
    m.support_bound = c;
    m.marginal_sup = row_mass.maxCoeff();
    for (Eigen::Index i = 0; i <= n; ++i)
        m.breakpoints.push_back(width * static_cast<double>(i));

    double const top = graphon.maxCoeff();
    double const root = std::sqrt(top);
    Envelope env;
    env.h = [root, c](double x) { return x <= c ? root : 0.0; };
    env.tail = [root, c](double x) { return root * std::max(0.0, c - x); };
    env.tail_inverse = [root, c](double u) {
        return root > 0 ? std::max(0.0, c - u / root) : c;
    };
    env.monotone = true;
    env.exact = (graphon.array() == top).all();
    m.envelope = env;
    return parts;
}

}  // namespace

//---------------------------------------------------------------------------//
// Local finiteness
//---------------------------------------------------------------------------//
bool FinitenessReport::all_hold() const
{
    return std::all_of(conditions.begin(), conditions.end(), [](auto const& c) {
        return c.verdict == Verdict::holds_analytic
               || c.verdict == Verdict::holds_numeric;
    });
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

//! mu_W on a probe point; +inf when the quadrature does not settle.
double probe_marginal(Graphex const& g, double x, double rel_tol)
{
    try
    {
        return marginal(g, x, rel_tol);
    }
    catch (Error const&)
    {
        return INFINITY;
    }
}

}  // namespace

FinitenessReport check_local_finiteness(Graphex const& g, ProbeConfig const& probe)
{
    FinitenessReport report;
    GraphexMeta const& m = g.meta();

    // (i)
    {
        ConditionResult r{"(i) I < inf", Verdict::undecidable, ""};
        double const i = g.isolated_rate();
        if (std::isfinite(i))
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "I = " + fmt(i);
        }
        else
        {
            r.verdict = Verdict::violated;
            r.detail = "I is infinite";
        }
        report.conditions.push_back(r);
    }
    // (ii)
    {
        ConditionResult r{"(ii) integral of S < inf", Verdict::undecidable, ""};
        if (g.star_is_zero())
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "S = 0";
        }
        else if (m.star_tail)
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "integral of S = " + fmt(m.star_tail(0));
        }
        else
        {
            try
            {
                IntegralResult const s = integrate_semiinf(
                    [&g](double x) { return g.star(x); }, probe.rel_tol);
                r.verdict = s.converged ? Verdict::holds_numeric
                                        : Verdict::undecidable;
                r.detail = "integral of S ~ " + fmt(s.value) + " (error "
                           + fmt(s.error_estimate) + ")";
            }
            catch (Error const& err)
            {
                r.verdict = Verdict::undecidable;
                r.detail = err.what();
            }
        }
        report.conditions.push_back(r);
    }

    // (iii) and the threshold point beyond which mu_W <= 1
    std::optional<double> threshold;
    bool eventually_decreasing = false;
    {
        ConditionResult r{"(iii) Lambda{mu_W > 1} < inf", Verdict::undecidable, ""};
        std::vector<double> xs;
        double const top = m.support_bound.value_or(probe.probe_max);
        xs.push_back(0);
        for (int k = 0; k < probe.probe_points; ++k)
        {
            xs.push_back(1e-4 * std::pow(top / 1e-4, k / double(probe.probe_points - 1)));
        }
        std::vector<double> mu;
        for (double x : xs)
            mu.push_back(probe_marginal(g, x, probe.rel_tol));

        std::optional<std::size_t> last_above;
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            if (mu[i] > 1)
                last_above = i;
        }
        std::size_t const start = last_above ? *last_above + 1 : 0;
        eventually_decreasing = true;
        for (std::size_t i = start + 1; i < xs.size(); ++i)
        {
            if (mu[i] > mu[i - 1] * (1 + 1e-6) + 1e-300)
            {
                eventually_decreasing = false;
                break;
            }
        }
        if (m.support_bound)
        {
            threshold = last_above ? std::optional<double>(*m.support_bound)
                                   : std::optional<double>(0.0);
            r.verdict = m.analytic ? Verdict::holds_analytic
                                   : Verdict::holds_numeric;
            r.detail = "support bounded by " + fmt(*m.support_bound);
            eventually_decreasing = true;
        }
        else if (m.marginal_sup && *m.marginal_sup <= 1)
        {
            threshold = 0.0;
            r.verdict = Verdict::holds_analytic;
            r.detail = "sup mu_W = " + fmt(*m.marginal_sup) + " <= 1";
        }
        else if (!last_above)
        {
            threshold = 0.0;
            r.verdict = Verdict::holds_numeric;
            r.detail = "mu_W <= 1 on the probe grid";
        }
        else if (*last_above + 1 >= xs.size())
        {
            r.verdict = Verdict::undecidable;
            r.detail = "mu_W > 1 at the end of the probe range";
        }
        else if (!eventually_decreasing)
        {
            r.verdict = Verdict::undecidable;
            r.detail = "mu_W is not eventually decreasing on the probe grid";
        }
        else
        {
            double lo = xs[*last_above];
            double hi = xs[*last_above + 1];
            for (int it = 0; it < 60; ++it)
            {
                double const mid = 0.5 * (lo + hi);
                (probe_marginal(g, mid, probe.rel_tol) > 1 ? lo : hi) = mid;
            }
            threshold = hi;
            r.verdict = m.analytic ? Verdict::holds_analytic
                                   : Verdict::holds_numeric;
            r.detail = "Lambda{mu_W > 1} <= " + fmt(hi);
        }
        report.conditions.push_back(r);

        ConditionResult fin{"Lambda{mu_W = inf} = 0", Verdict::undecidable, ""};
        if (m.analytic)
        {
            fin.verdict = Verdict::holds_analytic;
            fin.detail = "closed-form marginal is finite";
        }
        else
        {
            fin.verdict = Verdict::undecidable;
            fin.detail = "not certifiable from point evaluations";
        }
        report.marginal_finite = fin;
    }

    // (iv)
    {
        ConditionResult r{"(iv) integral of W on {mu_W <= 1}^2 < inf", Verdict::undecidable, ""};
        if (m.kernel_norm)
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "||W||_1 = " + fmt(*m.kernel_norm);
        }
        else
        {
            bool done = false;
            try
            {
                double const norm = g.kernel_norm(probe.rel_tol);
                r.verdict = Verdict::holds_numeric;
                r.detail = "||W||_1 ~ " + fmt(norm);
                done = true;
            }
            catch (Error const&)
            {
            }
            if (!done && threshold && eventually_decreasing)
            {
                double const x0 = *threshold;
                Fn1 const inner = [&g, x0, &probe](double x) {
                    IntegralResult const row = integrate_from(
                        [&g, x](double y) { return g.kernel(x, y); },
                        x0,
                        probe.rel_tol);
                    if (!row.converged)
                        throw QuadratureError("row integral diverges", row.value,
                                              row.error_estimate);
                    return row.value;
                };
                try
                {
                    IntegralResult const outer
                        = integrate_from(inner, x0, probe.rel_tol);
                    if (outer.converged)
                    {
                        r.verdict = Verdict::holds_numeric;
                        r.detail = "integral over [" + fmt(x0)
                                   + ", inf)^2 ~ " + fmt(outer.value);
                        done = true;
                    }
                }
                catch (Error const&)
                {
                }
            }
            if (!done)
            {
                r.verdict = Verdict::undecidable;
                r.detail = "restricted integral could not be bounded";
            }
        }
        report.conditions.push_back(r);
    }

    // (v)
    {
        ConditionResult r{"(v) integral of W(x, x) < inf", Verdict::undecidable, ""};
        if (!g.self_edges())
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "self edges disabled";
        }
        else if (m.diagonal_tail)
        {
            r.verdict = Verdict::holds_analytic;
            r.detail = "integral = " + fmt(m.diagonal_tail(0));
        }
        else
        {
            try
            {
                double const v = g.diagonal_tail(0, probe.rel_tol);
                r.verdict = Verdict::holds_numeric;
                r.detail = "integral ~ " + fmt(v);
            }
            catch (Error const& err)
            {
                r.verdict = Verdict::undecidable;
                r.detail = err.what();
            }
        }
        report.conditions.push_back(r);
    }
    return report;
}

nlohmann::json to_json(FinitenessReport const& report)
{
    nlohmann::json doc;
    nlohmann::json conditions = nlohmann::json::array();
    for (auto const& c : report.conditions)
    {
        conditions.push_back(
            {{"condition", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
    }
    doc["conditions"] = conditions;
    doc["marginal_finite"] = {{"condition", report.marginal_finite.name},
                              {"verdict", to_string(report.marginal_finite.verdict)},
                              {"detail", report.marginal_finite.detail}};
    doc["all_hold"] = report.all_hold();
    return doc;
}

}  // namespace keg
