#include "keg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "keg/graphstats.hpp"
#include "keg/io.hpp"
#include "keg/stats.hpp"
#include "keg/theory.hpp"

namespace keg {

namespace {

enum Arm : std::uint64_t
{
    kValidateArm = 0,
    kDegdistArm,
    kConnectivityArm,
    kRestrictedArm,
    kDirectArm,
    kPlantedArm,
};

SamplerConfig replicate_config(double nu,
                               std::uint64_t seed,
                               std::uint64_t stream,
                               double epsilon)
{
    SamplerConfig sc;
    sc.nu = nu;
    sc.seed = seed;
    sc.stream = stream;
    sc.epsilon = epsilon;
    return sc;
}

std::string csv_optional(std::optional<int> const& k)
{
    return k ? std::to_string(*k) : std::string();
}

}  // namespace

void parallel_for(std::uint64_t n,
                  unsigned threads,
                  std::function<void(std::uint64_t)> const& body)
{
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2)
    {
        for (std::uint64_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::mutex mutex;
    std::uint64_t failed_at = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::uint64_t i = next++; i < n; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (i < failed_at)
                {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned const count = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
    for (unsigned t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

std::uint64_t replicate_stream(std::uint64_t arm, std::uint64_t point, std::uint64_t r)
{
    return (arm << 56) ^ (point << 40) ^ r;
}

//---------------------------------------------------------------------------//
// validate
//---------------------------------------------------------------------------//
bool ValidationReport::all_pass() const
{
    return std::all_of(rows.begin(), rows.end(), [](auto const& r) { return r.pass; });
}

ValidationReport validate_expectations(Graphex const& g, ValidateConfig const& cfg)
{
    if (cfg.nu_grid.empty())
        throw ConfigError("validate: empty nu grid");
    if (cfg.replicates < 30)
        throw ConfigError("validate: at least 30 replicates are required");
    for (auto const& s : cfg.stats)
    {
        if (s != "edges" && s != "vertices" && s != "degk" && s != "star_edges"
            && s != "isolated_edges")
        {
            throw ConfigError("validate: unknown statistic '" + s + "'");
        }
    }
    ValidationReport report;
    report.seed = cfg.seed;
    report.z_crit = cfg.z_crit;
    report.spec = to_json(g.spec());

    // Row layout shared by theory and samples
    struct Slot
    {
        std::string stat;
        std::optional<int> k;
    };
    std::vector<Slot> slots;
    for (auto const& s : cfg.stats)
    {
        if (s == "degk")
        {
            for (int k : cfg.degrees)
            {
                if (k < 1)
                    throw ConfigError("validate: degrees must be >= 1");
                slots.push_back({s, k});
            }
        }
        else
        {
            slots.push_back({s, std::nullopt});
        }
    }

    for (std::size_t p = 0; p < cfg.nu_grid.size(); ++p)
    {
        double const nu = cfg.nu_grid[p];
        if (!(nu >= 0 && std::isfinite(nu)))
            throw ConfigError("validate: nu values must be nonnegative and finite");
        std::vector<std::vector<double>> values(
            slots.size(), std::vector<double>(cfg.replicates, 0.0));
        std::string sampling_error;
        try
        {
            parallel_for(cfg.replicates, cfg.threads, [&](std::uint64_t r) {
                SampledGraph const graph = sample_keg(
                    g,
                    replicate_config(nu,
                                     cfg.seed,
                                     replicate_stream(kValidateArm, p, r),
                                     cfg.epsilon));
                DegreeHistogram const hist = degree_histogram(graph);
                std::uint64_t star = 0;
                std::uint64_t isolated = 0;
                for (Edge const& e : graph.edges)
                {
                    star += e.provenance == Provenance::star;
                    isolated += e.provenance == Provenance::isolated;
                }
                for (std::size_t s = 0; s < slots.size(); ++s)
                {
                    auto const& name = slots[s].stat;
                    double v = 0;
                    if (name == "edges")
                        v = static_cast<double>(graph.num_edges());
                    else if (name == "vertices")
                        v = static_cast<double>(graph.num_vertices());
                    else if (name == "degk")
                        v = static_cast<double>(
                            hist.at(static_cast<std::uint64_t>(*slots[s].k)));
                    else if (name == "star_edges")
                        v = static_cast<double>(star);
                    else
                        v = static_cast<double>(isolated);
                    values[s][r] = v;
                }
            });
        }
        catch (Error const& err)
        {
            sampling_error = err.what();
        }

        for (std::size_t s = 0; s < slots.size(); ++s)
        {
            ValidationRow row;
            row.stat = slots[s].stat;
            row.nu = nu;
            row.k = slots[s].k;
            row.replicates = cfg.replicates;
            if (!sampling_error.empty())
            {
                row.error = sampling_error;
                report.rows.push_back(row);
                continue;
            }
            Summary const sum = summarize(values[s]);
            row.mean = sum.mean;
            row.sd = sum.sd;
            row.se = sum.se;
            try
            {
                if (row.stat == "edges")
                    row.theory = expected_edges(g, nu, cfg.rel_tol).value;
                else if (row.stat == "vertices")
                    row.theory = expected_vertices(g, nu, cfg.rel_tol).value;
                else if (row.stat == "degk")
                    row.theory = expected_degree_k(g, nu, *row.k, cfg.rel_tol).value;
                else if (row.stat == "star_edges")
                    row.theory
                        = expected_edges(g, nu, cfg.rel_tol).components.at("star");
                else
                    row.theory
                        = expected_edges(g, nu, cfg.rel_tol).components.at("isolated");
            }
            catch (Error const& err)
            {
                row.error = err.what();
                report.rows.push_back(row);
                continue;
            }
            double const diff = row.mean - row.theory;
            // Identical replicates: fall back to a Poisson-scale error
            double const se = row.se > 0
                                  ? row.se
                                  : std::sqrt(std::max(std::fabs(row.theory),
                                                       std::fabs(row.mean))
                                              / static_cast<double>(row.replicates));
            if (se > 0)
            {
                row.z = diff / se;
            }
            else if (std::fabs(diff) <= 1e-9 * std::max(1.0, std::fabs(row.theory)))
            {
                row.z = 0;
            }
            else
            {
                row.z = diff > 0 ? INFINITY : -INFINITY;
            }
            row.pass = std::fabs(row.z) <= cfg.z_crit;
            report.rows.push_back(row);
        }
    }
    return report;
}

nlohmann::json to_json(ValidationReport const& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& row : r.rows)
    {
        nlohmann::json j{{"stat", row.stat},
                         {"nu", row.nu},
                         {"replicates", row.replicates},
                         {"mean", row.mean},
                         {"sd", row.sd},
                         {"se", row.se},
                         {"theory", row.theory},
                         {"verdict", row.pass ? "pass" : "fail"}};
        j["k"] = row.k ? nlohmann::json(*row.k) : nlohmann::json(nullptr);
        j["z"] = std::isfinite(row.z) ? nlohmann::json(row.z)
                                      : nlohmann::json(row.z > 0 ? "inf" : "-inf");
        if (!row.error.empty())
            j["error"] = row.error;
        rows.push_back(j);
    }
    return {{"report", "validate"},
            {"seed", r.seed},
            {"z_crit", r.z_crit},
            {"spec", r.spec},
            {"rows", rows},
            {"pass", r.all_pass()}};
}

std::string to_csv(ValidationReport const& r)
{
    std::ostringstream os;
    os << "stat,nu,k,replicates,mean,sd,se,theory,z,verdict\n";
    for (auto const& row : r.rows)
    {
        os << row.stat << ',' << format_double(row.nu) << ',' << csv_optional(row.k)
           << ',' << row.replicates << ',' << format_double(row.mean) << ','
           << format_double(row.sd) << ',' << format_double(row.se) << ','
           << format_double(row.theory) << ',' << format_double(row.z) << ','
           << (row.pass ? "pass" : "fail") << '\n';
    }
    return os.str();
}

//---------------------------------------------------------------------------//
// degdist
//---------------------------------------------------------------------------//
namespace {

std::string to_string(DegreeEvent e)
{
    switch (e)
    {
        case DegreeEvent::greater:
            return "greater";
        case DegreeEvent::at_most:
            return "at_most";
        case DegreeEvent::equal:
            return "equal";
    }
    return "greater";
}

bool event_holds(DegreeEvent e, std::uint64_t d, std::uint64_t k)
{
    switch (e)
    {
        case DegreeEvent::greater:
            return d > k;
        case DegreeEvent::at_most:
            return d <= k;
        case DegreeEvent::equal:
            return d == k;
    }
    return false;
}

double event_theory(Graphex const& g, DegreeEvent e, double nu, int k)
{
    double const above = degree_ccdf(g, nu, k).value;
    switch (e)
    {
        case DegreeEvent::greater:
            return above;
        case DegreeEvent::at_most:
            return 1 - above;
        case DegreeEvent::equal:
            return k >= 1 ? degree_ccdf(g, nu, k - 1).value - above : 0.0;
    }
    return above;
}

}  // namespace

DegdistReport degdist_experiment(Graphex const& g, DegdistConfig const& cfg)
{
    if (cfg.nu_grid.empty())
        throw ConfigError("degdist: empty nu grid");
    if (cfg.replicates < 1)
        throw ConfigError("degdist: at least one replicate is required");
    DegdistReport report;
    report.seed = cfg.seed;
    report.spec = to_json(g.spec());
    report.event = to_string(cfg.event);
    report.limit = cfg.limit;
    report.tolerance = cfg.tolerance;

    for (std::size_t p = 0; p < cfg.nu_grid.size(); ++p)
    {
        double const nu = cfg.nu_grid[p];
        if (!(nu > 0 && std::isfinite(nu)))
            throw ConfigError("degdist: nu values must be positive and finite");
        int const k = cfg.beta
                          ? static_cast<int>(std::floor(std::pow(nu, *cfg.beta)))
                          : cfg.k;
        if (k < 0)
            throw ConfigError("degdist: k must be nonnegative");
        std::vector<double> fraction(cfg.replicates, 0.0);
        std::vector<char> used(cfg.replicates, 0);
        parallel_for(cfg.replicates, cfg.threads, [&](std::uint64_t r) {
            SampledGraph const graph = sample_keg(
                g,
                replicate_config(nu,
                                 cfg.seed,
                                 replicate_stream(kDegdistArm, p, r),
                                 cfg.epsilon));
            if (graph.num_vertices() == 0)
                return;
            std::uint64_t hits = 0;
            for (std::uint64_t d : degrees(graph))
                hits += event_holds(cfg.event, d, static_cast<std::uint64_t>(k));
            fraction[r]
                = static_cast<double>(hits) / static_cast<double>(graph.num_vertices());
            used[r] = 1;
        });
        std::vector<double> kept;
        for (std::uint64_t r = 0; r < cfg.replicates; ++r)
        {
            if (used[r])
                kept.push_back(fraction[r]);
        }
        if (kept.empty())
            throw DegenerateError("degdist: every sampled graph is empty");
        Summary const sum = summarize(kept);
        DegdistRow row;
        row.nu = nu;
        row.k = k;
        row.replicates_used = kept.size();
        row.excluded = cfg.replicates - kept.size();
        row.empirical = sum.mean;
        row.empirical_se = sum.se;
        row.theory = event_theory(g, cfg.event, nu, k);
        row.gap = std::fabs(row.empirical - (cfg.limit ? *cfg.limit : row.theory));
        report.rows.push_back(row);
    }
    report.trend_ok = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
    {
        if (report.rows[i].gap > report.rows[i - 1].gap)
            report.trend_ok = false;
    }
    report.final_ok = report.rows.back().gap <= cfg.tolerance;
    report.pass = report.trend_ok && report.final_ok;
    return report;
}

nlohmann::json to_json(DegdistReport const& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& row : r.rows)
    {
        rows.push_back({{"nu", row.nu},
                        {"k", row.k},
                        {"replicates_used", row.replicates_used},
                        {"excluded", row.excluded},
                        {"empirical", row.empirical},
                        {"empirical_se", row.empirical_se},
                        {"theory", row.theory},
                        {"gap", row.gap}});
    }
    return {{"report", "degdist"},
            {"seed", r.seed},
            {"spec", r.spec},
            {"event", r.event},
            {"limit", r.limit ? nlohmann::json(*r.limit) : nlohmann::json(nullptr)},
            {"tolerance", r.tolerance},
            {"rows", rows},
            {"trend_ok", r.trend_ok},
            {"final_ok", r.final_ok},
            {"pass", r.pass}};
}

std::string to_csv(DegdistReport const& r)
{
    std::ostringstream os;
    os << "nu,k,replicates_used,excluded,empirical,empirical_se,theory,gap\n";
    for (auto const& row : r.rows)
    {
        os << format_double(row.nu) << ',' << row.k << ',' << row.replicates_used
           << ',' << row.excluded << ',' << format_double(row.empirical) << ','
           << format_double(row.empirical_se) << ',' << format_double(row.theory)
           << ',' << format_double(row.gap) << '\n';
    }
    return os.str();
}

//---------------------------------------------------------------------------//
// connectivity
//---------------------------------------------------------------------------//
Graphex separable_from_expression(std::string const& f, std::optional<double> support)
{
    GraphexSpec spec;
    spec.family = Family::separable;
    spec.exprs["f"] = f;
    spec.support_bound = support;
    return build(spec);
}

ConnectivityReport connectivity_experiment(Graphex const& g,
                                           ConnectivityConfig const& cfg)
{
    if (cfg.nu_grid.empty())
        throw ConfigError("connectivity: empty nu grid");
    if (g.kernel_norm() <= 0)
        throw DegenerateError("connectivity: W integrates to zero, graphs are empty");
    ConnectivityReport report;
    report.seed = cfg.seed;
    report.spec = to_json(g.spec());
    report.threshold = cfg.threshold;
    for (std::size_t p = 0; p < cfg.nu_grid.size(); ++p)
    {
        double const nu = cfg.nu_grid[p];
        if (!(nu > 0 && std::isfinite(nu)))
            throw ConfigError("connectivity: nu values must be positive and finite");
        std::vector<double> fraction(cfg.replicates, 0.0);
        std::vector<double> size(cfg.replicates, 0.0);
        std::vector<char> used(cfg.replicates, 0);
        parallel_for(cfg.replicates, cfg.threads, [&](std::uint64_t r) {
            SampledGraph const graph = sample_keg(
                g,
                replicate_config(nu,
                                 cfg.seed,
                                 replicate_stream(kConnectivityArm, p, r),
                                 cfg.epsilon));
            if (graph.num_vertices() == 0)
                return;
            fraction[r] = largest_component(graph).fraction;
            size[r] = static_cast<double>(graph.num_vertices());
            used[r] = 1;
        });
        std::vector<double> kept;
        std::vector<double> kept_size;
        for (std::uint64_t r = 0; r < cfg.replicates; ++r)
        {
            if (used[r])
            {
                kept.push_back(fraction[r]);
                kept_size.push_back(size[r]);
            }
        }
        ConnectivityRow row;
        row.nu = nu;
        row.replicates = cfg.replicates;
        row.empty = cfg.replicates - kept.size();
        if (!kept.empty())
        {
            Summary const s = summarize(kept);
            row.mean_fraction = s.mean;
            row.se = s.se;
            row.mean_vertices = summarize(kept_size).mean;
        }
        report.rows.push_back(row);
    }
    report.monotone = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
    {
        if (report.rows[i].mean_fraction < report.rows[i - 1].mean_fraction)
            report.monotone = false;
    }
    report.threshold_ok = report.rows.back().mean_fraction >= cfg.threshold;
    report.pass = report.monotone && report.threshold_ok;
    return report;
}

nlohmann::json to_json(ConnectivityReport const& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& row : r.rows)
    {
        rows.push_back({{"nu", row.nu},
                        {"replicates", row.replicates},
                        {"empty", row.empty},
                        {"mean_fraction", row.mean_fraction},
                        {"se", row.se},
                        {"mean_vertices", row.mean_vertices}});
    }
    return {{"report", "connectivity"},
            {"seed", r.seed},
            {"spec", r.spec},
            {"threshold", r.threshold},
            {"rows", rows},
            {"monotone", r.monotone},
            {"threshold_ok", r.threshold_ok},
            {"pass", r.pass}};
}

std::string to_csv(ConnectivityReport const& r)
{
    std::ostringstream os;
    os << "nu,replicates,empty,mean_fraction,se,mean_vertices\n";
    for (auto const& row : r.rows)
    {
        os << format_double(row.nu) << ',' << row.replicates << ',' << row.empty
           << ',' << format_double(row.mean_fraction) << ','
           << format_double(row.se) << ',' << format_double(row.mean_vertices)
           << '\n';
    }
    return os.str();
}

//---------------------------------------------------------------------------//
// projectivity
//---------------------------------------------------------------------------//
ProjectivityReport projectivity_test(Graphex const& g, ProjectivityConfig const& cfg)
{
    if (!(cfg.nu >= 0 && std::isfinite(cfg.nu)))
        throw ConfigError("projectivity: nu must be nonnegative and finite");
    if (cfg.replicates < 1)
        throw ConfigError("projectivity: at least one replicate is required");
    std::vector<double> restricted(cfg.replicates, 0.0);
    std::vector<double> direct(cfg.replicates, 0.0);
    parallel_for(cfg.replicates, cfg.threads, [&](std::uint64_t r) {
        SampledGraph const big = sample_keg(
            g,
            replicate_config(2 * cfg.nu,
                             cfg.seed,
                             replicate_stream(kRestrictedArm, 0, r),
                             cfg.epsilon));
        restricted[r] = static_cast<double>(restrict(big, cfg.nu).num_edges());
        SampledGraph const small = sample_keg(
            g,
            replicate_config(cfg.nu,
                             cfg.seed,
                             replicate_stream(kDirectArm, 0, r),
                             cfg.epsilon));
        direct[r] = static_cast<double>(small.num_edges());
    });
    ProjectivityReport report;
    report.seed = cfg.seed;
    report.spec = to_json(g.spec());
    report.nu = cfg.nu;
    report.replicates = cfg.replicates;
    report.alpha = cfg.alpha;
    report.mean_restricted = summarize(restricted).mean;
    report.mean_direct = summarize(direct).mean;
    TestResult const ks = ks_two_sample(restricted, direct);
    report.ks_statistic = ks.statistic;
    report.p_value = ks.p_value;
    report.pass = ks.p_value >= cfg.alpha;
    return report;
}

nlohmann::json to_json(ProjectivityReport const& r)
{
    return {{"report", "projectivity"},
            {"seed", r.seed},
            {"spec", r.spec},
            {"nu", r.nu},
            {"replicates", r.replicates},
            {"mean_restricted", r.mean_restricted},
            {"mean_direct", r.mean_direct},
            {"ks_statistic", r.ks_statistic},
            {"p_value", r.p_value},
            {"alpha", r.alpha},
            {"pass", r.pass}};
}

std::string to_csv(ProjectivityReport const& r)
{
    std::ostringstream os;
    os << "nu,replicates,mean_restricted,mean_direct,ks_statistic,p_value,verdict\n";
    os << format_double(r.nu) << ',' << r.replicates << ','
       << format_double(r.mean_restricted) << ',' << format_double(r.mean_direct)
       << ',' << format_double(r.ks_statistic) << ',' << format_double(r.p_value)
       << ',' << (r.pass ? "pass" : "fail") << '\n';
    return os.str();
}

//---------------------------------------------------------------------------//
// planted vertex
//---------------------------------------------------------------------------//
PlantedReport planted_degree_test(Graphex const& g, PlantedConfig const& cfg)
{
    if (!(cfg.nu > 0 && std::isfinite(cfg.nu)))
        throw ConfigError("planted: nu must be positive and finite");
    if (cfg.replicates < 1)
        throw ConfigError("planted: at least one replicate is required");
    PlantedReport report;
    report.seed = cfg.seed;
    report.spec = to_json(g.spec());
    report.nu = cfg.nu;
    report.replicates = cfg.replicates;
    report.alpha = cfg.alpha;
    report.pass = true;
    for (std::size_t p = 0; p < cfg.latent.size(); ++p)
    {
        double const lambda = cfg.latent[p];
        std::vector<std::uint64_t> degree(cfg.replicates, 0);
        std::vector<char> loop(cfg.replicates, 0);
        parallel_for(cfg.replicates, cfg.threads, [&](std::uint64_t r) {
            SamplerConfig sc = replicate_config(
                cfg.nu, cfg.seed, replicate_stream(kPlantedArm, p, r), cfg.epsilon);
            sc.planted = {lambda};
            SampledGraph const graph = sample_keg(g, sc);
            auto const v = graph.planted.at(0);
            if (!v)
                return;
            for (Edge const& e : graph.edges)
            {
                if (e.provenance != Provenance::W || (e.u != *v && e.v != *v))
                    continue;
                if (e.u == e.v)
                    loop[r] = 1;
                else
                    ++degree[r];
            }
        });
        PlantedRow row;
        row.latent = lambda;
        row.poisson_mean = cfg.nu * marginal(g, lambda);
        std::vector<double> as_double(degree.begin(), degree.end());
        row.mean_degree = summarize(as_double).mean;
        TestResult const chi = chi_square_poisson(degree, row.poisson_mean);
        row.chi_square = chi.statistic;
        row.df = chi.df;
        row.p_value = chi.p_value;
        row.self_loops = static_cast<std::uint64_t>(std::count(loop.begin(), loop.end(), 1));
        row.self_loop_probability = g.diagonal(lambda);
        row.pass = chi.p_value >= cfg.alpha;
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

nlohmann::json to_json(PlantedReport const& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& row : r.rows)
    {
        rows.push_back({{"latent", row.latent},
                        {"poisson_mean", row.poisson_mean},
                        {"mean_degree", row.mean_degree},
                        {"chi_square", row.chi_square},
                        {"df", row.df},
                        {"p_value", row.p_value},
                        {"self_loops", row.self_loops},
                        {"self_loop_probability", row.self_loop_probability},
                        {"verdict", row.pass ? "pass" : "fail"}});
    }
    return {{"report", "planted"},
            {"seed", r.seed},
            {"spec", r.spec},
            {"nu", r.nu},
            {"replicates", r.replicates},
            {"alpha", r.alpha},
            {"rows", rows},
            {"pass", r.pass}};
}

std::string to_csv(PlantedReport const& r)
{
    std::ostringstream os;
    os << "latent,poisson_mean,mean_degree,chi_square,df,p_value,self_loops,verdict\n";
    for (auto const& row : r.rows)
    {
        os << format_double(row.latent) << ',' << format_double(row.poisson_mean)
           << ',' << format_double(row.mean_degree) << ','
           << format_double(row.chi_square) << ',' << format_double(row.df) << ','
           << format_double(row.p_value) << ',' << row.self_loops << ','
           << (row.pass ? "pass" : "fail") << '\n';
    }
    return os.str();
}

}  // namespace keg
