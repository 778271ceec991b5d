// Command-line front end: sampling, theory queries and validation experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "keg/graphex.hpp"
#include "keg/graphstats.hpp"
#include "keg/harness.hpp"
#include "keg/io.hpp"
#include "keg/sampler.hpp"
#include "keg/theory.hpp"

namespace {

constexpr char const* kVersion = "1.0.0";

enum ExitCode
{
    kPass = 0,
    kFail = 1,
    kConfig = 2,
};

//! Inline JSON, a file path, or a bare family name without parameters.
keg::Graphex load_graphex(std::string const& arg)
{
    auto const first = arg.find_first_not_of(" \t\r\n");
    bool const inline_json = first != std::string::npos && arg[first] == '{';
    if (!inline_json && !std::filesystem::exists(arg))
    {
        keg::GraphexSpec spec;
        spec.family = keg::family_from_string(arg);
        return keg::build(spec);
    }
    return keg::build(keg::spec_from_json(keg::load_json_argument(arg)));
}

void emit(std::string const& path, std::string const& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        keg::write_text_file(path, text);
}

struct Common
{
    std::string graphex;
    std::uint64_t seed = 0;
    double eps = 1e-3;
    double rel_tol = 1e-8;
    unsigned threads = 1;
    std::string out;
    std::string csv;
};

void add_graphex(CLI::App* cmd, Common& c, bool required = true)
{
    auto* opt = cmd->add_option("--graphex", c.graphex,
                                "Graphex spec: JSON file, inline JSON, or family name");
    if (required)
        opt->required();
}

void add_sampling(CLI::App* cmd, Common& c)
{
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--eps", c.eps, "Truncation budget (expected missed edges)")
        ->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
}

void add_report(CLI::App* cmd, Common& c)
{
    cmd->add_option("--out", c.out, "JSON report path (default: stdout)");
    cmd->add_option("--csv", c.csv, "CSV report path");
}

int verdict(bool pass)
{
    return pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sample graphex-generated exchangeable graphs and check them against theory", "kegs"};
    app.set_version_flag("--version", std::string("kegs ") + kVersion);
    app.require_subcommand(1);
    Common c;

    // sample
    auto* sample = app.add_subcommand("sample", "Sample a nu-truncated graph");
    double nu = 1;
    bool retain_latent = false;
    bool naive = false;
    std::optional<double> theta_max;
    add_graphex(sample, c);
    sample->add_option("--nu", nu, "Truncation size")->required();
    add_sampling(sample, c);
    sample->add_flag("--retain-latent", retain_latent,
                     "Also write latent values to <out>.latent.csv");
    sample->add_flag("--naive", naive, "Disable the envelope sampler");
    sample->add_option("--theta-max", theta_max, "Override the latent cutoff");
    sample->add_option("--out", c.out,
                       "Edge CSV path; metadata goes to <out>.meta.json (default: stdout)");

    // expect
    auto* expect = app.add_subcommand("expect", "Evaluate a theory quantity");
    std::string stat = "edges";
    int k = 1;
    add_graphex(expect, c);
    expect->add_option("--stat", stat, "edges|vertices|degk|ccdf|density")
        ->check(CLI::IsMember({"edges", "vertices", "degk", "ccdf", "density"}))
        ->capture_default_str();
    expect->add_option("--nu", nu, "Truncation size")->capture_default_str();
    expect->add_option("--k", k, "Degree for degk and ccdf")->capture_default_str();
    expect->add_option("--rel-tol", c.rel_tol, "Quadrature tolerance")
        ->capture_default_str();
    add_report(expect, c);

    // validate
    auto* validate = app.add_subcommand("validate", "Monte Carlo means against theory");
    keg::ValidateConfig vc;
    add_graphex(validate, c);
    validate->add_option("--nu-grid", vc.nu_grid, "Comma-separated nu values")
        ->delimiter(',')
        ->required();
    validate->add_option("--replicates", vc.replicates, "Replicates per nu")
        ->capture_default_str();
    validate->add_option("--stats", vc.stats,
                         "edges,vertices,degk,star_edges,isolated_edges")
        ->delimiter(',')
        ->capture_default_str();
    validate->add_option("--k", vc.degrees, "Degrees for degk")
        ->delimiter(',')
        ->capture_default_str();
    validate->add_option("--z-crit", vc.z_crit, "Pass threshold on |z|")
        ->capture_default_str();
    validate->add_option("--rel-tol", c.rel_tol, "Quadrature tolerance")
        ->capture_default_str();
    add_sampling(validate, c);
    add_report(validate, c);

    // degdist
    auto* degdist = app.add_subcommand("degdist", "Degree probability along a nu grid");
    keg::DegdistConfig dc;
    std::optional<double> beta;
    std::optional<double> limit;
    std::string event = "greater";
    add_graphex(degdist, c);
    degdist->add_option("--nu-grid", dc.nu_grid, "Comma-separated nu values")
        ->delimiter(',')
        ->required();
    degdist->add_option("--k", dc.k, "Fixed degree threshold")->capture_default_str();
    degdist->add_option("--beta", beta, "Use k = floor(nu^beta)");
    degdist->add_option("--event", event, "greater (D>k), at_most (D<=k), equal (D=k)")
        ->check(CLI::IsMember({"greater", "at_most", "equal"}))
        ->capture_default_str();
    degdist->add_option("--limit", limit, "Limiting probability");
    degdist->add_option("--tolerance", dc.tolerance, "Allowed final gap")
        ->capture_default_str();
    degdist->add_option("--replicates", dc.replicates, "Graphs per nu")
        ->capture_default_str();
    add_sampling(degdist, c);
    add_report(degdist, c);

    // connectivity
    auto* connectivity
        = app.add_subcommand("connectivity", "Largest-component fraction along a nu grid");
    keg::ConnectivityConfig cc;
    std::string f_expr;
    std::optional<double> support;
    add_graphex(connectivity, c, false);
    connectivity->add_option("--f", f_expr, "Separable factor f(x)");
    connectivity->add_option("--support", support, "Support bound for --f");
    connectivity->add_option("--nu-grid", cc.nu_grid, "Comma-separated nu values")
        ->delimiter(',')
        ->required();
    connectivity->add_option("--replicates", cc.replicates, "Graphs per nu")
        ->capture_default_str();
    connectivity->add_option("--threshold", cc.threshold,
                             "Required fraction at the largest nu")
        ->capture_default_str();
    add_sampling(connectivity, c);
    add_report(connectivity, c);

    // projectivity
    auto* projectivity
        = app.add_subcommand("projectivity", "KS test of restrict(sample(2nu), nu) vs sample(nu)");
    keg::ProjectivityConfig pc;
    add_graphex(projectivity, c);
    projectivity->add_option("--nu", pc.nu, "Truncation size")->capture_default_str();
    projectivity->add_option("--replicates", pc.replicates, "Draws per arm")
        ->capture_default_str();
    projectivity->add_option("--alpha", pc.alpha, "Significance level")
        ->capture_default_str();
    add_sampling(projectivity, c);
    add_report(projectivity, c);

    // planted
    auto* planted = app.add_subcommand("planted", "Degree law of a planted latent point");
    keg::PlantedConfig plc;
    add_graphex(planted, c);
    planted->add_option("--nu", plc.nu, "Truncation size")->capture_default_str();
    planted->add_option("--latent", plc.latent, "Comma-separated latent values")
        ->delimiter(',')
        ->capture_default_str();
    planted->add_option("--replicates", plc.replicates, "Replicates per latent value")
        ->capture_default_str();
    planted->add_option("--alpha", plc.alpha, "Significance level")
        ->capture_default_str();
    add_sampling(planted, c);
    add_report(planted, c);

    // check
    auto* check = app.add_subcommand("check", "Local-finiteness conditions");
    keg::ProbeConfig probe;
    add_graphex(check, c);
    check->add_option("--probe-max", probe.probe_max, "Largest probe abscissa")
        ->capture_default_str();
    check->add_option("--probe-points", probe.probe_points, "Probe grid size")
        ->capture_default_str();
    add_report(check, c);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const rc = app.exit(e);
        return rc == 0 ? kPass : kConfig;
    }

    try
    {
        if (sample->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            keg::SamplerConfig sc;
            sc.nu = nu;
            sc.seed = c.seed;
            sc.epsilon = c.eps;
            sc.retain_latent = retain_latent;
            sc.separable_fast_path = !naive;
            sc.theta_max = theta_max;
            keg::SampledGraph const graph = keg::sample_keg(g, sc);
            std::ostringstream edges;
            keg::write_edges_csv(edges, graph);
            emit(c.out, edges.str());
            std::string const meta = keg::graph_metadata(graph).dump(2) + "\n";
            if (c.out.empty() || c.out == "-")
            {
                std::cerr << meta;
            }
            else
            {
                keg::write_text_file(c.out + ".meta.json", meta);
                if (retain_latent)
                {
                    std::ostringstream latent;
                    keg::write_latent_csv(latent, graph);
                    keg::write_text_file(c.out + ".latent.csv", latent.str());
                }
            }
            return kPass;
        }
        if (expect->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            nlohmann::json doc;
            if (stat == "density")
            {
                doc = {{"query", {{"stat", "density"}}},
                       {"value", keg::to_string(keg::classify_density(g))}};
            }
            else
            {
                keg::TheoryResult r;
                if (stat == "edges")
                    r = keg::expected_edges(g, nu, c.rel_tol);
                else if (stat == "vertices")
                    r = keg::expected_vertices(g, nu, c.rel_tol);
                else if (stat == "degk")
                    r = keg::expected_degree_k(g, nu, k, c.rel_tol);
                else
                {
                    if (g.spec().family == keg::Family::custom)
                    {
                        std::cerr << "warning: regularity of mu_W is not verified "
                                     "for custom kernels; the limit may not apply\n";
                    }
                    r = keg::degree_ccdf(g, nu, k, c.rel_tol);
                }
                doc = keg::to_json(r);
            }
            emit(c.out, doc.dump(2) + "\n");
            return kPass;
        }
        if (validate->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            vc.seed = c.seed;
            vc.epsilon = c.eps;
            vc.threads = c.threads;
            vc.rel_tol = c.rel_tol;
            auto const r = keg::validate_expectations(g, vc);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            if (!c.csv.empty())
                keg::write_text_file(c.csv, keg::to_csv(r));
            return verdict(r.all_pass());
        }
        if (degdist->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            dc.beta = beta;
            dc.limit = limit;
            dc.event = event == "greater"   ? keg::DegreeEvent::greater
                       : event == "at_most" ? keg::DegreeEvent::at_most
                                            : keg::DegreeEvent::equal;
            dc.seed = c.seed;
            dc.epsilon = c.eps;
            dc.threads = c.threads;
            auto const r = keg::degdist_experiment(g, dc);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            if (!c.csv.empty())
                keg::write_text_file(c.csv, keg::to_csv(r));
            return verdict(r.pass);
        }
        if (connectivity->parsed())
        {
            if (f_expr.empty() == c.graphex.empty())
                throw keg::ConfigError("connectivity: give exactly one of --f and --graphex");
            keg::Graphex const g = f_expr.empty()
                                       ? load_graphex(c.graphex)
                                       : keg::separable_from_expression(f_expr, support);
            cc.seed = c.seed;
            cc.epsilon = c.eps;
            cc.threads = c.threads;
            auto const r = keg::connectivity_experiment(g, cc);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            if (!c.csv.empty())
                keg::write_text_file(c.csv, keg::to_csv(r));
            return verdict(r.pass);
        }
        if (projectivity->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            pc.seed = c.seed;
            pc.epsilon = c.eps;
            pc.threads = c.threads;
            auto const r = keg::projectivity_test(g, pc);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            if (!c.csv.empty())
                keg::write_text_file(c.csv, keg::to_csv(r));
            return verdict(r.pass);
        }
        if (planted->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            plc.seed = c.seed;
            plc.epsilon = c.eps;
            plc.threads = c.threads;
            auto const r = keg::planted_degree_test(g, plc);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            if (!c.csv.empty())
                keg::write_text_file(c.csv, keg::to_csv(r));
            return verdict(r.pass);
        }
        if (check->parsed())
        {
            keg::Graphex const g = load_graphex(c.graphex);
            auto const r = keg::check_local_finiteness(g, probe);
            emit(c.out, keg::to_json(r).dump(2) + "\n");
            return verdict(r.all_hold());
        }
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kConfig;
}
