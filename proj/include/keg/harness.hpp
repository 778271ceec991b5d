#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keg/graphex.hpp"
#include "keg/sampler.hpp"

namespace keg {

//! Run body(i) for i in [0, n) on up to \c threads workers.
void parallel_for(std::uint64_t n,
                  unsigned threads,
                  std::function<void(std::uint64_t)> const& body);

//! Replicate stream for experiment arm \c arm, grid point \c point, replicate r.
std::uint64_t replicate_stream(std::uint64_t arm, std::uint64_t point, std::uint64_t r);

//---------------------------------------------------------------------------//
struct ValidationRow
{
    std::string stat;
    double nu = 0;
    std::optional<int> k;
    std::uint64_t replicates = 0;
    double mean = 0;
    double sd = 0;
    double se = 0;
    double theory = 0;
    double z = 0;
    bool pass = false;
    //! Theory or sampling failure for this row; the row then fails.
    std::string error;
};

struct ValidationReport
{
    std::uint64_t seed = 0;
    double z_crit = 4;
    nlohmann::json spec;
    std::vector<ValidationRow> rows;

    bool all_pass() const;
};

struct ValidateConfig
{
    std::vector<double> nu_grid;
    std::uint64_t replicates = 500;
    std::uint64_t seed = 0;
    //! Any of edges, vertices, degk, star_edges, isolated_edges.
    std::vector<std::string> stats{"edges", "vertices", "degk"};
    std::vector<int> degrees{1, 2};
    double z_crit = 4;
    double epsilon = 1e-3;
    double rel_tol = 1e-8;
    unsigned threads = 1;
};

/*!
 * Compare replicate means with theory. A row passes iff |z| <= z_crit,
 * z = (mean - theory) / se. When every replicate gives the same value the
 * standard error is taken as sqrt(max(|theory|, |mean|) / R), the scale of
 * a count with that mean; if that is zero too, z = 0 iff mean equals theory.
 */
ValidationReport validate_expectations(Graphex const& g, ValidateConfig const& cfg);

nlohmann::json to_json(ValidationReport const& r);
std::string to_csv(ValidationReport const& r);

//---------------------------------------------------------------------------//
enum class DegreeEvent
{
    greater,  //!< D > k
    at_most,  //!< D <= k
    equal,    //!< D == k
};

struct DegdistConfig
{
    std::vector<double> nu_grid;
    //! Fixed k, or k = floor(nu^beta) when beta is set.
    int k = 1;
    std::optional<double> beta;
    DegreeEvent event = DegreeEvent::greater;
    std::uint64_t replicates = 200;
    std::uint64_t seed = 0;
    //! Limiting probability; the gap to it must shrink along the grid.
    std::optional<double> limit;
    //! Largest allowed gap at the last grid point.
    double tolerance = 0.05;
    double epsilon = 1e-3;
    unsigned threads = 1;
};

struct DegdistRow
{
    double nu = 0;
    int k = 0;
    std::uint64_t replicates_used = 0;
    std::uint64_t excluded = 0;
    double empirical = 0;
    double empirical_se = 0;
    double theory = 0;
    double gap = 0;  //!< to the limit if given, else to theory
};

struct DegdistReport
{
    std::uint64_t seed = 0;
    nlohmann::json spec;
    std::string event;
    std::optional<double> limit;
    double tolerance = 0;
    std::vector<DegdistRow> rows;
    bool trend_ok = false;
    bool final_ok = false;
    bool pass = false;
};

/*!
 * Empirical degree probability averaged over graphs against the ratio of
 * expectations. Graphs without vertices are excluded; if every graph is
 * empty the experiment is rejected with DegenerateError.
 */
DegdistReport degdist_experiment(Graphex const& g, DegdistConfig const& cfg);

nlohmann::json to_json(DegdistReport const& r);
std::string to_csv(DegdistReport const& r);

//---------------------------------------------------------------------------//
struct ConnectivityConfig
{
    std::vector<double> nu_grid;
    std::uint64_t replicates = 50;
    std::uint64_t seed = 0;
    double threshold = 0.95;
    double epsilon = 1e-3;
    unsigned threads = 1;
};

struct ConnectivityRow
{
    double nu = 0;
    std::uint64_t replicates = 0;
    std::uint64_t empty = 0;
    double mean_fraction = 0;
    double se = 0;
    double mean_vertices = 0;
};

struct ConnectivityReport
{
    std::uint64_t seed = 0;
    nlohmann::json spec;
    double threshold = 0;
    std::vector<ConnectivityRow> rows;
    bool monotone = false;
    bool threshold_ok = false;
    bool pass = false;
};

//! Graphex with W = f(x) f(y) off the diagonal and no self edges.
Graphex separable_from_expression(std::string const& f,
                                  std::optional<double> support = std::nullopt);

/*!
 * Mean largest-component fraction per nu; passes if it is nondecreasing
 * along the grid and at least the threshold at the last point. Rejects
 * (DegenerateError) a graphex whose kernel integrates to zero.
 */
ConnectivityReport connectivity_experiment(Graphex const& g,
                                           ConnectivityConfig const& cfg);

nlohmann::json to_json(ConnectivityReport const& r);
std::string to_csv(ConnectivityReport const& r);

//---------------------------------------------------------------------------//
struct ProjectivityConfig
{
    double nu = 10;
    std::uint64_t replicates = 2000;
    std::uint64_t seed = 0;
    double alpha = 1e-3;
    double epsilon = 1e-3;
    unsigned threads = 1;
};

struct ProjectivityReport
{
    std::uint64_t seed = 0;
    nlohmann::json spec;
    double nu = 0;
    std::uint64_t replicates = 0;
    double mean_restricted = 0;
    double mean_direct = 0;
    double ks_statistic = 0;
    double p_value = 1;
    double alpha = 0;
    bool pass = false;
};

//! Edge counts of restrict(sample(2 nu), nu) against sample(nu), KS test.
ProjectivityReport projectivity_test(Graphex const& g, ProjectivityConfig const& cfg);

nlohmann::json to_json(ProjectivityReport const& r);
std::string to_csv(ProjectivityReport const& r);

//---------------------------------------------------------------------------//
struct PlantedConfig
{
    double nu = 20;
    std::vector<double> latent{0.0};
    std::uint64_t replicates = 10'000;
    std::uint64_t seed = 0;
    double alpha = 1e-3;
    double epsilon = 1e-3;
    unsigned threads = 1;
};

struct PlantedRow
{
    double latent = 0;
    double poisson_mean = 0;
    double mean_degree = 0;
    double chi_square = 0;
    double df = 0;
    double p_value = 1;
    std::uint64_t self_loops = 0;
    double self_loop_probability = 0;
    bool pass = false;
};

struct PlantedReport
{
    std::uint64_t seed = 0;
    nlohmann::json spec;
    double nu = 0;
    std::uint64_t replicates = 0;
    double alpha = 0;
    std::vector<PlantedRow> rows;
    bool pass = false;
};

/*!
 * W-degree of a point planted at a fixed latent value against
 * Poisson(nu mu_W(lambda)), chi-square with bins pooled to expected count 5.
 */
PlantedReport planted_degree_test(Graphex const& g, PlantedConfig const& cfg);

nlohmann::json to_json(PlantedReport const& r);
std::string to_csv(PlantedReport const& r);

}  // namespace keg
