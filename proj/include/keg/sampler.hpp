#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "keg/graphex.hpp"

namespace keg {

enum class Provenance : std::uint8_t
{
    W,
    star,
    isolated,
};

std::string to_string(Provenance p);

//! Undirected edge between vertex indices, u <= v; u == v is a self loop.
struct Edge
{
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    Provenance provenance = Provenance::W;

    friend bool operator==(Edge const&, Edge const&) = default;
};

struct SamplerConfig
{
    double nu = 1;
    std::uint64_t seed = 0;
    //! Replicate stream; distinct streams give independent graphs.
    std::uint64_t stream = 0;
    //! Budget for the expected number of edges lost to truncation.
    double epsilon = 1e-3;
    std::optional<double> theta_max;
    bool retain_latent = false;
    //! Use the envelope sampler when the graphex provides one.
    bool separable_fast_path = true;
    //! Limit on the expected number of latent points generated.
    double max_points = 5e7;
    //! Limit on candidate pairs in the pairwise sampler.
    double max_pairs = 5e8;
    //! Latent values of extra points added to the process.
    std::vector<double> planted;
};

struct SampledGraph
{
    double nu = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double theta_max = 0;
    double epsilon = 0;
    //! Upper end of the explicitly enumerated latent range (envelope sampler).
    std::optional<double> core_boundary;

    std::vector<double> labels;
    //! Latent value per vertex, filled only when requested; none for star
    //! leaves and isolated-edge endpoints.
    std::vector<std::optional<double>> latent;
    //! Sorted by (u, v).
    std::vector<Edge> edges;
    //! Vertex index of each planted point, none if it has no edges.
    std::vector<std::optional<std::uint64_t>> planted;

    std::uint64_t num_vertices() const noexcept { return labels.size(); }
    std::uint64_t num_edges() const noexcept { return edges.size(); }
};

/*!
 * Smallest x with nu^2 int_x^inf mu_W + nu^2 int_x^inf S <= eps.
 *
 * Equals the support bound for compactly supported W with S = 0.
 */
double choose_theta_max(Graphex const& g, double nu, double eps);

/*!
 * Sample the nu-truncation of the graph generated by g.
 *
 * Latent points form a rate-nu Poisson process on [0, theta_max]; each
 * carries a label uniform on [0, nu]. With an envelope W <= h(x) h(y) the
 * points below a core boundary are enumerated and joined by skip sampling,
 * and points above it are found by exploring outward from the core, so the
 * cost scales with the number of edges. Points that cannot reach the core
 * and the truncated tail together carry at most 2 eps expected edges.
 */
SampledGraph sample_keg(Graphex const& g, SamplerConfig const& cfg);

//! Keep the edges with both labels <= nu_prime and drop emptied vertices.
SampledGraph restrict(SampledGraph const& graph, double nu_prime);

}  // namespace keg
