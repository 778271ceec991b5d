#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "keg/graphex.hpp"

namespace keg {

//! A theory value with its itemized components.
struct TheoryResult
{
    std::string stat;
    double nu = 0;
    std::optional<int> k;
    double value = 0;
    std::map<std::string, double> components;
    double error_estimate = 0;
};

nlohmann::json to_json(TheoryResult const& r);

/*!
 * Expected edge count of the nu-truncation.
 *
 * Components: "W" = nu^2 ||W||_1 / 2, "diagonal" = nu * int W(x,x),
 * "star" = nu^2 int S, "isolated" = nu^2 I. Throws InfiniteExpectation when
 * any of them diverges.
 */
TheoryResult expected_edges(Graphex const& g, double nu, double rel_tol = 1e-8);

/*!
 * Expected number of visible vertices.
 *
 * Components: "W" (vertices with a W edge or self loop), "star_centers"
 * (vertices whose only edges are star leaves), "star_leaves", "isolated".
 */
TheoryResult expected_vertices(Graphex const& g, double nu, double rel_tol = 1e-8);

/*!
 * Expected number of vertices of degree k >= 1.
 *
 * A latent point at x has degree Poisson(nu (mu_W(x) + S(x))) plus 2 for a
 * self loop; star leaves and isolated-edge endpoints have degree 1.
 */
TheoryResult
expected_degree_k(Graphex const& g, double nu, int k, double rel_tol = 1e-8);

/*!
 * int P(Poi(nu mu_W) > k) dx / int (1 - exp(-nu mu_W)) dx.
 *
 * Throws DegenerateError when the denominator is below 1e-300.
 */
TheoryResult degree_ccdf(Graphex const& g, double nu, int k, double rel_tol = 1e-8);

enum class Density
{
    dense,
    sparse,
    unknown,
};

std::string to_string(Density d);

//! Dense iff the support is declared bounded; sparse if ||W||_1 is finite.
Density classify_density(Graphex const& g);

}  // namespace keg
