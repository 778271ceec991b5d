#pragma once

#include <cstdint>
#include <map>

#include <nlohmann/json.hpp>

#include "keg/sampler.hpp"

namespace keg {

struct Counts
{
    std::uint64_t vertices = 0;
    std::uint64_t edges = 0;
};

//! A self loop counts as one edge.
Counts counts(SampledGraph const& graph);

struct DegreeHistogram
{
    //! degree -> number of vertices; degree 0 never appears
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total_vertices = 0;
    std::uint64_t max_degree = 0;

    std::uint64_t at(std::uint64_t degree) const
    {
        auto const it = counts.find(degree);
        return it == counts.end() ? 0 : it->second;
    }
};

//! Per-vertex degrees; a self loop adds 2.
std::vector<std::uint64_t> degrees(SampledGraph const& graph);

DegreeHistogram degree_histogram(SampledGraph const& graph);

struct ComponentStats
{
    std::uint64_t size = 0;
    double fraction = 0;
};

//! Largest connected component; fraction is 0 for the empty graph.
ComponentStats largest_component(SampledGraph const& graph);

//! Sizes of all connected components, largest first.
std::vector<std::uint64_t> component_sizes(SampledGraph const& graph);

//! sqrt(e) / v; throws DegenerateError on the empty graph.
double sparsity_ratio(SampledGraph const& graph);

nlohmann::json to_json(DegreeHistogram const& h);
nlohmann::json to_json(ComponentStats const& c);

}  // namespace keg
