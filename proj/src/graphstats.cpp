#include "keg/graphstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace keg {

namespace {

class DisjointSets
{
  public:
    explicit DisjointSets(std::uint64_t n) : parent_(n), size_(n, 1)
    {
        std::iota(parent_.begin(), parent_.end(), std::uint64_t{0});
    }

    std::uint64_t find(std::uint64_t a)
    {
        while (parent_[a] != a)
        {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    void unite(std::uint64_t a, std::uint64_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

    std::uint64_t size_of_root(std::uint64_t root) const { return size_[root]; }

  private:
    std::vector<std::uint64_t> parent_;
    std::vector<std::uint64_t> size_;
};

}  // namespace

Counts counts(SampledGraph const& graph)
{
    return {graph.num_vertices(), graph.num_edges()};
}

std::vector<std::uint64_t> degrees(SampledGraph const& graph)
{
    std::vector<std::uint64_t> deg(graph.num_vertices(), 0);
    for (Edge const& e : graph.edges)
    {
        ++deg[e.u];
        ++deg[e.v];
    }
    return deg;
}

DegreeHistogram degree_histogram(SampledGraph const& graph)
{
    DegreeHistogram h;
    for (std::uint64_t d : degrees(graph))
    {
        if (d == 0)
            continue;
        ++h.counts[d];
        ++h.total_vertices;
        h.max_degree = std::max(h.max_degree, d);
    }
    return h;
}

std::vector<std::uint64_t> component_sizes(SampledGraph const& graph)
{
    std::uint64_t const n = graph.num_vertices();
    DisjointSets sets(n);
    for (Edge const& e : graph.edges)
        sets.unite(e.u, e.v);
    std::vector<std::uint64_t> sizes;
    for (std::uint64_t i = 0; i < n; ++i)
    {
        if (sets.find(i) == i)
            sizes.push_back(sets.size_of_root(i));
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

ComponentStats largest_component(SampledGraph const& graph)
{
    auto const sizes = component_sizes(graph);
    if (sizes.empty())
        return {};
    return {sizes.front(),
            static_cast<double>(sizes.front())
                / static_cast<double>(graph.num_vertices())};
}

double sparsity_ratio(SampledGraph const& graph)
{
    if (graph.num_vertices() == 0)
        throw DegenerateError("sparsity ratio of the empty graph is undefined");
    return std::sqrt(static_cast<double>(graph.num_edges()))
           / static_cast<double>(graph.num_vertices());
}

nlohmann::json to_json(DegreeHistogram const& h)
{
    nlohmann::json counts = nlohmann::json::object();
    for (auto const& [d, c] : h.counts)
        counts[std::to_string(d)] = c;
    return {{"counts", counts},
            {"total_vertices", h.total_vertices},
            {"max_degree", h.max_degree}};
}

nlohmann::json to_json(ComponentStats const& c)
{
    return {{"size", c.size}, {"fraction", c.fraction}};
}

}  // namespace keg
