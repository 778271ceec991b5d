#include <cmath>
#include <queue>
#include <vector>

#include "doctest.h"
#include "keg/graphstats.hpp"
#include "keg/rng.hpp"

using namespace keg;

namespace {

SampledGraph make_graph(std::uint64_t n,
                        std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs)
{
    SampledGraph g;
    g.nu = 1;
    for (std::uint64_t i = 0; i < n; ++i)
        g.labels.push_back(static_cast<double>(i) / static_cast<double>(n + 1));
    for (auto [u, v] : pairs)
        g.edges.push_back({std::min(u, v), std::max(u, v), Provenance::W});
    std::sort(g.edges.begin(), g.edges.end(), [](Edge const& a, Edge const& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return g;
}

std::uint64_t bfs_largest(SampledGraph const& g)
{
    std::vector<std::vector<std::uint64_t>> adj(g.num_vertices());
    for (auto const& e : g.edges)
    {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<bool> seen(g.num_vertices(), false);
    std::uint64_t best = 0;
    for (std::uint64_t s = 0; s < g.num_vertices(); ++s)
    {
        if (seen[s])
            continue;
        std::uint64_t size = 0;
        std::queue<std::uint64_t> q;
        q.push(s);
        seen[s] = true;
        while (!q.empty())
        {
            auto const v = q.front();
            q.pop();
            ++size;
            for (auto w : adj[v])
            {
                if (!seen[w])
                {
                    seen[w] = true;
                    q.push(w);
                }
            }
        }
        best = std::max(best, size);
    }
    return best;
}

}  // namespace

TEST_CASE("counts")
{
    SampledGraph const empty;
    CHECK(counts(empty).vertices == 0);
    CHECK(counts(empty).edges == 0);
    SampledGraph const tri = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(counts(tri).vertices == 3);
    CHECK(counts(tri).edges == 3);
    SampledGraph const loop = make_graph(1, {{0, 0}});
    CHECK(counts(loop).vertices == 1);
    CHECK(counts(loop).edges == 1);
    CHECK(degrees(loop) == std::vector<std::uint64_t>{2});
}

TEST_CASE("degree histograms")
{
    auto tri = degree_histogram(make_graph(3, {{0, 1}, {1, 2}, {0, 2}}));
    CHECK(tri.counts == std::map<std::uint64_t, std::uint64_t>{{2, 3}});
    auto star = degree_histogram(make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}));
    CHECK(star.counts == std::map<std::uint64_t, std::uint64_t>{{1, 4}, {4, 1}});
    CHECK(star.max_degree == 4);
    CHECK(star.total_vertices == 5);
    auto path = degree_histogram(make_graph(3, {{0, 1}, {1, 2}}));
    CHECK(path.counts == std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 1}});
}

TEST_CASE("largest component")
{
    auto a = largest_component(make_graph(5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}}));
    CHECK(a.size == 3);
    CHECK(a.fraction == doctest::Approx(0.6));
    auto b = largest_component(SampledGraph{});
    CHECK(b.size == 0);
    CHECK(b.fraction == 0);
    auto c = largest_component(make_graph(4, {{0, 1}, {2, 3}}));
    CHECK(c.size == 2);
    CHECK(c.fraction == 0.5);
}

TEST_CASE("sparsity ratio")
{
    std::vector<std::pair<std::uint64_t, std::uint64_t>> k10;
    for (std::uint64_t i = 0; i < 10; ++i)
        for (std::uint64_t j = i + 1; j < 10; ++j)
            k10.emplace_back(i, j);
    CHECK(sparsity_ratio(make_graph(10, k10)) == doctest::Approx(std::sqrt(45.0) / 10));
    CHECK(sparsity_ratio(make_graph(2, {{0, 1}})) == 0.5);
    CHECK_THROWS_AS(sparsity_ratio(SampledGraph{}), DegenerateError);
}

TEST_CASE("random graphs: handshake and BFS oracle")
{
    CounterRng rng(77, 0);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto const n = 2 + static_cast<std::uint64_t>(rng.uniform() * 999);
        double const p = 2.5 * rng.uniform() / static_cast<double>(n);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
        std::vector<bool> touched(n, false);
        for (std::uint64_t i = 0; i < n; ++i)
        {
            for (std::uint64_t j = i; j < n; ++j)
            {
                double const q = i == j ? 0.01 : p;
                if (rng.uniform() < q)
                {
                    pairs.emplace_back(i, j);
                    touched[i] = touched[j] = true;
                }
            }
        }
        // Keep only vertices that carry an edge
        std::vector<std::uint64_t> index(n);
        std::uint64_t m = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            index[i] = touched[i] ? m++ : 0;
        for (auto& [u, v] : pairs)
        {
            u = index[u];
            v = index[v];
        }
        SampledGraph const g = make_graph(m, pairs);
        DegreeHistogram const h = degree_histogram(g);
        std::uint64_t sum = 0;
        std::uint64_t total = 0;
        for (auto [k, count] : h.counts)
        {
            CHECK(k > 0);
            sum += k * count;
            total += count;
        }
        CHECK(sum == 2 * g.num_edges());
        CHECK(total == h.total_vertices);
        ComponentStats const c = largest_component(g);
        CHECK(c.size == bfs_largest(g));
        CHECK(c.size <= g.num_vertices());
        auto const sizes = component_sizes(g);
        std::uint64_t covered = 0;
        for (auto s : sizes)
            covered += s;
        CHECK(covered == g.num_vertices());
        CHECK((sizes.size() == 1) == (c.size == g.num_vertices() && m > 0));
    }
}
