#include "keg/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "keg/rng.hpp"

namespace keg {

namespace {

// Stream tags
enum Tag : std::uint64_t
{
    kCountTag = 1,
    kLatentTag,
    kPairTag,
    kLabelTag,
    kStarTag,
    kLeafLabelTag,
    kIsolatedTag,
    kTailTag,
    kSelfTag,
};

constexpr std::uint64_t kNoSkip = std::numeric_limits<std::uint64_t>::max();

//! Smallest x in [lo, hi] with f(x) <= target, for nonincreasing f.
template<class F>
double bisect_down(F&& f, double lo, double hi, double target)
{
    if (f(lo) <= target)
        return lo;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i)
    {
        double const mid = 0.5 * (lo + hi);
        (f(mid) <= target ? hi : lo) = mid;
    }
    return hi;
}

//! Smallest x >= lo with f(x) <= target, growing the bracket geometrically.
template<class F>
double search_up(F&& f, double lo, double target)
{
    if (f(lo) <= target)
        return lo;
    double hi = std::max(1.0, 2 * lo);
    while (f(hi) > target)
    {
        if (hi > 1e300)
            throw InfiniteExpectation("truncation tail does not vanish");
        hi *= 2;
    }
    return bisect_down(f, lo, hi, target);
}

//! Latent points and their edges, before vertex indices are assigned.
struct Draft
{
    std::vector<double> theta;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> w_edges;
    std::vector<std::uint64_t> self_loops;
    //! (point, number of star leaves)
    std::vector<std::pair<std::uint64_t, std::uint64_t>> stars;
    std::uint64_t isolated_edges = 0;
    std::vector<std::uint64_t> planted_points;

    std::uint64_t add_point(double x)
    {
        theta.push_back(x);
        return theta.size() - 1;
    }
};

class Sampler
{
  public:
    Sampler(Graphex const& g, SamplerConfig const& cfg)
        : g_(g), cfg_(cfg), base_(cfg.seed, cfg.stream)
    {
    }

    SampledGraph run()
    {
        SampledGraph out;
        out.nu = cfg_.nu;
        out.seed = cfg_.seed;
        out.stream = cfg_.stream;
        out.epsilon = cfg_.epsilon;
        if (!std::isfinite(g_.isolated_rate()))
            throw InfiniteExpectation("cannot sample with infinite I");
        for (double x : cfg_.planted)
        {
            if (!(x >= 0 && std::isfinite(x)))
                throw ConfigError("planted latent values must be finite and >= 0");
        }
        if (cfg_.nu == 0)
        {
            out.theta_max = cfg_.theta_max.value_or(0.0);
            out.planted.assign(cfg_.planted.size(), std::nullopt);
            return out;
        }
        theta_max_ = cfg_.theta_max
                         ? *cfg_.theta_max
                         : choose_theta_max(g_, cfg_.nu, cfg_.epsilon);
        out.theta_max = theta_max_;

        Envelope const* env = g_.envelope();
        if (env && cfg_.separable_fast_path)
        {
            out.core_boundary = sample_envelope(*env);
        }
        else
        {
            sample_pairwise();
        }
        sample_stars();
        CounterRng iso = base_.split(kIsolatedTag);
        draft_.isolated_edges
            = sample_poisson(iso, g_.isolated_rate() * cfg_.nu * cfg_.nu);
        finish(out);
        return out;
    }

  private:
    void check_points(double expected) const
    {
        if (expected > cfg_.max_points)
        {
            throw CapacityError("expected latent point count "
                                + std::to_string(expected)
                                + " exceeds the configured limit");
        }
    }

    //-----------------------------------------------------------------------//
    void sample_pairwise()
    {
        double const mean = cfg_.nu * theta_max_;
        check_points(mean);
        CounterRng count_rng = base_.split(kCountTag);
        CounterRng latent_rng = base_.split(kLatentTag);
        std::uint64_t const n = sample_poisson(count_rng, mean);
        for (std::uint64_t i = 0; i < n; ++i)
            draft_.add_point(theta_max_ * latent_rng.uniform());
        for (double x : cfg_.planted)
            draft_.planted_points.push_back(draft_.add_point(x));

        auto const total = static_cast<double>(draft_.theta.size());
        if (0.5 * total * (total - 1) > cfg_.max_pairs)
        {
            throw CapacityError("candidate pair count "
                                + std::to_string(0.5 * total * (total - 1))
                                + " exceeds the configured limit");
        }
        CounterRng pair_rng = base_.split(kPairTag);
        std::uint64_t const m = draft_.theta.size();
        for (std::uint64_t i = 0; i < m; ++i)
        {
            for (std::uint64_t j = i + 1; j < m; ++j)
            {
                double const w = g_.kernel(draft_.theta[i], draft_.theta[j]);
                if (pair_rng.uniform() < w)
                    draft_.w_edges.emplace_back(i, j);
            }
        }
        sample_self_loops(0, m);
    }

    void sample_self_loops(std::uint64_t begin, std::uint64_t end)
    {
        if (!g_.self_edges())
            return;
        CounterRng rng = base_.split(kSelfTag).split(begin);
        for (std::uint64_t i = begin; i < end; ++i)
        {
            if (rng.uniform() < g_.diagonal(draft_.theta[i]))
                draft_.self_loops.push_back(i);
        }
    }

    void sample_stars()
    {
        if (g_.star_is_zero())
            return;
        CounterRng rng = base_.split(kStarTag);
        for (std::uint64_t i = 0; i < draft_.theta.size(); ++i)
        {
            std::uint64_t const k
                = sample_poisson(rng, cfg_.nu * g_.star(draft_.theta[i]));
            if (k > 0)
                draft_.stars.emplace_back(i, k);
        }
    }

    //-----------------------------------------------------------------------//
    // Envelope sampler
    //-----------------------------------------------------------------------//

    //! Expected W, star and self-loop edges on points above x.
    double outer_mass(Envelope const& env, double x) const
    {
        double const nu = cfg_.nu;
        double const h = env.tail(x);
        double mass = 0.5 * nu * nu * h * h;
        if (!g_.star_is_zero())
            mass += nu * nu * g_.star_tail(x);
        if (g_.self_edges())
            mass += nu * g_.diagonal_tail(x);
        return mass;
    }

    //! Sources sorted by h descending, with prefix sums of h.
    struct SourceSet
    {
        std::vector<std::uint64_t> ids;
        std::vector<double> h;
        std::vector<double> prefix;  // prefix[k] = h[0] + ... + h[k-1]

        void finalize()
        {
            std::vector<std::size_t> order(ids.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
                return h[a] > h[b];
            });
            std::vector<std::uint64_t> sorted_ids(ids.size());
            std::vector<double> sorted_h(ids.size());
            for (std::size_t k = 0; k < order.size(); ++k)
            {
                sorted_ids[k] = ids[order[k]];
                sorted_h[k] = h[order[k]];
            }
            ids = std::move(sorted_ids);
            h = std::move(sorted_h);
            build_prefix();
        }

        void build_prefix()
        {
            prefix.assign(h.size() + 1, 0.0);
            for (std::size_t k = 0; k < h.size(); ++k)
                prefix[k + 1] = prefix[k] + h[k];
        }

        double total() const { return prefix.back(); }
        std::size_t size() const { return ids.size(); }

        //! Index chosen with probability proportional to h.
        std::size_t pick(double u) const
        {
            double const target = u * total();
            auto const it = std::upper_bound(prefix.begin() + 1, prefix.end(), target);
            auto const k = static_cast<std::size_t>(it - prefix.begin()) - 1;
            return std::min(k, h.size() - 1);
        }
    };

    /*!
     * Visit the sources s that have an edge to a point at y, by skip
     * sampling with proposal probability min(1, h_s h_y).
     *
     * The callback receives the source index and returns false to stop.
     * The source at index \c skip is passed over.
     */
    template<class F>
    void for_each_neighbor(SourceSet const& sources,
                           double y,
                           double hy,
                           std::size_t skip,
                           CounterRng& rng,
                           F&& visit) const
    {
        std::size_t const n = sources.size();
        std::size_t b = 0;
        while (b < n)
        {
            double const p = std::min(1.0, sources.h[b] * hy);
            if (!(p > 0))
                return;
            if (p < 1)
            {
                std::uint64_t const gap = sample_geometric_skip(rng, p);
                if (gap == kNoSkip || gap >= n - b)
                    return;
                b += static_cast<std::size_t>(gap);
            }
            if (b != skip)
            {
                double const w = g_.kernel(draft_.theta[sources.ids[b]], y);
                if (rng.uniform() * p < w)
                {
                    if (!visit(b))
                        return;
                }
            }
            ++b;
        }
    }

    double sample_envelope(Envelope const& env)
    {
        double const nu = cfg_.nu;
        std::optional<double> const support = g_.support_bound();
        double const upper
            = support ? std::min(theta_max_, *support) : theta_max_;
        // Star leaves and self loops live beyond the support of W too
        double const boundary = bisect_down(
            [&](double x) { return outer_mass(env, x); },
            0.0,
            std::max(0.0, theta_max_),
            cfg_.epsilon);
        check_points(nu * boundary);

        // Core: rate-nu process on [0, boundary], generated in order
        CounterRng latent_rng = base_.split(kLatentTag);
        for (double x = sample_exponential(latent_rng, nu); x <= boundary;
             x += sample_exponential(latent_rng, nu))
        {
            draft_.add_point(x);
        }
        for (double x : cfg_.planted)
            draft_.planted_points.push_back(draft_.add_point(x));
        std::uint64_t const core_end = draft_.theta.size();

        SourceSet core;
        core.ids.resize(core_end);
        core.h.resize(core_end);
        for (std::uint64_t i = 0; i < core_end; ++i)
        {
            core.ids[i] = i;
            core.h[i] = env.h(draft_.theta[i]);
        }
        if (env.monotone && cfg_.planted.empty())
            core.build_prefix();
        else
            core.finalize();

        sample_core_edges(core, env);
        sample_self_loops(0, core_end);
        explore_tail(core, env, boundary, upper);
        return boundary;
    }

    void sample_core_edges(SourceSet const& core, Envelope const& env)
    {
        CounterRng rng = base_.split(kPairTag);
        std::size_t const n = core.size();
        for (std::size_t a = 0; a < n; ++a)
        {
            double const ha = core.h[a];
            if (!(ha > 0))
                break;
            double const xa = draft_.theta[core.ids[a]];
            std::size_t b = a + 1;
            while (b < n)
            {
                double const p = std::min(1.0, ha * core.h[b]);
                if (!(p > 0))
                    break;
                if (p < 1)
                {
                    std::uint64_t const gap = sample_geometric_skip(rng, p);
                    if (gap == kNoSkip || gap >= n - b)
                        break;
                    b += static_cast<std::size_t>(gap);
                }
                double const q = std::min(1.0, ha * core.h[b]);
                double const w
                    = env.exact ? q : g_.kernel(xa, draft_.theta[core.ids[b]]);
                if (rng.uniform() * p < w)
                {
                    draft_.w_edges.emplace_back(core.ids[a], core.ids[b]);
                }
                ++b;
            }
        }
    }

    /*!
     * Find the latent points in (lo, hi] connected to the core, level by
     * level. A candidate at level L has an edge to level L-1 and no edge to
     * the core or to levels before L-1.
     */
    void explore_tail(SourceSet const& core, Envelope const& env, double lo, double hi)
    {
        if (!(hi > lo))
            return;
        double const tail_hi = env.tail(hi);
        double const mass = env.tail(lo) - tail_hi;
        if (!(mass > 0))
            return;
        double const nu = cfg_.nu;
        CounterRng rng = base_.split(kTailTag);

        std::vector<SourceSet> levels;
        SourceSet const* sources = &core;
        for (int level = 1; sources->size() > 0 && sources->total() > 0; ++level)
        {
            double const mean = nu * sources->total() * mass;
            check_points(mean);
            std::uint64_t const k = sample_poisson(rng, mean);
            SourceSet found;
            std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
            std::vector<std::size_t> neighbors;
            for (std::uint64_t c = 0; c < k; ++c)
            {
                double const y = env.tail_inverse(tail_hi + mass * rng.uniform_open());
                double const hy = env.h(y);
                double const anchor_u = rng.uniform();
                double const keep_u = rng.uniform();
                if (!(hy > 0))
                    continue;
                std::size_t const anchor = sources->pick(anchor_u);
                double const ha = sources->h[anchor];
                double const wa = g_.kernel(draft_.theta[sources->ids[anchor]], y);
                if (!(keep_u * ha * hy < wa))
                    continue;
                neighbors.assign(1, anchor);
                for_each_neighbor(*sources, y, hy, anchor, rng, [&](std::size_t b) {
                    neighbors.push_back(b);
                    return true;
                });
                if (!(rng.uniform() * static_cast<double>(neighbors.size()) < 1))
                    continue;
                if (level > 1 && touches_earlier(core, levels, y, hy, rng))
                    continue;
                std::uint64_t const id = draft_.add_point(y);
                found.ids.push_back(id);
                found.h.push_back(hy);
                for (std::size_t b : neighbors)
                    edges.emplace_back(sources->ids[b], id);
            }
            std::sort(edges.begin(), edges.end());
            draft_.w_edges.insert(draft_.w_edges.end(), edges.begin(), edges.end());

            // Edges among the points of this level
            if (static_cast<double>(found.size()) * found.size() > 2 * cfg_.max_pairs)
                throw CapacityError("tail level too large for pairwise edges");
            for (std::size_t i = 0; i < found.size(); ++i)
            {
                for (std::size_t j = i + 1; j < found.size(); ++j)
                {
                    double const w = g_.kernel(draft_.theta[found.ids[i]],
                                               draft_.theta[found.ids[j]]);
                    if (rng.uniform() < w)
                        draft_.w_edges.emplace_back(found.ids[i], found.ids[j]);
                }
            }
            if (!found.ids.empty())
            {
                sample_self_loops(found.ids.front(), found.ids.back() + 1);
            }
            found.finalize();
            levels.push_back(std::move(found));
            sources = &levels.back();
        }
    }

    //! Whether a point at y has an edge to the core or to levels before the last.
    bool touches_earlier(SourceSet const& core,
                         std::vector<SourceSet> const& levels,
                         double y,
                         double hy,
                         CounterRng& rng) const
    {
        bool hit = false;
        for_each_neighbor(core, y, hy, kNoIndex, rng, [&](std::size_t) {
            hit = true;
            return false;
        });
        if (hit)
            return true;
        for (std::size_t l = 0; l + 1 < levels.size(); ++l)
        {
            for (std::uint64_t id : levels[l].ids)
            {
                if (rng.uniform() < g_.kernel(draft_.theta[id], y))
                    return true;
            }
        }
        return false;
    }

    static constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

    //-----------------------------------------------------------------------//
    void finish(SampledGraph& out)
    {
        std::uint64_t const n = draft_.theta.size();
        std::vector<bool> visible(n, false);
        for (auto const& [a, b] : draft_.w_edges)
        {
            visible[a] = true;
            visible[b] = true;
        }
        for (auto a : draft_.self_loops)
            visible[a] = true;
        for (auto const& [a, k] : draft_.stars)
            visible[a] = true;

        constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();
        std::vector<std::uint64_t> vertex(n, kNone);
        std::uint64_t const label_stream = base_.split(kLabelTag).stream();
        for (std::uint64_t i = 0; i < n; ++i)
        {
            if (!visible[i])
                continue;
            vertex[i] = out.labels.size();
            out.labels.push_back(
                cfg_.nu * CounterRng::uniform_at(cfg_.seed, label_stream, i));
            if (cfg_.retain_latent)
                out.latent.push_back(draft_.theta[i]);
        }
        out.edges.reserve(draft_.w_edges.size() + draft_.self_loops.size());
        for (auto const& [a, b] : draft_.w_edges)
        {
            auto const [u, v] = std::minmax(vertex[a], vertex[b]);
            out.edges.push_back({u, v, Provenance::W});
        }
        for (auto a : draft_.self_loops)
            out.edges.push_back({vertex[a], vertex[a], Provenance::W});

        CounterRng leaf_labels = base_.split(kLeafLabelTag);
        auto fresh_vertex = [&] {
            out.labels.push_back(cfg_.nu * leaf_labels.uniform());
            if (cfg_.retain_latent)
                out.latent.push_back(std::nullopt);
            return out.labels.size() - 1;
        };
        for (auto const& [a, k] : draft_.stars)
        {
            for (std::uint64_t j = 0; j < k; ++j)
                out.edges.push_back({vertex[a], fresh_vertex(), Provenance::star});
        }
        for (std::uint64_t j = 0; j < draft_.isolated_edges; ++j)
        {
            auto const u = fresh_vertex();
            auto const v = fresh_vertex();
            out.edges.push_back({u, v, Provenance::isolated});
        }
        std::sort(out.edges.begin(), out.edges.end(), [](Edge const& x, Edge const& y) {
            return std::tie(x.u, x.v) < std::tie(y.u, y.v);
        });
        for (auto p : draft_.planted_points)
        {
            out.planted.push_back(vertex[p] == kNone
                                      ? std::nullopt
                                      : std::optional<std::uint64_t>(vertex[p]));
        }
    }

    Graphex const& g_;
    SamplerConfig const& cfg_;
    CounterRng base_;
    double theta_max_ = 0;
    Draft draft_;
};

}  // namespace

std::string to_string(Provenance p)
{
    switch (p)
    {
        case Provenance::W:
            return "W";
        case Provenance::star:
            return "star";
        case Provenance::isolated:
            return "isolated";
    }
    return "W";
}

double choose_theta_max(Graphex const& g, double nu, double eps)
{
    if (!(nu >= 0 && std::isfinite(nu)))
        throw ConfigError("nu must be nonnegative and finite");
    if (!(eps > 0))
        throw ConfigError("epsilon must be positive");
    if (nu == 0)
        return 0;
    double const nu2 = nu * nu;
    bool const star = !g.star_is_zero();
    auto const support = g.support_bound();
    auto star_mass = [&](double x) { return star ? nu2 * g.star_tail(x) : 0.0; };
    if (support)
    {
        double const c = *support;
        if (!star)
            return c;
        return search_up(star_mass, c, eps);
    }
    // Marginal tail first fails here for nonintegrable kernels
    double const total = g.kernel_norm();
    (void)total;
    return search_up(
        [&](double x) { return nu2 * g.marginal_tail(x) + star_mass(x); }, 0.0, eps);
}

SampledGraph sample_keg(Graphex const& g, SamplerConfig const& cfg)
{
    if (!(cfg.nu >= 0 && std::isfinite(cfg.nu)))
        throw ConfigError("nu must be nonnegative and finite");
    if (!(cfg.epsilon > 0))
        throw ConfigError("epsilon must be positive");
    if (cfg.theta_max && !(*cfg.theta_max >= 0 && std::isfinite(*cfg.theta_max)))
        throw ConfigError("theta_max must be nonnegative and finite");
    return Sampler(g, cfg).run();
}

SampledGraph restrict(SampledGraph const& graph, double nu_prime)
{
    if (!(nu_prime >= 0))
        throw ConfigError("restrict: nu' must be nonnegative");
    if (nu_prime > graph.nu)
        throw ConfigError("restrict: nu' exceeds the graph's nu");
    SampledGraph out;
    out.nu = nu_prime;
    out.seed = graph.seed;
    out.stream = graph.stream;
    out.theta_max = graph.theta_max;
    out.epsilon = graph.epsilon;
    out.core_boundary = graph.core_boundary;

    std::uint64_t const n = graph.num_vertices();
    std::vector<bool> keep(n, false);
    for (Edge const& e : graph.edges)
    {
        if (graph.labels[e.u] <= nu_prime && graph.labels[e.v] <= nu_prime)
        {
            keep[e.u] = true;
            keep[e.v] = true;
        }
    }
    constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> index(n, kNone);
    for (std::uint64_t i = 0; i < n; ++i)
    {
        if (!keep[i])
            continue;
        index[i] = out.labels.size();
        out.labels.push_back(graph.labels[i]);
        if (!graph.latent.empty())
            out.latent.push_back(graph.latent[i]);
    }
    for (Edge const& e : graph.edges)
    {
        if (keep[e.u] && keep[e.v] && graph.labels[e.u] <= nu_prime
            && graph.labels[e.v] <= nu_prime)
        {
            out.edges.push_back({index[e.u], index[e.v], e.provenance});
        }
    }
    for (auto const& p : graph.planted)
    {
        out.planted.push_back(p && index[*p] != kNone
                                  ? std::optional<std::uint64_t>(index[*p])
                                  : std::nullopt);
    }
    return out;
}

}  // namespace keg
