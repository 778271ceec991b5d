#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "keg/errors.hpp"

namespace keg {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

enum class Family
{
    constant,
    graphon_dilation,
    separable,
    slow_decay,
    fast_decay,
    caron_fox,
    custom,
};

std::string to_string(Family f);
Family family_from_string(std::string const& name);

//---------------------------------------------------------------------------//
/*!
 * Declarative description of a graphex.
 *
 * Parameters used per family:
 * - constant: p, c (W = p on [0,c]^2)
 * - graphon-dilation: grid (square, symmetric, values in [0,1]), c
 * - separable: exprs["f"], optional support_bound (W = f(x) f(y))
 * - slow-decay, fast-decay: none
 * - caron-fox: exprs["g"], optional support_bound
 * - custom: exprs["W"] in x and y, optional support_bound
 *
 * Any family accepts exprs["S"] (star rate) and a nonnegative I.
 */
struct GraphexSpec
{
    Family family = Family::constant;
    double p = 1;
    double c = 1;
    Eigen::MatrixXd grid;
    std::map<std::string, std::string> exprs;
    double isolated_rate = 0;
    bool self_edges = false;
    std::optional<double> support_bound;
};

nlohmann::json to_json(GraphexSpec const& spec);
//! Throws ConfigError on schema violations.
GraphexSpec spec_from_json(nlohmann::json const& doc);

//---------------------------------------------------------------------------//
/*!
 * Separable upper bound W(x, y) <= h(x) h(y) for x != y.
 *
 * \c tail(x) is the integral of h over [x, infinity) and \c tail_inverse
 * maps a value u in (0, tail(0)] back to the point x with tail(x) = u.
 * When \c monotone is set h is nonincreasing.
 */
struct Envelope
{
    Fn1 h;
    Fn1 tail;
    Fn1 tail_inverse;
    bool monotone = false;
    //! W equals h(x) h(y) off the diagonal (no rejection step needed).
    bool exact = false;
};

class Graphex;

//! Analytic and numeric data attached to a graphex.
struct GraphexMeta
{
    Fn1 marginal;       //!< mu_W, when known in closed form
    Fn1 marginal_tail;  //!< integral of mu_W over [x, inf), closed form
    std::optional<double> kernel_norm;  //!< ||W||_1 in closed form
    Fn1 star_tail;      //!< integral of S over [x, inf), closed form
    Fn1 diagonal_tail;  //!< integral of W(t, t) over [x, inf), closed form
    std::optional<double> support_bound;
    //! Points where W or mu_W may jump (cell edges of a step graphon).
    std::vector<double> breakpoints;
    std::optional<Envelope> envelope;
    bool analytic = false;
    //! sup of mu_W, when known; used by the local-finiteness check.
    std::optional<double> marginal_sup;
};

//---------------------------------------------------------------------------//
/*!
 * The triple (I, S, W) together with its metadata. Immutable; copies share
 * state and are safe to read from any number of threads.
 */
class Graphex
{
  public:
    struct Parts
    {
        double isolated_rate = 0;
        Fn1 star;  //!< empty means S == 0
        Fn2 kernel;  //!< off-diagonal values of W
        Fn1 diagonal;  //!< W(x, x) when self edges are allowed
        bool self_edges = false;
        GraphexMeta meta;
        GraphexSpec spec;
    };

    explicit Graphex(Parts parts);

    double isolated_rate() const noexcept { return parts_->isolated_rate; }
    bool star_is_zero() const noexcept { return !parts_->star; }
    double star(double x) const;

    //! W(x, y); on the diagonal this is 0 unless self edges are allowed.
    double kernel(double x, double y) const;
    //! W(x, x).
    double diagonal(double x) const;
    bool self_edges() const noexcept { return parts_->self_edges; }

    GraphexMeta const& meta() const noexcept { return parts_->meta; }
    GraphexSpec const& spec() const noexcept { return parts_->spec; }
    std::optional<double> support_bound() const noexcept
    {
        return parts_->meta.support_bound;
    }
    Envelope const* envelope() const noexcept
    {
        return parts_->meta.envelope ? &*parts_->meta.envelope : nullptr;
    }

    //! Integral of mu_W over [x, inf); closed form or quadrature.
    double marginal_tail(double x, double rel_tol = 1e-8) const;
    //! ||W||_1; throws InfiniteExpectation when the integral diverges.
    double kernel_norm(double rel_tol = 1e-8) const;
    //! Integral of S over [x, inf).
    double star_tail(double x, double rel_tol = 1e-8) const;
    //! Integral of W(t, t) over [x, inf).
    double diagonal_tail(double x, double rel_tol = 1e-8) const;

  private:
    std::shared_ptr<Parts const> parts_;
    // Lazily computed, thread-safe caches
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

//! Build a graphex from its description. Throws ConfigError.
Graphex build(GraphexSpec const& spec);

/*!
 * mu_W(x) = integral of W(x, y) dy.
 *
 * Closed form when available, otherwise semi-infinite quadrature to relative
 * tolerance rel_tol; throws QuadratureError with the achieved estimate.
 */
double marginal(Graphex const& g, double x, double rel_tol = 1e-8);

/*!
 * Dilation of a step graphon: W(x, y) = grid(floor(n x / c), floor(n y / c))
 * on [0, c]^2 and 0 elsewhere.
 */
Graphex dilate(Eigen::MatrixXd const& graphon, double c, bool self_edges = false);

//---------------------------------------------------------------------------//
enum class Verdict
{
    holds_analytic,
    holds_numeric,
    violated,
    undecidable,
};

std::string to_string(Verdict v);

struct ConditionResult
{
    std::string name;
    Verdict verdict = Verdict::undecidable;
    std::string detail;
};

struct FinitenessReport
{
    //! Conditions (i) through (v), in order.
    std::vector<ConditionResult> conditions;
    //! Whether mu_W = inf only on a null set could be certified.
    ConditionResult marginal_finite;
    bool all_hold() const;
};

struct ProbeConfig
{
    double rel_tol = 1e-6;
    double probe_max = 1e6;  //!< probe grid spans [0, probe_max] geometrically
    int probe_points = 200;
};

//! Check the conditions under which the adjacency measure is locally finite.
FinitenessReport
check_local_finiteness(Graphex const& g, ProbeConfig const& probe = {});

nlohmann::json to_json(FinitenessReport const& report);

}  // namespace keg
