#pragma once

#include <optional>
#include <vector>

#include "keg/graphex.hpp"

namespace keg::detail {

//---------------------------------------------------------------------------//
/*!
 * Tabulated tail integral of a nonnegative function h on [0, c] or [0, inf).
 *
 * Bin integrals are computed once; tail values and their inverse are
 * refined inside a bin with adaptive quadrature and safeguarded Newton steps.
 */
class NumericTail
{
  public:
    NumericTail(Fn1 h, std::optional<double> support);

    double total() const noexcept { return total_; }
    //! Integral of h over [x, end).
    double tail(double x) const;
    //! x with tail(x) = u, for 0 < u <= total().
    double inverse(double u) const;

  private:
    double partial(double a, double b) const;

    Fn1 h_;
    std::optional<double> support_;
    std::vector<double> edges_;
    std::vector<double> cumulative_;  //!< integral over [0, edges_[k]]
    double total_ = 0;
};

}  // namespace keg::detail
