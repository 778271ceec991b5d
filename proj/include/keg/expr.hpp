#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keg/errors.hpp"

namespace keg {

//! Syntax error with the byte offset where parsing stopped.
class ParseError : public ConfigError
{
  public:
    ParseError(std::string const& message,
               std::size_t offset,
               std::vector<std::string> expected);

    std::size_t offset() const noexcept { return offset_; }
    std::vector<std::string> const& expected() const noexcept
    {
        return expected_;
    }

  private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

//! Evaluation outside the domain: log of a nonpositive number, x/0, ...
class DomainError : public Error
{
  public:
    using Error::Error;
};

//! Expression references y but no value was bound.
class MissingVariable : public Error
{
  public:
    using Error::Error;
};

//---------------------------------------------------------------------------//
/*!
 * Immutable expression over variables x and y.
 *
 * Grammar (see docs/expressions.md):
 * \verbatim
   expr    := term (('+' | '-') term)*
   term    := unary (('*' | '/') unary)*
   unary   := '-' unary | power
   power   := primary ('^' unary)?
   primary := number | 'x' | 'y' | name '(' expr (',' expr)* ')' | '(' expr ')'
   \endverbatim
 * Functions: exp, log, sqrt, abs (one argument); le, min, max (two).
 * le(a, b) is 1 when a <= b and 0 otherwise.
 */
class Expr
{
  public:
    enum class Op : std::uint8_t
    {
        number,
        var_x,
        var_y,
        neg,
        add,
        sub,
        mul,
        div,
        pow,
        exp,
        log,
        sqrt,
        abs,
        le,
        min,
        max,
    };

    struct Node
    {
        Op op;
        double value = 0;
        std::int32_t lhs = -1;
        std::int32_t rhs = -1;
    };

    //! Parse text; throws ParseError.
    static Expr parse(std::string_view text);

    double eval(double x, std::optional<double> y = std::nullopt) const;

    bool uses_y() const noexcept { return uses_y_; }

    //! Canonical text with the minimum parentheses needed to reparse.
    std::string print() const;

    //! Structural equality.
    friend bool operator==(Expr const& a, Expr const& b);

    std::vector<Node> const& nodes() const noexcept { return nodes_; }

  private:
    friend class ExprParser;

    double eval_node(std::int32_t index, double x, double const* y) const;
    void print_node(std::int32_t index, std::string& out) const;

    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
    bool uses_y_ = false;
};

inline Expr parse_expr(std::string_view text)
{
    return Expr::parse(text);
}

}  // namespace keg
