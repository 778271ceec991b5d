#include "keg/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace keg {

ParseError::ParseError(std::string const& message,
                       std::size_t offset,
                       std::vector<std::string> expected)
    : ConfigError([&] {
          std::ostringstream os;
          os << message << " at offset " << offset;
          if (!expected.empty())
          {
              os << " (expected ";
              for (std::size_t i = 0; i < expected.size(); ++i)
              {
                  os << (i ? ", " : "") << expected[i];
              }
              os << ")";
          }
          return os.str();
      }())
    , offset_(offset)
    , expected_(std::move(expected))
{
}

namespace {

struct FunctionInfo
{
    std::string_view name;
    Expr::Op op;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"exp", Expr::Op::exp, 1},
    {"log", Expr::Op::log, 1},
    {"sqrt", Expr::Op::sqrt, 1},
    {"abs", Expr::Op::abs, 1},
    {"le", Expr::Op::le, 2},
    {"min", Expr::Op::min, 2},
    {"max", Expr::Op::max, 2},
};

FunctionInfo const* find_function(std::string_view name)
{
    for (auto const& info : kFunctions)
    {
        if (info.name == name)
            return &info;
    }
    return nullptr;
}

std::string_view function_name(Expr::Op op)
{
    for (auto const& info : kFunctions)
    {
        if (info.op == op)
            return info.name;
    }
    return "?";
}

int precedence(Expr::Op op)
{
    switch (op)
    {
        case Expr::Op::add:
        case Expr::Op::sub:
            return 1;
        case Expr::Op::mul:
        case Expr::Op::div:
            return 2;
        case Expr::Op::neg:
            return 3;
        case Expr::Op::pow:
            return 4;
        default:
            return 5;
    }
}

double checked(double value, char const* what)
{
    if (!std::isfinite(value))
    {
        throw DomainError(std::string("non-finite result in ") + what);
    }
    return value;
}

}  // namespace

//---------------------------------------------------------------------------//
class ExprParser
{
  public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    Expr run()
    {
        expr_.root_ = parse_sum();
        skip_space();
        if (pos_ != text_.size())
        {
            fail("unexpected trailing input",
                 {"operator", "')'", "end of input"});
        }
        return std::move(expr_);
    }

  private:
    [[noreturn]] void fail(std::string const& msg,
                           std::vector<std::string> expected)
    {
        throw ParseError(msg, pos_, std::move(expected));
    }

    void skip_space()
    {
        while (pos_ < text_.size()
               && (text_[pos_] == ' ' || text_[pos_] == '\t'
                   || text_[pos_] == '\n' || text_[pos_] == '\r'))
        {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c)
        {
            ++pos_;
            return true;
        }
        return false;
    }

    std::int32_t push(Expr::Node node)
    {
        expr_.nodes_.push_back(node);
        return static_cast<std::int32_t>(expr_.nodes_.size() - 1);
    }

    std::int32_t parse_sum()
    {
        std::int32_t lhs = parse_product();
        for (;;)
        {
            if (accept('+'))
                lhs = push({Expr::Op::add, 0, lhs, parse_product()});
            else if (accept('-'))
                lhs = push({Expr::Op::sub, 0, lhs, parse_product()});
            else
                return lhs;
        }
    }

    std::int32_t parse_product()
    {
        std::int32_t lhs = parse_unary();
        for (;;)
        {
            if (accept('*'))
                lhs = push({Expr::Op::mul, 0, lhs, parse_unary()});
            else if (accept('/'))
                lhs = push({Expr::Op::div, 0, lhs, parse_unary()});
            else
                return lhs;
        }
    }

    std::int32_t parse_unary()
    {
        if (accept('-'))
        {
            return push({Expr::Op::neg, 0, parse_unary(), -1});
        }
        return parse_power();
    }

    std::int32_t parse_power()
    {
        std::int32_t base = parse_primary();
        if (accept('^'))
        {
            // Right associative: the exponent may itself be a power
            return push({Expr::Op::pow, 0, base, parse_unary()});
        }
        return base;
    }

    std::int32_t parse_primary()
    {
        skip_space();
        if (pos_ >= text_.size())
        {
            fail("unexpected end of input",
                 {"number", "'x'", "'y'", "function", "'('", "'-'"});
        }
        char const c = text_[pos_];
        if (c == '(')
        {
            ++pos_;
            std::int32_t inner = parse_sum();
            if (!accept(')'))
                fail("unbalanced parenthesis", {"')'"});
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.')
        {
            return parse_number();
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
        {
            std::size_t const start = pos_;
            while (pos_ < text_.size()
                   && ((text_[pos_] >= 'a' && text_[pos_] <= 'z')
                       || (text_[pos_] >= 'A' && text_[pos_] <= 'Z')
                       || (text_[pos_] >= '0' && text_[pos_] <= '9')
                       || text_[pos_] == '_'))
            {
                ++pos_;
            }
            std::string_view const name = text_.substr(start, pos_ - start);
            if (name == "x")
                return push({Expr::Op::var_x});
            if (name == "y")
            {
                expr_.uses_y_ = true;
                return push({Expr::Op::var_y});
            }
            FunctionInfo const* info = find_function(name);
            if (!info)
            {
                pos_ = start;
                fail("unknown identifier '" + std::string(name) + "'",
                     {"'x'", "'y'", "exp", "log", "sqrt", "abs", "le", "min",
                      "max"});
            }
            if (!accept('('))
                fail("expected argument list", {"'('"});
            std::int32_t const first = parse_sum();
            std::int32_t second = -1;
            if (info->arity == 2)
            {
                if (!accept(','))
                    fail(std::string(info->name) + " takes two arguments",
                         {"','"});
                second = parse_sum();
            }
            if (!accept(')'))
                fail("expected ')' after arguments", {"')'"});
            return push({info->op, 0, first, second});
        }
        fail("unexpected character",
             {"number", "'x'", "'y'", "function", "'('", "'-'"});
    }

    std::int32_t parse_number()
    {
        std::size_t const start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && text_[pos_] >= '0'
                   && text_[pos_] <= '9')
            {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        if (pos_ < text_.size() && text_[pos_] == '.')
        {
            ++pos_;
            n += digits();
        }
        if (n == 0)
        {
            pos_ = start;
            fail("malformed number", {"digit"});
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E'))
        {
            std::size_t const save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                ++pos_;
            if (digits() == 0)
            {
                pos_ = save;
                fail("malformed exponent", {"digit"});
            }
        }
        std::string const token(text_.substr(start, pos_ - start));
        double const value = std::strtod(token.c_str(), nullptr);
        if (!std::isfinite(value))
        {
            pos_ = start;
            fail("numeric literal out of range", {"finite number"});
        }
        return push({Expr::Op::number, value});
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Expr expr_;
};

//---------------------------------------------------------------------------//
Expr Expr::parse(std::string_view text)
{
    return ExprParser(text).run();
}

double Expr::eval(double x, std::optional<double> y) const
{
    if (uses_y_ && !y)
    {
        throw MissingVariable("expression references y but no value was given");
    }
    double const yv = y.value_or(0.0);
    return eval_node(root_, x, uses_y_ ? &yv : nullptr);
}

double Expr::eval_node(std::int32_t index, double x, double const* y) const
{
    Node const& n = nodes_[static_cast<std::size_t>(index)];
    switch (n.op)
    {
        case Op::number:
            return n.value;
        case Op::var_x:
            return x;
        case Op::var_y:
            return *y;
        case Op::neg:
            return -eval_node(n.lhs, x, y);
        case Op::add:
            return checked(eval_node(n.lhs, x, y) + eval_node(n.rhs, x, y), "+");
        case Op::sub:
            return checked(eval_node(n.lhs, x, y) - eval_node(n.rhs, x, y), "-");
        case Op::mul:
            return checked(eval_node(n.lhs, x, y) * eval_node(n.rhs, x, y), "*");
        case Op::div: {
            double const num = eval_node(n.lhs, x, y);
            double const den = eval_node(n.rhs, x, y);
            if (den == 0)
                throw DomainError("division by zero");
            return checked(num / den, "/");
        }
        case Op::pow: {
            double const base = eval_node(n.lhs, x, y);
            double const expo = eval_node(n.rhs, x, y);
            if (base < 0 && expo != std::floor(expo))
                throw DomainError("negative base with non-integer exponent");
            if (base == 0 && expo < 0)
                throw DomainError("division by zero in ^");
            return checked(std::pow(base, expo), "^");
        }
        case Op::exp:
            return checked(std::exp(eval_node(n.lhs, x, y)), "exp");
        case Op::log: {
            double const arg = eval_node(n.lhs, x, y);
            if (!(arg > 0))
                throw DomainError("log of a nonpositive number");
            return std::log(arg);
        }
        case Op::sqrt: {
            double const arg = eval_node(n.lhs, x, y);
            if (arg < 0)
                throw DomainError("sqrt of a negative number");
            return std::sqrt(arg);
        }
        case Op::abs:
            return std::fabs(eval_node(n.lhs, x, y));
        case Op::le:
            return eval_node(n.lhs, x, y) <= eval_node(n.rhs, x, y) ? 1.0 : 0.0;
        case Op::min:
            return std::min(eval_node(n.lhs, x, y), eval_node(n.rhs, x, y));
        case Op::max:
            return std::max(eval_node(n.lhs, x, y), eval_node(n.rhs, x, y));
    }
    return 0;
}

std::string Expr::print() const
{
    std::string out;
    print_node(root_, out);
    return out;
}

void Expr::print_node(std::int32_t index, std::string& out) const
{
    Node const& n = nodes_[static_cast<std::size_t>(index)];
    auto child = [&](std::int32_t c, bool parens) {
        if (parens)
            out += '(';
        print_node(c, out);
        if (parens)
            out += ')';
    };
    auto prec_of = [&](std::int32_t c) {
        return precedence(nodes_[static_cast<std::size_t>(c)].op);
    };
    switch (n.op)
    {
        case Op::number: {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof(buf), n.value);
            out.append(buf, res.ptr);
            return;
        }
        case Op::var_x:
            out += 'x';
            return;
        case Op::var_y:
            out += 'y';
            return;
        case Op::neg:
            out += '-';
            child(n.lhs, prec_of(n.lhs) < 3);
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            int const p = precedence(n.op);
            char const sym = n.op == Op::add   ? '+'
                             : n.op == Op::sub ? '-'
                             : n.op == Op::mul ? '*'
                                               : '/';
            child(n.lhs, prec_of(n.lhs) < p);
            out += sym;
            child(n.rhs, prec_of(n.rhs) <= p);
            return;
        }
        case Op::pow:
            child(n.lhs, prec_of(n.lhs) <= 4);
            out += '^';
            child(n.rhs, prec_of(n.rhs) < 3);
            return;
        default:
            out += function_name(n.op);
            out += '(';
            print_node(n.lhs, out);
            if (n.rhs >= 0)
            {
                out += ',';
                print_node(n.rhs, out);
            }
            out += ')';
            return;
    }
}

bool operator==(Expr const& a, Expr const& b)
{
    std::function<bool(std::int32_t, std::int32_t)> same
        = [&](std::int32_t i, std::int32_t j) -> bool {
        if (i < 0 || j < 0)
            return i == j;
        auto const& na = a.nodes_[static_cast<std::size_t>(i)];
        auto const& nb = b.nodes_[static_cast<std::size_t>(j)];
        if (na.op != nb.op)
            return false;
        if (na.op == Expr::Op::number && na.value != nb.value)
            return false;
        return same(na.lhs, nb.lhs) && same(na.rhs, nb.rhs);
    };
    return same(a.root_, b.root_);
}

}  // namespace keg
