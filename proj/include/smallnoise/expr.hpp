#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smallnoise {

enum class FuncId { Sin, Cos, Exp, Log, Abs, Sqrt, Tanh };

class ExprError : public std::runtime_error {
  public:
    enum class Kind { Syntax, UnknownIdentifier, Arity, Domain };

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    ExprError(Kind kind, const std::string& message, std::size_t offset = npos)
        : std::runtime_error(message), kind_(kind), offset_(offset) {}

    Kind kind() const { return kind_; }
    // Byte offset into the source text for syntax errors, npos otherwise.
    std::size_t offset() const { return offset_; }

  private:
    Kind kind_;
    std::size_t offset_;
};

// A scalar coefficient function of one spatial (or time) variable and an
// optional parameter theta, held as an arithmetic expression tree.
// Supports exact forward-mode differentiation in the variable, in theta,
// and mixed second order. Immutable after construction.
class CoefficientFn {
  public:
    CoefficientFn();  // constant zero

    // Accepts the DSL (infix arithmetic over x|t, theta, sin, cos, exp, log,
    // abs, sqrt, tanh) plus the shortcut forms "const:c" and "linear:a,b"
    // (meaning a + b*x) which bypass the parser.
    static CoefficientFn parse(std::string_view text);

    static CoefficientFn constant(double c);
    static CoefficientFn variable(const std::string& name = "x");
    static CoefficientFn theta();

    double eval(double x, std::optional<double> theta = std::nullopt) const;
    double operator()(double x) const { return eval(x); }
    double operator()(double x, double theta_value) const { return eval(x, theta_value); }

    double deriv_x(double x, std::optional<double> theta = std::nullopt) const;
    double deriv_xx(double x, std::optional<double> theta = std::nullopt) const;
    double deriv_theta(double x, double theta) const;
    double deriv_x_theta(double x, double theta) const;

    bool uses_theta() const { return uses_theta_; }
    bool uses_variable() const { return uses_var_; }
    const std::string& variable_name() const { return var_name_; }

    // Copy with every theta reference replaced by the given constant.
    CoefficientFn bind_theta(double value) const;

    // Canonical text form; parse(print()) reproduces the identical tree.
    std::string print() const;
    bool equal_tree(const CoefficientFn& other) const;
    std::uint64_t hash() const;

    // Tree combinators (used to build perturbed drifts programmatically).
    friend CoefficientFn operator+(const CoefficientFn& a, const CoefficientFn& b);
    friend CoefficientFn operator-(const CoefficientFn& a, const CoefficientFn& b);
    friend CoefficientFn operator*(const CoefficientFn& a, const CoefficientFn& b);
    friend CoefficientFn operator/(const CoefficientFn& a, const CoefficientFn& b);
    static CoefficientFn negate(const CoefficientFn& a);
    static CoefficientFn power(const CoefficientFn& base, const CoefficientFn& exponent);
    static CoefficientFn call(FuncId fn, const CoefficientFn& arg);

  private:
    enum class Op : std::uint8_t { Number, Var, Theta, Neg, Add, Sub, Mul, Div, Pow, Func };

    struct Node {
        Op op;
        FuncId fn;    // valid when op == Func
        double num;   // valid when op == Number
        int a;        // child indices, -1 if unused
        int b;
    };

    template <class S>
    S eval_node(int idx, const S& x, const S* theta) const;

    int append_tree(const CoefficientFn& other);  // returns new root index
    static CoefficientFn combine(Op op, const CoefficientFn& a, const CoefficientFn& b);
    void print_node(int idx, int parent_prec, bool right_child, std::string& out) const;
    bool equal_node(int i, const CoefficientFn& other, int j) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string var_name_ = "x";
    bool uses_var_ = false;
    bool uses_theta_ = false;

    friend class ExprParser;
};

}  // namespace smallnoise
