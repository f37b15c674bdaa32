#include "smallnoise/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace smallnoise {

namespace {

// First-order dual number over a generic scalar; nesting two levels gives
// exact mixed second derivatives.
template <class T>
struct Dual {
    T v;
    T d;
};

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
    return primal(x.v);
}

inline double make_scalar(double c, double) { return c; }
template <class T>
Dual<T> make_scalar(double c, const Dual<T>& like) {
    return {make_scalar(c, like.v), make_scalar(0.0, like.v)};
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
    return {-a.v, -a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    const T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

template <class T>
Dual<T> sin(const Dual<T>& a) {
    return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
    const T e = exp(a.v);
    return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
    return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    if (primal(a.v) == 0.0) {
        throw ExprError(ExprError::Kind::Domain, "sqrt: derivative singular at 0");
    }
    const T s = sqrt(a.v);
    const T half = make_scalar(0.5, a.v);
    return {s, half * a.d / s};
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
    const T t = tanh(a.v);
    const T one = make_scalar(1.0, a.v);
    return {t, (one - t * t) * a.d};
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
    const double s = primal(a.v) > 0.0 ? 1.0 : (primal(a.v) < 0.0 ? -1.0 : 0.0);
    const T sign = make_scalar(s, a.v);
    return {abs(a.v), sign * a.d};
}

template <class S>
S int_power(S base, long long n, const S& like) {
    if (n < 0) {
        if (primal(base) == 0.0) {
            throw ExprError(ExprError::Kind::Domain, "division by zero in negative power");
        }
        base = make_scalar(1.0, like) / base;
        n = -n;
    }
    S result = make_scalar(1.0, like);
    while (n > 0) {
        if (n & 1) {
            result = result * base;
        }
        base = base * base;
        n >>= 1;
    }
    return result;
}

bool is_integer_value(double v, long long& out) {
    if (!(v >= -1e15 && v <= 1e15)) {
        return false;
    }
    const double r = std::nearbyint(v);
    if (r != v) {
        return false;
    }
    out = static_cast<long long>(r);
    return true;
}

std::string format_double(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

}  // namespace

// --- parser ---

class ExprParser {
  public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    CoefficientFn run() {
        CoefficientFn fn;
        fn.root_ = parse_expr(fn);
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        if (!fn.uses_var_) {
            fn.var_name_ = "x";
        }
        return fn;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExprError(ExprError::Kind::Syntax,
                        msg + " at offset " + std::to_string(pos_), pos_);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool peek(char c) {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    int parse_expr(CoefficientFn& fn) {
        int lhs = parse_term(fn);
        for (;;) {
            if (consume('+')) {
                const int rhs = parse_term(fn);
                lhs = push(fn, CoefficientFn::Op::Add, lhs, rhs);
            } else if (consume('-')) {
                const int rhs = parse_term(fn);
                lhs = push(fn, CoefficientFn::Op::Sub, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    int parse_term(CoefficientFn& fn) {
        int lhs = parse_unary(fn);
        for (;;) {
            if (consume('*')) {
                const int rhs = parse_unary(fn);
                lhs = push(fn, CoefficientFn::Op::Mul, lhs, rhs);
            } else if (consume('/')) {
                const int rhs = parse_unary(fn);
                lhs = push(fn, CoefficientFn::Op::Div, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    int parse_unary(CoefficientFn& fn) {
        if (consume('-')) {
            const int child = parse_unary(fn);
            return push(fn, CoefficientFn::Op::Neg, child, -1);
        }
        return parse_power(fn);
    }

    int parse_power(CoefficientFn& fn) {
        const int base = parse_primary(fn);
        if (consume('^')) {
            const int exponent = parse_unary(fn);  // right-associative
            return push(fn, CoefficientFn::Op::Pow, base, exponent);
        }
        return base;
    }

    int parse_primary(CoefficientFn& fn) {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("expected operand");
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number(fn);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return parse_identifier(fn);
        }
        if (consume('(')) {
            const int inner = parse_expr(fn);
            if (!consume(')')) {
                fail("expected ')'");
            }
            return inner;
        }
        fail("expected operand");
    }

    int parse_number(CoefficientFn& fn) {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto result = std::from_chars(begin, end, value);
        if (result.ec != std::errc()) {
            fail("malformed number");
        }
        pos_ = static_cast<std::size_t>(result.ptr - text_.data());
        CoefficientFn::Node node{CoefficientFn::Op::Number, FuncId::Sin, value, -1, -1};
        fn.nodes_.push_back(node);
        return static_cast<int>(fn.nodes_.size()) - 1;
    }

    int parse_identifier(CoefficientFn& fn) {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x" || name == "t") {
            if (fn.uses_var_ && fn.var_name_ != name) {
                throw ExprError(ExprError::Kind::Syntax,
                                "expression mixes variables 'x' and 't'", start);
            }
            fn.uses_var_ = true;
            fn.var_name_ = std::string(name);
            return push(fn, CoefficientFn::Op::Var, -1, -1);
        }
        if (name == "theta") {
            fn.uses_theta_ = true;
            return push(fn, CoefficientFn::Op::Theta, -1, -1);
        }
        FuncId fid;
        if (name == "sin") {
            fid = FuncId::Sin;
        } else if (name == "cos") {
            fid = FuncId::Cos;
        } else if (name == "exp") {
            fid = FuncId::Exp;
        } else if (name == "log") {
            fid = FuncId::Log;
        } else if (name == "abs") {
            fid = FuncId::Abs;
        } else if (name == "sqrt") {
            fid = FuncId::Sqrt;
        } else if (name == "tanh") {
            fid = FuncId::Tanh;
        } else {
            throw ExprError(ExprError::Kind::UnknownIdentifier,
                            "unknown identifier '" + std::string(name) + "' at offset " +
                                std::to_string(start),
                            start);
        }
        if (!consume('(')) {
            throw ExprError(ExprError::Kind::Arity,
                            "function '" + std::string(name) + "' requires one argument",
                            pos_);
        }
        const int arg = parse_expr(fn);
        if (peek(',')) {
            throw ExprError(ExprError::Kind::Arity,
                            "function '" + std::string(name) + "' takes exactly one argument",
                            pos_);
        }
        if (!consume(')')) {
            fail("expected ')'");
        }
        CoefficientFn::Node node{CoefficientFn::Op::Func, fid, 0.0, arg, -1};
        fn.nodes_.push_back(node);
        return static_cast<int>(fn.nodes_.size()) - 1;
    }

    int push(CoefficientFn& fn, CoefficientFn::Op op, int a, int b) {
        fn.nodes_.push_back(CoefficientFn::Node{op, FuncId::Sin, 0.0, a, b});
        return static_cast<int>(fn.nodes_.size()) - 1;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

// --- CoefficientFn ---

CoefficientFn::CoefficientFn() {
    nodes_.push_back(Node{Op::Number, FuncId::Sin, 0.0, -1, -1});
    root_ = 0;
}

CoefficientFn CoefficientFn::parse(std::string_view text) {
    if (text.rfind("const:", 0) == 0) {
        const std::string_view rest = text.substr(6);
        double c = 0.0;
        auto result = std::from_chars(rest.data(), rest.data() + rest.size(), c);
        if (result.ec != std::errc() || result.ptr != rest.data() + rest.size()) {
            throw ExprError(ExprError::Kind::Syntax, "const: expects a single number", 6);
        }
        return constant(c);
    }
    if (text.rfind("linear:", 0) == 0) {
        const std::string_view rest = text.substr(7);
        const std::size_t comma = rest.find(',');
        if (comma == std::string_view::npos) {
            throw ExprError(ExprError::Kind::Syntax, "linear: expects 'a,b'", 7);
        }
        double a = 0.0;
        double b = 0.0;
        auto ra = std::from_chars(rest.data(), rest.data() + comma, a);
        auto rb = std::from_chars(rest.data() + comma + 1, rest.data() + rest.size(), b);
        if (ra.ec != std::errc() || ra.ptr != rest.data() + comma || rb.ec != std::errc() ||
            rb.ptr != rest.data() + rest.size()) {
            throw ExprError(ExprError::Kind::Syntax, "linear: expects 'a,b'", 7);
        }
        return constant(a) + constant(b) * variable();
    }
    return ExprParser(text).run();
}

CoefficientFn CoefficientFn::constant(double c) {
    CoefficientFn fn;
    fn.nodes_[0].num = c;
    return fn;
}

CoefficientFn CoefficientFn::variable(const std::string& name) {
    CoefficientFn fn;
    fn.nodes_.clear();
    fn.nodes_.push_back(Node{Op::Var, FuncId::Sin, 0.0, -1, -1});
    fn.root_ = 0;
    fn.var_name_ = name;
    fn.uses_var_ = true;
    return fn;
}

CoefficientFn CoefficientFn::theta() {
    CoefficientFn fn;
    fn.nodes_.clear();
    fn.nodes_.push_back(Node{Op::Theta, FuncId::Sin, 0.0, -1, -1});
    fn.root_ = 0;
    fn.uses_theta_ = true;
    return fn;
}

template <class S>
S CoefficientFn::eval_node(int idx, const S& x, const S* theta) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
        case Op::Number:
            return make_scalar(n.num, x);
        case Op::Var:
            return x;
        case Op::Theta:
            if (theta == nullptr) {
                throw ExprError(ExprError::Kind::Arity,
                                "coefficient references theta but no value was supplied");
            }
            return *theta;
        case Op::Neg:
            return -eval_node(n.a, x, theta);
        case Op::Add:
            return eval_node(n.a, x, theta) + eval_node(n.b, x, theta);
        case Op::Sub:
            return eval_node(n.a, x, theta) - eval_node(n.b, x, theta);
        case Op::Mul:
            return eval_node(n.a, x, theta) * eval_node(n.b, x, theta);
        case Op::Div: {
            const S num = eval_node(n.a, x, theta);
            const S den = eval_node(n.b, x, theta);
            if (primal(den) == 0.0) {
                throw ExprError(ExprError::Kind::Domain, "division by zero");
            }
            return num / den;
        }
        case Op::Pow: {
            const S base = eval_node(n.a, x, theta);
            const Node& en = nodes_[static_cast<std::size_t>(n.b)];
            long long k = 0;
            if (en.op == Op::Number && is_integer_value(en.num, k)) {
                return int_power(base, k, x);
            }
            if (en.op == Op::Neg && nodes_[static_cast<std::size_t>(en.a)].op == Op::Number &&
                is_integer_value(nodes_[static_cast<std::size_t>(en.a)].num, k)) {
                return int_power(base, -k, x);
            }
            const S exponent = eval_node(n.b, x, theta);
            if (primal(base) <= 0.0) {
                throw ExprError(ExprError::Kind::Domain,
                                "power with non-positive base and non-integer exponent");
            }
            return exp(exponent * log(base));
        }
        case Op::Func: {
            const S arg = eval_node(n.a, x, theta);
            switch (n.fn) {
                case FuncId::Sin:
                    return sin(arg);
                case FuncId::Cos:
                    return cos(arg);
                case FuncId::Exp:
                    return exp(arg);
                case FuncId::Log:
                    if (primal(arg) <= 0.0) {
                        throw ExprError(ExprError::Kind::Domain,
                                        "log of non-positive argument");
                    }
                    return log(arg);
                case FuncId::Abs:
                    return abs(arg);
                case FuncId::Sqrt:
                    if (primal(arg) < 0.0) {
                        throw ExprError(ExprError::Kind::Domain,
                                        "sqrt of negative argument");
                    }
                    return sqrt(arg);
                case FuncId::Tanh:
                    return tanh(arg);
            }
            break;
        }
    }
    throw ExprError(ExprError::Kind::Domain, "corrupt expression tree");
}

double CoefficientFn::eval(double x, std::optional<double> theta) const {
    if (theta.has_value()) {
        const double tv = *theta;
        return eval_node(root_, x, &tv);
    }
    return eval_node<double>(root_, x, nullptr);
}

double CoefficientFn::deriv_x(double x, std::optional<double> theta) const {
    const Dual<double> xd{x, 1.0};
    if (theta.has_value()) {
        const Dual<double> td{*theta, 0.0};
        return eval_node(root_, xd, &td).d;
    }
    return eval_node<Dual<double>>(root_, xd, nullptr).d;
}

double CoefficientFn::deriv_xx(double x, std::optional<double> theta) const {
    using D2 = Dual<Dual<double>>;
    const D2 xd{{x, 1.0}, {1.0, 0.0}};
    if (theta.has_value()) {
        const D2 td{{*theta, 0.0}, {0.0, 0.0}};
        return eval_node(root_, xd, &td).d.d;
    }
    return eval_node<D2>(root_, xd, nullptr).d.d;
}

double CoefficientFn::deriv_theta(double x, double theta) const {
    const Dual<double> xd{x, 0.0};
    const Dual<double> td{theta, 1.0};
    return eval_node(root_, xd, &td).d;
}

double CoefficientFn::deriv_x_theta(double x, double theta) const {
    using D2 = Dual<Dual<double>>;
    const D2 xd{{x, 0.0}, {1.0, 0.0}};   // outer level: d/dx
    const D2 td{{theta, 1.0}, {0.0, 0.0}};  // inner level: d/dtheta
    return eval_node(root_, xd, &td).d.d;
}

CoefficientFn CoefficientFn::bind_theta(double value) const {
    CoefficientFn fn = *this;
    for (Node& n : fn.nodes_) {
        if (n.op == Op::Theta) {
            n.op = Op::Number;
            n.num = value;
        }
    }
    fn.uses_theta_ = false;
    return fn;
}

int CoefficientFn::append_tree(const CoefficientFn& other) {
    const int offset = static_cast<int>(nodes_.size());
    for (const Node& n : other.nodes_) {
        Node copy = n;
        if (copy.a >= 0) {
            copy.a += offset;
        }
        if (copy.b >= 0) {
            copy.b += offset;
        }
        nodes_.push_back(copy);
    }
    if (other.uses_var_) {
        if (uses_var_ && var_name_ != other.var_name_) {
            throw ExprError(ExprError::Kind::Syntax,
                            "cannot combine expressions over different variables");
        }
        uses_var_ = true;
        var_name_ = other.var_name_;
    }
    uses_theta_ = uses_theta_ || other.uses_theta_;
    return other.root_ + offset;
}

CoefficientFn CoefficientFn::combine(Op op, const CoefficientFn& a, const CoefficientFn& b) {
    CoefficientFn fn;
    fn.nodes_.clear();
    fn.root_ = -1;
    fn.uses_var_ = false;
    fn.uses_theta_ = false;
    const int ra = fn.append_tree(a);
    const int rb = fn.append_tree(b);
    fn.nodes_.push_back(Node{op, FuncId::Sin, 0.0, ra, rb});
    fn.root_ = static_cast<int>(fn.nodes_.size()) - 1;
    return fn;
}

CoefficientFn operator+(const CoefficientFn& a, const CoefficientFn& b) {
    return CoefficientFn::combine(CoefficientFn::Op::Add, a, b);
}
CoefficientFn operator-(const CoefficientFn& a, const CoefficientFn& b) {
    return CoefficientFn::combine(CoefficientFn::Op::Sub, a, b);
}
CoefficientFn operator*(const CoefficientFn& a, const CoefficientFn& b) {
    return CoefficientFn::combine(CoefficientFn::Op::Mul, a, b);
}
CoefficientFn operator/(const CoefficientFn& a, const CoefficientFn& b) {
    return CoefficientFn::combine(CoefficientFn::Op::Div, a, b);
}

CoefficientFn CoefficientFn::negate(const CoefficientFn& a) {
    CoefficientFn fn;
    fn.nodes_.clear();
    fn.root_ = -1;
    fn.uses_var_ = false;
    fn.uses_theta_ = false;
    const int ra = fn.append_tree(a);
    fn.nodes_.push_back(Node{Op::Neg, FuncId::Sin, 0.0, ra, -1});
    fn.root_ = static_cast<int>(fn.nodes_.size()) - 1;
    return fn;
}

CoefficientFn CoefficientFn::power(const CoefficientFn& base, const CoefficientFn& exponent) {
    return combine(Op::Pow, base, exponent);
}

CoefficientFn CoefficientFn::call(FuncId fn_id, const CoefficientFn& arg) {
    CoefficientFn fn;
    fn.nodes_.clear();
    fn.root_ = -1;
    fn.uses_var_ = false;
    fn.uses_theta_ = false;
    const int ra = fn.append_tree(arg);
    fn.nodes_.push_back(Node{Op::Func, fn_id, 0.0, ra, -1});
    fn.root_ = static_cast<int>(fn.nodes_.size()) - 1;
    return fn;
}

namespace {
int op_precedence(int op_class) { return op_class; }
}  // namespace

void CoefficientFn::print_node(int idx, int parent_prec, bool right_child,
                               std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    int prec = 5;
    switch (n.op) {
        case Op::Add:
        case Op::Sub:
            prec = 1;
            break;
        case Op::Mul:
        case Op::Div:
            prec = 2;
            break;
        case Op::Neg:
            prec = 3;
            break;
        case Op::Pow:
            prec = 4;
            break;
        default:
            prec = 5;
            break;
    }
    // A right operand of -, / needs parens at equal precedence
    // (left-associativity); a left operand of ^ likewise (right-assoc).
    bool parens = prec < parent_prec;
    if (prec == parent_prec && right_child && (parent_prec == 1 || parent_prec == 2)) {
        parens = true;
    }
    if (prec == parent_prec && !right_child && parent_prec == 4) {
        parens = true;
    }
    if (parens) {
        out += '(';
    }
    switch (n.op) {
        case Op::Number:
            out += format_double(n.num);
            break;
        case Op::Var:
            out += var_name_;
            break;
        case Op::Theta:
            out += "theta";
            break;
        case Op::Neg:
            out += '-';
            print_node(n.a, op_precedence(3), true, out);
            break;
        case Op::Add:
            print_node(n.a, 1, false, out);
            out += " + ";
            print_node(n.b, 1, true, out);
            break;
        case Op::Sub:
            print_node(n.a, 1, false, out);
            out += " - ";
            print_node(n.b, 1, true, out);
            break;
        case Op::Mul:
            print_node(n.a, 2, false, out);
            out += "*";
            print_node(n.b, 2, true, out);
            break;
        case Op::Div:
            print_node(n.a, 2, false, out);
            out += "/";
            print_node(n.b, 2, true, out);
            break;
        case Op::Pow:
            print_node(n.a, 4, false, out);
            out += "^";
            print_node(n.b, 4, true, out);
            break;
        case Op::Func: {
            switch (n.fn) {
                case FuncId::Sin:
                    out += "sin";
                    break;
                case FuncId::Cos:
                    out += "cos";
                    break;
                case FuncId::Exp:
                    out += "exp";
                    break;
                case FuncId::Log:
                    out += "log";
                    break;
                case FuncId::Abs:
                    out += "abs";
                    break;
                case FuncId::Sqrt:
                    out += "sqrt";
                    break;
                case FuncId::Tanh:
                    out += "tanh";
                    break;
            }
            out += '(';
            print_node(n.a, 0, false, out);
            out += ')';
            break;
        }
    }
    if (parens) {
        out += ')';
    }
}

std::string CoefficientFn::print() const {
    std::string out;
    print_node(root_, 0, false, out);
    return out;
}

bool CoefficientFn::equal_node(int i, const CoefficientFn& other, int j) const {
    const Node& a = nodes_[static_cast<std::size_t>(i)];
    const Node& b = other.nodes_[static_cast<std::size_t>(j)];
    if (a.op != b.op) {
        return false;
    }
    switch (a.op) {
        case Op::Number:
            return a.num == b.num;
        case Op::Var:
            return var_name_ == other.var_name_;
        case Op::Theta:
            return true;
        case Op::Neg:
            return equal_node(a.a, other, b.a);
        case Op::Func:
            return a.fn == b.fn && equal_node(a.a, other, b.a);
        default:
            return equal_node(a.a, other, b.a) && equal_node(a.b, other, b.b);
    }
}

bool CoefficientFn::equal_tree(const CoefficientFn& other) const {
    return equal_node(root_, other, other.root_);
}

std::uint64_t CoefficientFn::hash() const {
    const std::string text = print();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace smallnoise
