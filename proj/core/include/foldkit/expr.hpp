#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "foldkit/errors.hpp"
#include "foldkit/rational.hpp"

namespace foldkit::expr {

// ---------------------------------------------------------------------------
// Forward-mode scalars.
//
// Dual carries one directional derivative, Dual2 carries two directions and
// their mixed second derivative (truncated Taylor algebra in two nilpotents).
// Both are exact for polynomial expressions up to float rounding.
// ---------------------------------------------------------------------------

// Guarded double arithmetic so that plain evaluation reports DomainError
// exactly where the dual-number overloads do.
inline double checked_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
inline double sqrt(double a) {
    if (a < 0.0) throw DomainError("sqrt of negative value");
    return std::sqrt(a);
}
inline double sin(double a) { return std::sin(a); }
inline double cos(double a) { return std::cos(a); }
inline double exp(double a) { return std::exp(a); }
inline double log(double a) {
    if (a <= 0.0) throw DomainError("log of non-positive value");
    return std::log(a);
}

struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    if (b.v == 0.0) throw DomainError("division by zero");
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual sqrt(Dual a) {
    if (a.v < 0.0) throw DomainError("sqrt of negative value");
    if (a.v == 0.0 && a.d != 0.0) throw DomainError("sqrt not differentiable at zero");
    double s = std::sqrt(a.v);
    return {s, a.d == 0.0 ? 0.0 : a.d / (2.0 * s)};
}
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual exp(Dual a) {
    double e = std::exp(a.v);
    return {e, e * a.d};
}
inline Dual log(Dual a) {
    if (a.v <= 0.0) throw DomainError("log of non-positive value");
    return {std::log(a.v), a.d / a.v};
}

struct Dual2 {
    double v = 0.0;
    double du = 0.0;
    double dv = 0.0;
    double duv = 0.0;

    Dual2() = default;
    Dual2(double value) : v(value) {}
    Dual2(double value, double du_, double dv_, double duv_ = 0.0)
        : v(value), du(du_), dv(dv_), duv(duv_) {}
};

inline Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.du + b.du, a.dv + b.dv, a.duv + b.duv}; }
inline Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.du - b.du, a.dv - b.dv, a.duv - b.duv}; }
inline Dual2 operator*(Dual2 a, Dual2 b) {
    return {a.v * b.v,
            a.du * b.v + a.v * b.du,
            a.dv * b.v + a.v * b.dv,
            a.duv * b.v + a.du * b.dv + a.dv * b.du + a.v * b.duv};
}
// Chain rule through a scalar function with first and second derivative.
inline Dual2 lift(Dual2 a, double f, double f1, double f2) {
    return {f, f1 * a.du, f1 * a.dv, f1 * a.duv + f2 * a.du * a.dv};
}
inline Dual2 operator/(Dual2 a, Dual2 b) {
    if (b.v == 0.0) throw DomainError("division by zero");
    Dual2 inv = lift(b, 1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v));
    return a * inv;
}
inline Dual2 sqrt(Dual2 a) {
    if (a.v < 0.0) throw DomainError("sqrt of negative value");
    if (a.v == 0.0 && (a.du != 0.0 || a.dv != 0.0 || a.duv != 0.0))
        throw DomainError("sqrt not differentiable at zero");
    if (a.v == 0.0) return {0.0};
    double s = std::sqrt(a.v);
    return lift(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Dual2 sin(Dual2 a) { return lift(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Dual2 cos(Dual2 a) { return lift(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Dual2 exp(Dual2 a) {
    double e = std::exp(a.v);
    return lift(a, e, e, e);
}
inline Dual2 log(Dual2 a) {
    if (a.v <= 0.0) throw DomainError("log of non-positive value");
    return lift(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

inline Dual checked_div(Dual a, Dual b) { return a / b; }
inline Dual2 checked_div(Dual2 a, Dual2 b) { return a / b; }

template <class T>
T pow_int(T base, int exponent) {
    if (exponent == 0) return T(1.0);
    bool negative = exponent < 0;
    long long n = negative ? -static_cast<long long>(exponent) : exponent;
    T acc(1.0);
    T b = base;
    while (n > 0) {
        if (n & 1) acc = acc * b;
        b = b * b;
        n >>= 1;
    }
    if (negative) return checked_div(T(1.0), acc);
    return acc;
}

// ---------------------------------------------------------------------------
// Expression AST.
//
// Operators +,-,*,/,^(integer) and functions sqrt,sin,cos,exp,log over named
// variables and exact rational constants.  Nodes are immutable and shared.
// ---------------------------------------------------------------------------

enum class NodeKind : std::uint8_t { Constant, Variable, Add, Sub, Mul, Div, Pow, Call };
enum class Func : std::uint8_t { Sqrt, Sin, Cos, Exp, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    Rational value;     // Constant
    std::string name;   // Variable
    Func func{};        // Call
    int exponent = 0;   // Pow
    NodePtr a, b;       // operands (Call and Pow use `a` only)
};

class Expression {
public:
    Expression() : root_(constant_node(0)) {}
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    static Expression constant(const Rational& r) { return Expression(constant_node(r)); }
    static Expression constant(long long n) { return Expression(constant_node(Rational(n))); }
    static Expression variable(const std::string& name);

    const Node& node() const { return *root_; }
    const NodePtr& ptr() const { return root_; }

    /// Structural equality of ASTs.
    bool equals(const Expression& other) const;

    /// Set of variable names occurring in the expression.
    std::set<std::string> variables() const;

    template <class T>
    T eval(const std::unordered_map<std::string, T>& env) const {
        return eval_node<T>(*root_, env);
    }

private:
    static NodePtr constant_node(const Rational& r) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Constant;
        n->value = r;
        return n;
    }

    template <class T>
    static T eval_node(const Node& n, const std::unordered_map<std::string, T>& env) {
        switch (n.kind) {
            case NodeKind::Constant:
                return T(static_cast<double>(n.value));
            case NodeKind::Variable: {
                auto it = env.find(n.name);
                if (it == env.end()) throw UnknownVariableError(n.name);
                return it->second;
            }
            case NodeKind::Add: return eval_node<T>(*n.a, env) + eval_node<T>(*n.b, env);
            case NodeKind::Sub: return eval_node<T>(*n.a, env) - eval_node<T>(*n.b, env);
            case NodeKind::Mul: return eval_node<T>(*n.a, env) * eval_node<T>(*n.b, env);
            case NodeKind::Div:
                return checked_div(eval_node<T>(*n.a, env), eval_node<T>(*n.b, env));
            case NodeKind::Pow: {
                T base = eval_node<T>(*n.a, env);
                return pow_int(base, n.exponent);
            }
            case NodeKind::Call: {
                T arg = eval_node<T>(*n.a, env);
                switch (n.func) {
                    case Func::Sqrt: return sqrt(arg);
                    case Func::Sin: return sin(arg);
                    case Func::Cos: return cos(arg);
                    case Func::Exp: return exp(arg);
                    case Func::Log: return log(arg);
                }
            }
        }
        throw Error("corrupt expression node");
    }

    NodePtr root_;
};

// Smart constructors.  Constant subtrees fold to exact rationals (except a
// division by a zero constant, which stays symbolic and fails at evaluation).
Expression add(const Expression& a, const Expression& b);
Expression sub(const Expression& a, const Expression& b);
Expression mul(const Expression& a, const Expression& b);
Expression div(const Expression& a, const Expression& b);
Expression pow(const Expression& a, int exponent);
Expression call(Func f, const Expression& arg);

inline Expression operator+(const Expression& a, const Expression& b) { return add(a, b); }
inline Expression operator-(const Expression& a, const Expression& b) { return sub(a, b); }
inline Expression operator*(const Expression& a, const Expression& b) { return mul(a, b); }
inline Expression operator/(const Expression& a, const Expression& b) { return div(a, b); }

/// Parses `text` against the grammar
///   expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
///   factor := base ('^' integer)? ;
///   base := number | ident | func '(' expr ')' | '(' expr ')'
/// Throws SyntaxError (with byte offset), UnknownFunctionError.
Expression parse(const std::string& text);

/// As parse(text); additionally rejects variables not in `declared`
/// with UnknownVariableError.
Expression parse(const std::string& text, const std::vector<std::string>& declared);

/// Canonical printing; parse(to_string(e)) is structurally equal to e.
std::string to_string(const Expression& e);

/// Partial derivative with respect to `var`, with light simplification
/// (constant folding and 0/1 unit laws only).
Expression derivative(const Expression& e, const std::string& var);

/// Substitutes expressions for variables.
Expression substitute(const Expression& e,
                      const std::unordered_map<std::string, Expression>& bindings);

// ---------------------------------------------------------------------------
// Vector-valued expressions: maps f : R^m -> R^n with an explicit ordered
// variable list.  These carry every coordinate map in the toolkit.
// ---------------------------------------------------------------------------

class VectorExpression {
public:
    VectorExpression() = default;
    VectorExpression(std::vector<Expression> components, std::vector<std::string> vars)
        : components_(std::move(components)), vars_(std::move(vars)) {}

    std::size_t output_dim() const { return components_.size(); }
    std::size_t input_dim() const { return vars_.size(); }
    const std::vector<Expression>& components() const { return components_; }
    const std::vector<std::string>& vars() const { return vars_; }

    std::vector<double> eval(const std::vector<double>& point) const;

    /// Entry (i,j) = d f_i / d x_j at `point`, via forward-mode duals.
    std::vector<std::vector<double>> jacobian(const std::vector<double>& point) const;

    /// D^2 f_p(u, v): the bilinear second derivative applied to directions
    /// u and v.  Symmetric in (u, v) up to rounding.
    std::vector<double> second_derivative(const std::vector<double>& point,
                                          const std::vector<double>& u,
                                          const std::vector<double>& v) const;

private:
    template <class T>
    std::unordered_map<std::string, T> env_at(const std::vector<double>& point) const {
        if (point.size() != vars_.size())
            throw DimensionError("point dimension does not match variable count");
        std::unordered_map<std::string, T> env;
        env.reserve(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) env.emplace(vars_[i], T(point[i]));
        return env;
    }

    std::vector<Expression> components_;
    std::vector<std::string> vars_;
};

}  // namespace foldkit::expr
