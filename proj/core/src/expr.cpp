#include "foldkit/expr.hpp"

#include <cctype>
#include <sstream>

namespace foldkit::expr {

namespace {

NodePtr make_node(Node n) { return std::make_shared<Node>(std::move(n)); }

bool is_constant(const Expression& e) { return e.node().kind == NodeKind::Constant; }

const Rational& const_value(const Expression& e) { return e.node().value; }

Expression make_binary(NodeKind kind, const Expression& a, const Expression& b) {
    Node n;
    n.kind = kind;
    n.a = a.ptr();
    n.b = b.ptr();
    return Expression(make_node(std::move(n)));
}

Rational pow_rational(const Rational& base, int exponent) {
    Rational acc(1);
    int n = exponent < 0 ? -exponent : exponent;
    for (int i = 0; i < n; ++i) acc *= base;
    if (exponent < 0) acc = Rational(1) / acc;
    return acc;
}

}  // namespace

Expression Expression::variable(const std::string& name) {
    Node n;
    n.kind = NodeKind::Variable;
    n.name = name;
    return Expression(make_node(std::move(n)));
}

bool Expression::equals(const Expression& other) const {
    struct Cmp {
        static bool eq(const Node& x, const Node& y) {
            if (x.kind != y.kind) return false;
            switch (x.kind) {
                case NodeKind::Constant: return x.value == y.value;
                case NodeKind::Variable: return x.name == y.name;
                case NodeKind::Pow: return x.exponent == y.exponent && eq(*x.a, *y.a);
                case NodeKind::Call: return x.func == y.func && eq(*x.a, *y.a);
                default: return eq(*x.a, *y.a) && eq(*x.b, *y.b);
            }
        }
    };
    return Cmp::eq(*root_, *other.root_);
}

std::set<std::string> Expression::variables() const {
    std::set<std::string> out;
    struct Walk {
        static void go(const Node& n, std::set<std::string>& out) {
            switch (n.kind) {
                case NodeKind::Constant: return;
                case NodeKind::Variable: out.insert(n.name); return;
                case NodeKind::Pow:
                case NodeKind::Call: go(*n.a, out); return;
                default:
                    go(*n.a, out);
                    go(*n.b, out);
            }
        }
    };
    Walk::go(*root_, out);
    return out;
}

Expression add(const Expression& a, const Expression& b) {
    if (is_constant(a) && is_constant(b))
        return Expression::constant(const_value(a) + const_value(b));
    if (is_constant(a) && const_value(a) == 0) return b;
    if (is_constant(b) && const_value(b) == 0) return a;
    return make_binary(NodeKind::Add, a, b);
}

Expression sub(const Expression& a, const Expression& b) {
    if (is_constant(a) && is_constant(b))
        return Expression::constant(const_value(a) - const_value(b));
    if (is_constant(b) && const_value(b) == 0) return a;
    return make_binary(NodeKind::Sub, a, b);
}

Expression mul(const Expression& a, const Expression& b) {
    if (is_constant(a) && is_constant(b))
        return Expression::constant(const_value(a) * const_value(b));
    if (is_constant(a)) {
        if (const_value(a) == 0) return Expression::constant(0);
        if (const_value(a) == 1) return b;
    }
    if (is_constant(b)) {
        if (const_value(b) == 0) return Expression::constant(0);
        if (const_value(b) == 1) return a;
    }
    return make_binary(NodeKind::Mul, a, b);
}

Expression div(const Expression& a, const Expression& b) {
    if (is_constant(b) && const_value(b) != 0) {
        if (is_constant(a)) return Expression::constant(const_value(a) / const_value(b));
        if (const_value(b) == 1) return a;
    }
    if (is_constant(a) && const_value(a) == 0 && !(is_constant(b) && const_value(b) == 0))
        return Expression::constant(0);
    return make_binary(NodeKind::Div, a, b);
}

Expression pow(const Expression& a, int exponent) {
    if (exponent == 1) return a;
    if (exponent == 0) return Expression::constant(1);
    if (is_constant(a) && !(const_value(a) == 0 && exponent < 0))
        return Expression::constant(pow_rational(const_value(a), exponent));
    Node n;
    n.kind = NodeKind::Pow;
    n.exponent = exponent;
    n.a = a.ptr();
    return Expression(make_node(std::move(n)));
}

Expression call(Func f, const Expression& arg) {
    Node n;
    n.kind = NodeKind::Call;
    n.func = f;
    n.a = arg.ptr();
    return Expression(make_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// Parser.
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>* declared)
        : text_(text), declared_(declared) {}

    Expression run() {
        Expression e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) throw SyntaxError(std::string("expected ") + what, pos_);
    }

    Expression parse_expr() {
        Expression e = parse_term();
        for (;;) {
            if (accept('+')) e = add(e, parse_term());
            else if (accept('-')) e = sub(e, parse_term());
            else return e;
        }
    }

    Expression parse_term() {
        Expression e = parse_factor();
        for (;;) {
            if (accept('*')) e = mul(e, parse_factor());
            else if (accept('/')) e = div(e, parse_factor());
            else return e;
        }
    }

    Expression parse_factor() {
        Expression base = parse_base();
        if (accept('^')) return pow(base, parse_integer());
        return base;
    }

    int parse_integer() {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && text_[pos_] == '-') {
            neg = true;
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw SyntaxError("expected integer exponent", pos_);
        long long value = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            value = value * 10 + (text_[pos_] - '0');
            if (value > 1'000'000) throw SyntaxError("exponent too large", start);
            ++pos_;
        }
        return static_cast<int>(neg ? -value : value);
    }

    Expression parse_base() {
        skip_ws();
        if (pos_ >= text_.size())
            throw SyntaxError("expected number, identifier or '('", pos_);
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (c == '(') {
            ++pos_;
            Expression e = parse_expr();
            expect(')', "')'");
            return e;
        }
        throw SyntaxError("expected number, identifier or '('", pos_);
    }

    Expression parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw SyntaxError("expected digits after decimal point", pos_);
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        return Expression::constant(parse_rational(text_.substr(start, pos_ - start)));
    }

    Expression parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (peek('(')) {
            Func f;
            if (name == "sqrt") f = Func::Sqrt;
            else if (name == "sin") f = Func::Sin;
            else if (name == "cos") f = Func::Cos;
            else if (name == "exp") f = Func::Exp;
            else if (name == "log") f = Func::Log;
            else throw UnknownFunctionError(name);
            expect('(', "'('");
            Expression arg = parse_expr();
            expect(')', "')'");
            return call(f, arg);
        }
        if (declared_ != nullptr) {
            bool found = false;
            for (const auto& v : *declared_)
                if (v == name) {
                    found = true;
                    break;
                }
            if (!found) throw UnknownVariableError(name);
        }
        return Expression::variable(name);
    }

    const std::string& text_;
    const std::vector<std::string>* declared_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression parse(const std::string& text) { return Parser(text, nullptr).run(); }

Expression parse(const std::string& text, const std::vector<std::string>& declared) {
    return Parser(text, &declared).run();
}

// ---------------------------------------------------------------------------
// Printer.  Precedence levels: expr 1, term 2, factor 3, base 4.
// Right operands of -,/ (and of +,* for structural round-tripping) are
// parenthesized when they sit at the same level.
// ---------------------------------------------------------------------------

namespace {

// Precedence of the printed text, not of the node: a non-integer rational
// constant prints as "p/q" and therefore sits at term level, and a negative
// constant prints as "0 - c" and is always parenthesized.
int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Constant:
            if (n.value < 0) return 0;
            return boost::multiprecision::denominator(n.value) == 1 ? 4 : 2;
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Pow: return 3;
        default: return 4;
    }
}

void print_node(const Node& n, std::ostream& os);

void print_operand(const Node& n, int min_prec, std::ostream& os) {
    bool parens = precedence(n) < min_prec;
    if (parens) os << '(';
    print_node(n, os);
    if (parens) os << ')';
}

void print_node(const Node& n, std::ostream& os) {
    switch (n.kind) {
        case NodeKind::Constant:
            if (n.value < 0) {
                os << "0 - " << rational_to_string(-n.value);
            } else {
                os << rational_to_string(n.value);
            }
            return;
        case NodeKind::Variable:
            os << n.name;
            return;
        case NodeKind::Add:
            print_operand(*n.a, 1, os);
            os << " + ";
            print_operand(*n.b, 2, os);
            return;
        case NodeKind::Sub:
            print_operand(*n.a, 1, os);
            os << " - ";
            print_operand(*n.b, 2, os);
            return;
        case NodeKind::Mul:
            print_operand(*n.a, 2, os);
            os << "*";
            print_operand(*n.b, 3, os);
            return;
        case NodeKind::Div:
            print_operand(*n.a, 2, os);
            os << "/";
            print_operand(*n.b, 3, os);
            return;
        case NodeKind::Pow:
            print_operand(*n.a, 4, os);
            os << "^" << n.exponent;
            return;
        case NodeKind::Call:
            switch (n.func) {
                case Func::Sqrt: os << "sqrt"; break;
                case Func::Sin: os << "sin"; break;
                case Func::Cos: os << "cos"; break;
                case Func::Exp: os << "exp"; break;
                case Func::Log: os << "log"; break;
            }
            os << '(';
            print_node(*n.a, os);
            os << ')';
            return;
    }
}

}  // namespace

std::string to_string(const Expression& e) {
    std::ostringstream os;
    // A bare negative literal is not derivable from the grammar, so a
    // top-level negative constant keeps its "(0 - c)" wrapper.
    print_operand(e.node(), 1, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Symbolic derivative and substitution.
// ---------------------------------------------------------------------------

Expression derivative(const Expression& e, const std::string& var) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Constant:
            return Expression::constant(0);
        case NodeKind::Variable:
            return Expression::constant(n.name == var ? 1 : 0);
        case NodeKind::Add:
            return add(derivative(Expression(n.a), var), derivative(Expression(n.b), var));
        case NodeKind::Sub:
            return sub(derivative(Expression(n.a), var), derivative(Expression(n.b), var));
        case NodeKind::Mul: {
            Expression a(n.a), b(n.b);
            return add(mul(derivative(a, var), b), mul(a, derivative(b, var)));
        }
        case NodeKind::Div: {
            Expression a(n.a), b(n.b);
            return div(sub(mul(derivative(a, var), b), mul(a, derivative(b, var))), pow(b, 2));
        }
        case NodeKind::Pow: {
            Expression a(n.a);
            return mul(mul(Expression::constant(n.exponent), pow(a, n.exponent - 1)),
                       derivative(a, var));
        }
        case NodeKind::Call: {
            Expression a(n.a);
            Expression da = derivative(a, var);
            switch (n.func) {
                case Func::Sqrt:
                    return div(da, mul(Expression::constant(2), call(Func::Sqrt, a)));
                case Func::Sin:
                    return mul(call(Func::Cos, a), da);
                case Func::Cos:
                    return mul(mul(Expression::constant(-1), call(Func::Sin, a)), da);
                case Func::Exp:
                    return mul(call(Func::Exp, a), da);
                case Func::Log:
                    return div(da, a);
            }
        }
    }
    throw Error("corrupt expression node");
}

Expression substitute(const Expression& e,
                      const std::unordered_map<std::string, Expression>& bindings) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Constant:
            return e;
        case NodeKind::Variable: {
            auto it = bindings.find(n.name);
            return it == bindings.end() ? e : it->second;
        }
        case NodeKind::Add:
            return add(substitute(Expression(n.a), bindings), substitute(Expression(n.b), bindings));
        case NodeKind::Sub:
            return sub(substitute(Expression(n.a), bindings), substitute(Expression(n.b), bindings));
        case NodeKind::Mul:
            return mul(substitute(Expression(n.a), bindings), substitute(Expression(n.b), bindings));
        case NodeKind::Div:
            return div(substitute(Expression(n.a), bindings), substitute(Expression(n.b), bindings));
        case NodeKind::Pow:
            return pow(substitute(Expression(n.a), bindings), n.exponent);
        case NodeKind::Call:
            return call(n.func, substitute(Expression(n.a), bindings));
    }
    throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// VectorExpression.
// ---------------------------------------------------------------------------

std::vector<double> VectorExpression::eval(const std::vector<double>& point) const {
    auto env = env_at<double>(point);
    std::vector<double> out(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) out[i] = components_[i].eval(env);
    return out;
}

std::vector<std::vector<double>> VectorExpression::jacobian(const std::vector<double>& point) const {
    std::vector<std::vector<double>> J(components_.size(),
                                       std::vector<double>(vars_.size(), 0.0));
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        auto env = env_at<Dual>(point);
        env[vars_[j]].d = 1.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            J[i][j] = components_[i].eval(env).d;
    }
    return J;
}

std::vector<double> VectorExpression::second_derivative(const std::vector<double>& point,
                                                        const std::vector<double>& u,
                                                        const std::vector<double>& v) const {
    if (u.size() != vars_.size() || v.size() != vars_.size())
        throw DimensionError("direction dimension does not match variable count");
    auto env = env_at<Dual2>(point);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        env[vars_[i]].du = u[i];
        env[vars_[i]].dv = v[i];
    }
    std::vector<double> out(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) out[i] = components_[i].eval(env).duv;
    return out;
}

}  // namespace foldkit::expr
