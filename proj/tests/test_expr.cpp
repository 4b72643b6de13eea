#include "doctest.h"

#include <cmath>
#include <random>

#include "foldkit/expr.hpp"

using namespace foldkit;
using expr::Expression;
using expr::VectorExpression;

namespace {

double eval1(const Expression& e, const std::string& var, double x) {
    return e.eval<double>({{var, x}});
}

// Random polynomial AST over the given variables (no div/functions, so the
// finite-difference oracle never leaves the domain).
Expression random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars,
                             int depth) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 5);
    switch (kind(rng)) {
        case 0: {
            std::uniform_int_distribution<int> c(-4, 4);
            return Expression::constant(c(rng));
        }
        case 1: {
            std::uniform_int_distribution<std::size_t> v(0, vars.size() - 1);
            return Expression::variable(vars[v(rng)]);
        }
        case 2:
            return expr::add(random_polynomial(rng, vars, depth - 1),
                             random_polynomial(rng, vars, depth - 1));
        case 3:
            return expr::sub(random_polynomial(rng, vars, depth - 1),
                             random_polynomial(rng, vars, depth - 1));
        case 4:
            return expr::mul(random_polynomial(rng, vars, depth - 1),
                             random_polynomial(rng, vars, depth - 1));
        default: {
            std::uniform_int_distribution<int> p(0, 3);
            return expr::pow(random_polynomial(rng, vars, depth - 1), p(rng));
        }
    }
}

// Random AST over the full grammar for print/parse round-tripping.
Expression random_ast(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 7);
    switch (kind(rng)) {
        case 0: {
            std::uniform_int_distribution<int> num(-9, 9);
            std::uniform_int_distribution<int> den(1, 5);
            return Expression::constant(Rational(num(rng), den(rng)));
        }
        case 1: {
            std::uniform_int_distribution<std::size_t> v(0, vars.size() - 1);
            return Expression::variable(vars[v(rng)]);
        }
        case 2:
            return expr::add(random_ast(rng, vars, depth - 1), random_ast(rng, vars, depth - 1));
        case 3:
            return expr::sub(random_ast(rng, vars, depth - 1), random_ast(rng, vars, depth - 1));
        case 4:
            return expr::mul(random_ast(rng, vars, depth - 1), random_ast(rng, vars, depth - 1));
        case 5:
            return expr::div(random_ast(rng, vars, depth - 1), random_ast(rng, vars, depth - 1));
        case 6: {
            std::uniform_int_distribution<int> p(-3, 3);
            return expr::pow(random_ast(rng, vars, depth - 1), p(rng));
        }
        default: {
            std::uniform_int_distribution<int> f(0, 4);
            return expr::call(static_cast<expr::Func>(f(rng)), random_ast(rng, vars, depth - 1));
        }
    }
}

}  // namespace

TEST_CASE("parse and evaluate basic expressions") {
    auto e = expr::parse("x1*x1 + 2");
    CHECK(eval1(e, "x1", 3.0) == doctest::Approx(11.0));

    auto s = expr::parse("sqrt(1 - y^2 - z^2)");
    CHECK(s.eval<double>({{"y", 0.0}, {"z", 0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        expr::parse("x1 +* 2");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.offset == 4);
    }
    CHECK_THROWS_AS(expr::parse("foo(2)"), UnknownFunctionError);
    CHECK_THROWS_AS(expr::parse("x + q", std::vector<std::string>{"x"}), UnknownVariableError);
    CHECK_NOTHROW(expr::parse("x + q"));
    CHECK_THROWS_AS(expr::parse("x +"), SyntaxError);
    CHECK_THROWS_AS(expr::parse("(x"), SyntaxError);
    CHECK_THROWS_AS(expr::parse("x^y"), SyntaxError);
}

TEST_CASE("domain errors at evaluation") {
    CHECK_THROWS_AS(expr::parse("sqrt(0 - 1)").eval<double>({}), DomainError);
    CHECK_THROWS_AS(expr::parse("1/x").eval<double>({{"x", 0.0}}), DomainError);
    CHECK_THROWS_AS(expr::parse("log(x)").eval<double>({{"x", 0.0}}), DomainError);
    CHECK_THROWS_AS(expr::parse("x^-2").eval<double>({{"x", 0.0}}), DomainError);
}

TEST_CASE("jacobian on closed forms") {
    VectorExpression f({expr::parse("x"), expr::parse("y^2")}, {"x", "y"});
    auto J = f.jacobian({1.0, 3.0});
    CHECK(J[0][0] == doctest::Approx(1.0));
    CHECK(J[0][1] == doctest::Approx(0.0));
    CHECK(J[1][0] == doctest::Approx(0.0));
    CHECK(J[1][1] == doctest::Approx(6.0));

    // chart map of the sphere near (1,0,0)
    VectorExpression chart({expr::parse("sqrt(1 - y^2 - z^2)"), expr::parse("y")}, {"y", "z"});
    auto Jc = chart.jacobian({0.0, 0.0});
    CHECK(Jc[0][0] == doctest::Approx(0.0));
    CHECK(Jc[0][1] == doctest::Approx(0.0));
    CHECK(Jc[1][0] == doctest::Approx(1.0));
    CHECK(Jc[1][1] == doctest::Approx(0.0));
    CHECK(Jc[0][0] * Jc[1][1] - Jc[0][1] * Jc[1][0] == doctest::Approx(0.0));
}

TEST_CASE("jacobian matches central finite differences") {
    // Oracle: (f(p + h e_j) - f(p - h e_j)) / 2h with h = 1e-5.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<std::string> vars{"x", "y", "z"};
    const double h = 1e-5;
    for (int trial = 0; trial < 1000; ++trial) {
        VectorExpression f({random_polynomial(rng, vars, 4)}, vars);
        std::vector<double> p{coord(rng), coord(rng), coord(rng)};
        auto J = f.jacobian(p);
        for (std::size_t j = 0; j < vars.size(); ++j) {
            auto pp = p, pm = p;
            pp[j] += h;
            pm[j] -= h;
            double fd = (f.eval(pp)[0] - f.eval(pm)[0]) / (2.0 * h);
            double scale = std::max({1.0, std::abs(fd), std::abs(J[0][j])});
            CHECK(std::abs(J[0][j] - fd) / scale < 1e-6);
        }
    }
}

TEST_CASE("second derivative values and symmetry") {
    VectorExpression f({expr::parse("x"), expr::parse("y^2")}, {"x", "y"});
    auto d2 = f.second_derivative({0.0, 0.0}, {0.0, 1.0}, {0.0, 1.0});
    CHECK(d2[0] == doctest::Approx(0.0));
    CHECK(d2[1] == doctest::Approx(2.0));

    VectorExpression g({expr::parse("x"), expr::parse("y^3")}, {"x", "y"});
    auto d2g = g.second_derivative({0.0, 0.0}, {0.0, 1.0}, {0.0, 1.0});
    CHECK(d2g[0] == doctest::Approx(0.0));
    CHECK(d2g[1] == doctest::Approx(0.0));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-1.5, 1.5);
    std::vector<std::string> vars{"x", "y"};
    for (int trial = 0; trial < 200; ++trial) {
        VectorExpression h({random_polynomial(rng, vars, 4)}, vars);
        std::vector<double> p{coord(rng), coord(rng)};
        std::vector<double> u{coord(rng), coord(rng)};
        std::vector<double> v{coord(rng), coord(rng)};
        auto uv = h.second_derivative(p, u, v);
        auto vu = h.second_derivative(p, v, u);
        CHECK(std::abs(uv[0] - vu[0]) < 1e-10 * std::max(1.0, std::abs(uv[0])));
    }
}

TEST_CASE("print/parse round trip is structural identity") {
    std::mt19937_64 rng(7);
    std::vector<std::string> vars{"x", "y1", "long_name"};
    for (int trial = 0; trial < 500; ++trial) {
        Expression e = random_ast(rng, vars, 4);
        Expression back = expr::parse(expr::to_string(e));
        CHECK(back.equals(e));
    }
    // and parse . print is the identity on canonical text
    for (const char* text : {"x + y*z", "sqrt(x)^2/3", "(x + 1)*(x - 1)", "sin(cos(x))"}) {
        Expression e = expr::parse(text);
        CHECK(expr::parse(expr::to_string(e)).equals(e));
    }
}

TEST_CASE("evaluation is pure") {
    auto e = expr::parse("sin(x)*exp(y) + x/7 - sqrt(x^2 + 1)");
    std::unordered_map<std::string, double> env{{"x", 0.731}, {"y", -1.25}};
    double first = e.eval(env);
    for (int i = 0; i < 32; ++i) CHECK(e.eval(env) == first);
}

TEST_CASE("symbolic derivative agrees with dual numbers") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coord(-1.2, 1.2);
    std::vector<std::string> vars{"x", "y"};
    for (int trial = 0; trial < 200; ++trial) {
        Expression e = random_polynomial(rng, vars, 4);
        Expression dx = expr::derivative(e, "x");
        std::unordered_map<std::string, double> env{{"x", coord(rng)}, {"y", coord(rng)}};
        std::unordered_map<std::string, expr::Dual> denv{
            {"x", {env["x"], 1.0}}, {"y", {env["y"], 0.0}}};
        CHECK(dx.eval(env) == doctest::Approx(e.eval(denv).d).epsilon(1e-9));
    }
    // chain rules through the function heads
    Expression e = expr::parse("sqrt(exp(sin(x)) + 2)");
    Expression dx = expr::derivative(e, "x");
    std::unordered_map<std::string, expr::Dual> denv{{"x", {0.4, 1.0}}};
    std::unordered_map<std::string, double> env{{"x", 0.4}};
    CHECK(dx.eval(env) == doctest::Approx(e.eval(denv).d).epsilon(1e-12));
}

TEST_CASE("substitution composes maps") {
    Expression e = expr::parse("x^2 + y");
    auto composed = expr::substitute(
        e, {{"x", expr::parse("u + v")}, {"y", expr::parse("u*v")}});
    std::unordered_map<std::string, double> env{{"u", 2.0}, {"v", 3.0}};
    CHECK(composed.eval(env) == doctest::Approx(31.0));
}
