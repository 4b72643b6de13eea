#include "doctest.h"

#include <cmath>
#include <random>

#include "foldkit/singularity.hpp"

using namespace foldkit;
using expr::VectorExpression;
using singularity::FoldVerdict;

namespace {

sampling::Domain plane_domain(double lo, double hi, std::vector<std::string> vars) {
    sampling::Domain d;
    d.vars = std::move(vars);
    for (std::size_t i = 0; i < d.vars.size(); ++i) d.bounds.push_back({lo, hi});
    return d;
}

VectorExpression parabola_fold() {
    return {{expr::parse("x"), expr::parse("y^2")}, {"x", "y"}};
}

}  // namespace

TEST_CASE("(x, y^2) on the plane folds along the x-axis") {
    auto f = parabola_fold();
    sampling::Sampler s(plane_domain(-1.0, 1.0, {"x", "y"}), 42);
    auto cert = singularity::is_fold_map(f, s, 60);
    REQUIRE(cert.verdict == FoldVerdict::IsFold);
    REQUIRE(!cert.fold_points.empty());
    for (const auto& fp : cert.fold_points) {
        CHECK(std::abs(fp.point[1]) < 1e-6);  // locus y = 0
        CHECK(std::abs(fp.det_value) < 1e-8);
        CHECK(fp.margin == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(std::abs(fp.kernel[1]) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("(x, y^3) is rejected: determinant vanishes without transversality") {
    VectorExpression f({expr::parse("x"), expr::parse("y^3")}, {"x", "y"});
    sampling::Sampler s(plane_domain(-1.0, 1.0, {"x", "y"}), 42);
    auto cert = singularity::is_fold_map(f, s, 60);
    CHECK(cert.verdict == FoldVerdict::NotFold);
    for (const auto& fp : cert.fold_points) CHECK(fp.margin < 1e-4);
}

TEST_CASE("(x, y^2) on the half plane y >= 0 is not a fold map") {
    auto f = parabola_fold();
    sampling::Domain d = plane_domain(-1.0, 1.0, {"x", "y"});
    d.bounds[1] = {0.0, 1.0};
    d.halfspaces.push_back(expr::parse("y"));
    sampling::Sampler s(d, 42);
    auto cert = singularity::is_fold_map(f, s, 60);
    CHECK(cert.verdict == FoldVerdict::NotFold);
    // the failure is stratum-wise: det = 2y restricted to {y = 0} is identically 0
    bool saw_stratum_failure = false;
    for (const auto& fp : cert.fold_points)
        if (!fp.stratum.empty() && fp.stratum_margin < 1e-4) saw_stratum_failure = true;
    CHECK(saw_stratum_failure);
}

TEST_CASE("sphere chart folds along the equator") {
    VectorExpression f({expr::parse("sqrt(1 - y^2 - z^2)"), expr::parse("y")}, {"y", "z"});
    sampling::Sampler s(plane_domain(-0.6, 0.6, {"y", "z"}), 42);
    auto cert = singularity::is_fold_map(f, s, 60);
    REQUIRE(cert.verdict == FoldVerdict::IsFold);
    REQUIRE(!cert.fold_points.empty());
    for (const auto& fp : cert.fold_points) {
        CHECK(std::abs(fp.point[1]) < 1e-6);  // z = 0
        CHECK(std::abs(fp.det_value) < 1e-8);
        CHECK(fp.margin > 1e-4);
        // kernel is d/dz
        CHECK(std::abs(fp.kernel[1]) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("det gradient matches hand computation") {
    auto f = parabola_fold();
    auto [d, g] = singularity::det_df_with_gradient(f, {0.3, 0.5});
    CHECK(d == doctest::Approx(1.0));  // det = 2y at y = 0.5
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("verdicts survive affine volume-preserving precomposition") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> shear(-2, 2);
    std::uniform_int_distribution<int> shift_cents(-20, 20);
    for (int trial = 0; trial < 8; ++trial) {
        // phi(x, y) = (x + a*y + sx, y + sy), det(d phi) = 1
        int a = shear(rng);
        Rational sx(shift_cents(rng), 100), sy(shift_cents(rng), 100);
        std::unordered_map<std::string, expr::Expression> binding{
            {"x", expr::add(expr::add(expr::parse("x"),
                                      expr::mul(expr::Expression::constant(a), expr::parse("y"))),
                            expr::Expression::constant(sx))},
            {"y", expr::add(expr::parse("y"), expr::Expression::constant(sy))}};

        auto fold = parabola_fold();
        std::vector<expr::Expression> comps;
        for (const auto& c : fold.components()) comps.push_back(expr::substitute(c, binding));
        VectorExpression composed(comps, {"x", "y"});

        sampling::Sampler s(plane_domain(-1.0, 1.0, {"x", "y"}), 1234 + trial);
        auto cert = singularity::is_fold_map(composed, s, 40);
        CHECK(cert.verdict == FoldVerdict::IsFold);

        VectorExpression cubic({expr::parse("x"), expr::parse("y^3")}, {"x", "y"});
        std::vector<expr::Expression> comps3;
        for (const auto& c : cubic.components()) comps3.push_back(expr::substitute(c, binding));
        sampling::Sampler s3(plane_domain(-1.0, 1.0, {"x", "y"}), 1234 + trial);
        auto cert3 = singularity::is_fold_map(VectorExpression(comps3, {"x", "y"}), s3, 40);
        CHECK(cert3.verdict == FoldVerdict::NotFold);
    }
}

TEST_CASE("fold factorization of the standard model is exact") {
    VectorExpression f({expr::parse("x"), expr::parse("t^2")}, {"x", "t"});
    auto fac = singularity::fold_factorization(f, {0.0, 0.0}, 0.4, 9);
    CHECK(fac.residual_max < 1e-12);
    CHECK(fac.transverse_margin_min > 0.5);
    // F == (0, 1) in world coordinates
    for (const auto& F : fac.normal_term) {
        CHECK(F[0] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(std::abs(F[1]) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("fold factorization with x-dependent quadratic term") {
    VectorExpression f({expr::parse("x"), expr::parse("t^2 + t^2*x")}, {"x", "t"});
    auto fac = singularity::fold_factorization(f, {0.0, 0.0}, 0.3, 9);
    CHECK(fac.residual_max < 1e-10);
}

TEST_CASE("cubic kernel direction is rejected") {
    VectorExpression f({expr::parse("x"), expr::parse("t^3")}, {"x", "t"});
    CHECK_THROWS_AS(singularity::fold_factorization(f, {0.0, 0.0}, 0.3, 9),
                    singularity::KernelNotTransverseError);
}

TEST_CASE("factorization residual drops at fourth order for even maps") {
    // analytic map with even t-dependence: the quadratic model misses only
    // the t^4 term, so halving the window divides the residual by ~16
    singularity::Tolerances loose;
    loose.residual = 1.0;
    VectorExpression f({expr::add(expr::parse("x"), expr::parse("t^2*sin(x)")),
                        expr::parse("t^2 + t^2*x + t^4")},
                       {"x", "t"});
    auto coarse = singularity::fold_factorization(f, {0.0, 0.0}, 0.4, 9, loose);
    auto fine = singularity::fold_factorization(f, {0.0, 0.0}, 0.2, 9, loose);
    CHECK(coarse.residual_max > 0.0);
    double ratio = coarse.residual_max / fine.residual_max;
    CHECK(ratio > 10.0);  // fourth-order scaling gives 16
    CHECK(ratio < 24.0);
}

TEST_CASE("chi-Morse analysis of sections against a connection") {
    // f(s) = s^2/2 with slope field a == 1: one chi-critical point at s = 1
    auto report = singularity::chi_morse_check(expr::parse("s^2/2"), "s",
                                               expr::Expression::constant(1), "s", "t",
                                               -2.0, 3.0);
    CHECK(report.chi_morse);
    REQUIRE(report.critical_points.size() == 1);
    CHECK(report.critical_points[0].s == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(report.critical_points[0].g_prime == doctest::Approx(1.0).epsilon(1e-8));

    // f(s) = s against a == 1: tangent to the horizontal foliation everywhere
    auto degenerate = singularity::chi_morse_check(expr::parse("s"), "s",
                                                   expr::Expression::constant(1), "s", "t",
                                                   -1.0, 1.0);
    CHECK_FALSE(degenerate.chi_morse);
    CHECK(degenerate.degenerate);

    // a == 0 recovers the ordinary Morse test
    auto morse = singularity::chi_morse_check(expr::parse("s^2/2"), "s",
                                              expr::Expression::constant(0), "s", "t",
                                              -1.0, 1.0);
    CHECK(morse.chi_morse);
    REQUIRE(morse.critical_points.size() == 1);
    CHECK(morse.critical_points[0].s == doctest::Approx(0.0));
    CHECK(morse.critical_points[0].g_prime == doctest::Approx(1.0));
}
