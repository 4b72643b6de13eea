#include "doctest.h"

#include <random>

#include "foldkit/lattice.hpp"

using namespace foldkit;
using lattice::LatticeMatrix;

namespace {

// Independent oracle: gcd of all maximal (k x k) minors, with the minor
// determinants computed by plain cofactor expansion.  No shared code with
// the Smith-normal-form path.
Int minor_det(const LatticeMatrix& B, const std::vector<std::size_t>& cols,
              std::vector<std::size_t> rows) {
    if (rows.size() == 1) return B.at(rows[0], cols[0]);
    Int acc = 0;
    int sign = 1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::size_t> sub_rows;
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != i) sub_rows.push_back(rows[r]);
        std::vector<std::size_t> sub_cols(cols.begin() + 1, cols.end());
        acc += sign * B.at(rows[i], cols[0]) * minor_det(B, sub_cols, sub_rows);
        sign = -sign;
    }
    return acc;
}

Int gcd_of_maximal_minors(const LatticeMatrix& B) {
    const std::size_t k = B.row_count();
    const std::size_t n = B.col_count();
    std::vector<std::size_t> rows(k);
    for (std::size_t i = 0; i < k; ++i) rows[i] = i;
    Int g = 0;
    std::vector<std::size_t> cols(k);
    // enumerate k-combinations of columns
    for (std::size_t i = 0; i < k; ++i) cols[i] = i;
    for (;;) {
        Int d = minor_det(B, cols, rows);
        if (d < 0) d = -d;
        if (d != 0) g = (g == 0 ? d : boost::multiprecision::gcd(g, d));
        bool advanced = false;
        for (std::size_t i = k; i-- > 0;) {
            if (cols[i] + (k - i) <= n - 1) {
                ++cols[i];
                for (std::size_t j = i + 1; j < k; ++j) cols[j] = cols[j - 1] + 1;
                advanced = true;
                break;
            }
        }
        if (!advanced) return g;
    }
}

LatticeMatrix mat(std::vector<std::vector<long long>> rows) {
    std::vector<std::vector<Int>> out;
    for (auto& r : rows) out.emplace_back(r.begin(), r.end());
    return LatticeMatrix(out);
}

}  // namespace

TEST_CASE("primitivity by gcd") {
    CHECK(lattice::is_primitive({Int(1), Int(2)}));
    CHECK_FALSE(lattice::is_primitive({Int(2), Int(4)}));
    CHECK(lattice::is_primitive({Int(0), Int(0), Int(-1)}));
    CHECK_THROWS_AS(lattice::is_primitive({Int(0), Int(0)}), ZeroVectorError);
}

TEST_CASE("unimodular basis recognition") {
    CHECK(lattice::is_unimodular_basis(mat({{1, 0, 0}, {0, 1, 0}})));
    CHECK_FALSE(lattice::is_unimodular_basis(mat({{2, 0}, {0, 1}})));
    CHECK(lattice::is_unimodular_basis(mat({{1, 1}, {1, 2}})));
    CHECK_FALSE(lattice::is_unimodular_basis(mat({{2, 0}})));
    CHECK_THROWS_AS(lattice::is_unimodular_basis(mat({{1, 1}, {2, 2}})), RankDeficientError);
}

TEST_CASE("smith normal form structure on random matrices") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> entry(-6, 6);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t m = dim(rng), n = dim(rng);
        LatticeMatrix A(m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) A.at(i, j) = entry(rng);
        auto s = lattice::smith_normal_form(A);

        // transforms are unimodular and mutually inverse
        CHECK((lattice::det_exact(s.U) == 1 || lattice::det_exact(s.U) == -1));
        CHECK((lattice::det_exact(s.V) == 1 || lattice::det_exact(s.V) == -1));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                Int acc = 0;
                for (std::size_t k = 0; k < m; ++k) acc += s.U.at(i, k) * s.U_inv.at(k, j);
                CHECK(acc == (i == j ? 1 : 0));
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Int acc = 0;
                for (std::size_t k = 0; k < n; ++k) acc += s.V.at(i, k) * s.V_inv.at(k, j);
                CHECK(acc == (i == j ? 1 : 0));
            }

        // U A V is the stated diagonal with a divisibility chain
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Int acc = 0;
                for (std::size_t k = 0; k < m; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        acc += s.U.at(i, k) * A.at(k, l) * s.V.at(l, j);
                CHECK(acc == (i == j && i < s.diagonal.size() ? s.diagonal[i] : 0));
            }
        for (std::size_t i = 0; i + 1 < s.diagonal.size(); ++i) {
            if (s.diagonal[i + 1] == 0) continue;
            CHECK(s.diagonal[i] != 0);
            CHECK(s.diagonal[i + 1] % s.diagonal[i] == 0);
        }
    }
}

TEST_CASE("unimodularity equals gcd-of-minors oracle") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> entry(-3, 3);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        LatticeMatrix B(2, 3);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 3; ++j) B.at(i, j) = entry(rng);
        bool tool;
        try {
            tool = lattice::is_unimodular_basis(B);
        } catch (const RankDeficientError&) {
            CHECK(gcd_of_maximal_minors(B) == 0);
            continue;
        }
        CHECK(tool == (gcd_of_maximal_minors(B) == 1));
        ++checked;
    }
    CHECK(checked > 1000);
}

TEST_CASE("extend_to_basis produces determinant +-1 completions") {
    auto axis = lattice::extend_to_basis(mat({{1, 0}}));
    CHECK(axis.row_count() == 2);
    CHECK(axis.at(0, 0) == 1);
    CHECK(axis.at(0, 1) == 0);
    Int d = lattice::det_exact(axis);
    CHECK((d == 1 || d == -1));

    auto diag = lattice::extend_to_basis(mat({{1, 1}}));
    CHECK(diag.at(0, 0) == 1);
    CHECK(diag.at(0, 1) == 1);
    d = lattice::det_exact(diag);
    CHECK((d == 1 || d == -1));

    CHECK_THROWS_AS(lattice::extend_to_basis(mat({{2, 0}})), NotUnimodularError);

    // random unimodular inputs: first rows preserved, |det| = 1, exact
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> small(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        // random 1- or 2-row unimodular basis in Z^3, built from a random
        // product of elementary matrices applied to the standard basis
        LatticeMatrix M(3, 3);
        for (std::size_t i = 0; i < 3; ++i) M.at(i, i) = 1;
        for (int step = 0; step < 6; ++step) {
            std::uniform_int_distribution<std::size_t> pick(0, 2);
            std::size_t a = pick(rng), b = pick(rng);
            if (a == b) continue;
            Int q = small(rng);
            for (std::size_t j = 0; j < 3; ++j) M.at(a, j) += q * M.at(b, j);
        }
        std::uniform_int_distribution<std::size_t> kk(1, 2);
        std::size_t k = kk(rng);
        std::vector<std::vector<Int>> rows;
        for (std::size_t i = 0; i < k; ++i) rows.push_back(M.row(i));
        LatticeMatrix B(rows);
        REQUIRE(lattice::is_unimodular_basis(B));
        auto E = lattice::extend_to_basis(B);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(E.at(i, j) == B.at(i, j));
        Int det = lattice::det_exact(E);
        CHECK((det == 1 || det == -1));
    }
}

TEST_CASE("cone membership with exact rationals") {
    lattice::UnimodularCone C{mat({{1, 0}, {0, 1}}), {Rational(0), Rational(0)}};
    C.validate();

    auto m = lattice::cone_contains(C, {Rational(0), Rational(3)});
    CHECK(m.member);
    CHECK(m.facets == std::set<std::size_t>{0});

    m = lattice::cone_contains(C, {Rational(0), Rational(0)});
    CHECK(m.member);
    CHECK(m.facets == std::set<std::size_t>{0, 1});

    m = lattice::cone_contains(C, {Rational(-1), Rational(1)});
    CHECK_FALSE(m.member);

    CHECK_THROWS_AS(lattice::cone_contains(C, {Rational(1)}), DimensionError);

    // bit-for-bit reproducibility of the decision
    for (int i = 0; i < 10; ++i) {
        auto again = lattice::cone_contains(C, {Rational(0), Rational(3)});
        CHECK(again.member);
        CHECK(again.facets == std::set<std::size_t>{0});
    }
}

TEST_CASE("cone validation rejects bad normals") {
    lattice::UnimodularCone imprimitive{mat({{2, 0}}), {Rational(0), Rational(0)}};
    CHECK_THROWS_AS(imprimitive.validate(), NotUnimodularError);
}
