#include "foldkit/lattice.hpp"

#include <algorithm>
#include <numeric>

namespace foldkit::lattice {

namespace {

Int abs_int(const Int& x) { return x < 0 ? Int(-x) : x; }

Int gcd_int(Int a, Int b) {
    a = abs_int(a);
    b = abs_int(b);
    while (b != 0) {
        Int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

LatticeMatrix identity(std::size_t n) {
    LatticeMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I.at(i, i) = 1;
    return I;
}

}  // namespace

bool is_primitive(const std::vector<Int>& v) {
    Int g = 0;
    for (const auto& x : v) g = gcd_int(g, x);
    if (g == 0) throw ZeroVectorError();
    return g == 1;
}

SmithResult smith_normal_form(const LatticeMatrix& A_in) {
    const std::size_t m = A_in.row_count();
    const std::size_t n = A_in.col_count();

    LatticeMatrix A = A_in;
    LatticeMatrix U = identity(m), U_inv = identity(m);
    LatticeMatrix V = identity(n), V_inv = identity(n);

    auto swap_rows = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t c = 0; c < n; ++c) std::swap(A.at(i, c), A.at(j, c));
        for (std::size_t c = 0; c < m; ++c) std::swap(U.at(i, c), U.at(j, c));
        for (std::size_t r = 0; r < m; ++r) std::swap(U_inv.at(r, i), U_inv.at(r, j));
    };
    auto swap_cols = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t r = 0; r < m; ++r) std::swap(A.at(r, i), A.at(r, j));
        for (std::size_t r = 0; r < n; ++r) std::swap(V.at(r, i), V.at(r, j));
        for (std::size_t c = 0; c < n; ++c) std::swap(V_inv.at(i, c), V_inv.at(j, c));
    };
    auto negate_row = [&](std::size_t i) {
        for (std::size_t c = 0; c < n; ++c) A.at(i, c) = -A.at(i, c);
        for (std::size_t c = 0; c < m; ++c) U.at(i, c) = -U.at(i, c);
        for (std::size_t r = 0; r < m; ++r) U_inv.at(r, i) = -U_inv.at(r, i);
    };
    // row_i += q * row_j
    auto add_row = [&](std::size_t i, std::size_t j, const Int& q) {
        if (q == 0) return;
        for (std::size_t c = 0; c < n; ++c) A.at(i, c) += q * A.at(j, c);
        for (std::size_t c = 0; c < m; ++c) U.at(i, c) += q * U.at(j, c);
        for (std::size_t r = 0; r < m; ++r) U_inv.at(r, j) -= q * U_inv.at(r, i);
    };
    // col_i += q * col_j
    auto add_col = [&](std::size_t i, std::size_t j, const Int& q) {
        if (q == 0) return;
        for (std::size_t r = 0; r < m; ++r) A.at(r, i) += q * A.at(r, j);
        for (std::size_t r = 0; r < n; ++r) V.at(r, i) += q * V.at(r, j);
        for (std::size_t c = 0; c < n; ++c) V_inv.at(j, c) -= q * V_inv.at(i, c);
    };

    const std::size_t steps = std::min(m, n);
    std::size_t t = 0;
    for (; t < steps; ++t) {
        // Find a nonzero pivot of minimal absolute value in the trailing block.
        std::size_t pi = t, pj = t;
        Int best = 0;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j) {
                if (A.at(i, j) == 0) continue;
                Int a = abs_int(A.at(i, j));
                if (best == 0 || a < best) {
                    best = a;
                    pi = i;
                    pj = j;
                }
            }
        if (best == 0) break;
        swap_rows(t, pi);
        swap_cols(t, pj);

        bool clean = false;
        while (!clean) {
            clean = true;
            // Reduce column t.
            for (std::size_t i = t + 1; i < m; ++i) {
                if (A.at(i, t) == 0) continue;
                Int q = A.at(i, t) / A.at(t, t);
                add_row(i, t, -q);
                if (A.at(i, t) != 0) {
                    swap_rows(t, i);  // remainder is strictly smaller; repeat
                    clean = false;
                }
            }
            // Reduce row t.
            for (std::size_t j = t + 1; j < n; ++j) {
                if (A.at(t, j) == 0) continue;
                Int q = A.at(t, j) / A.at(t, t);
                add_col(j, t, -q);
                if (A.at(t, j) != 0) {
                    swap_cols(t, j);
                    clean = false;
                }
            }
        }
        if (A.at(t, t) < 0) negate_row(t);

        // Enforce the divisibility chain d_t | entries of the trailing block.
        bool restart = false;
        for (std::size_t i = t + 1; i < m && !restart; ++i)
            for (std::size_t j = t + 1; j < n && !restart; ++j)
                if (A.at(i, j) % A.at(t, t) != 0) {
                    add_row(t, i, 1);
                    restart = true;
                }
        if (restart) {
            --t;  // redo this step with the enlarged row
            continue;
        }
    }

    SmithResult out;
    out.diagonal.resize(steps);
    out.rank = 0;
    for (std::size_t i = 0; i < steps; ++i) {
        out.diagonal[i] = A.at(i, i);
        if (out.diagonal[i] != 0) ++out.rank;
    }
    out.U = std::move(U);
    out.U_inv = std::move(U_inv);
    out.V = std::move(V);
    out.V_inv = std::move(V_inv);
    return out;
}

bool is_unimodular_basis(const LatticeMatrix& B) {
    const std::size_t k = B.row_count();
    const std::size_t n = B.col_count();
    if (k == 0) return true;  // empty basis spans the trivial subtorus
    if (k > n) throw DimensionError("more rows than ambient rank");
    SmithResult s = smith_normal_form(B);
    if (s.rank < k)
        throw RankDeficientError("rows are linearly dependent over Q");
    for (std::size_t i = 0; i < k; ++i)
        if (s.diagonal[i] != 1) return false;
    return true;
}

LatticeMatrix extend_to_basis(const LatticeMatrix& B) {
    const std::size_t k = B.row_count();
    const std::size_t n = B.col_count();
    bool uni = false;
    try {
        uni = is_unimodular_basis(B);
    } catch (const RankDeficientError&) {
        uni = false;
    }
    if (!uni) throw NotUnimodularError("rows are not a unimodular basis");

    // U B V = [I_k | 0]  =>  B = U^{-1} (first k rows of V^{-1}).
    // Stacking B on the last n-k rows of V^{-1} keeps |det| = 1.
    SmithResult s = smith_normal_form(B);
    LatticeMatrix M(n, n);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) M.at(i, j) = B.at(i, j);
    for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M.at(i, j) = s.V_inv.at(i, j);
    return M;
}

Int det_exact(const LatticeMatrix& A_in) {
    const std::size_t n = A_in.row_count();
    if (n != A_in.col_count()) throw DimensionError("determinant of non-square matrix");
    if (n == 0) return 1;

    // Bareiss fraction-free elimination over exact integers.
    std::vector<std::vector<Int>> a = A_in.rows();
    Int sign = 1;
    Int prev = 1;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        if (a[t][t] == 0) {
            std::size_t p = t + 1;
            while (p < n && a[p][t] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[t], a[p]);
            sign = -sign;
        }
        for (std::size_t i = t + 1; i < n; ++i)
            for (std::size_t j = t + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[t][t] - a[i][t] * a[t][j]) / prev;
        prev = a[t][t];
    }
    return sign * a[n - 1][n - 1];
}

void UnimodularCone::validate() const {
    if (normals.col_count() != apex.size())
        throw DimensionError("cone normals and apex disagree on ambient dimension");
    for (std::size_t i = 0; i < normals.row_count(); ++i)
        if (!is_primitive(normals.row(i)))
            throw NotUnimodularError("cone normal " + std::to_string(i) + " is not primitive");
    if (!is_unimodular_basis(normals))
        throw NotUnimodularError("cone normals are not a unimodular basis");
}

ConeMembership cone_contains(const UnimodularCone& cone, const std::vector<Rational>& eta) {
    if (eta.size() != cone.ambient_dim())
        throw DimensionError("point dimension does not match cone ambient dimension");
    ConeMembership out;
    out.member = true;
    for (std::size_t i = 0; i < cone.facet_count(); ++i) {
        Rational pairing = 0;
        for (std::size_t j = 0; j < eta.size(); ++j)
            pairing += (eta[j] - cone.apex[j]) * Rational(cone.normals.at(i, j));
        if (pairing < 0) out.member = false;
        else if (pairing == 0) out.facets.insert(i);
    }
    if (!out.member) out.facets.clear();
    return out;
}

ConeMembership cone_contains_approx(const UnimodularCone& cone, const std::vector<double>& eta,
                                    double tol) {
    if (eta.size() != cone.ambient_dim())
        throw DimensionError("point dimension does not match cone ambient dimension");
    ConeMembership out;
    out.member = true;
    for (std::size_t i = 0; i < cone.facet_count(); ++i) {
        double pairing = 0;
        for (std::size_t j = 0; j < eta.size(); ++j)
            pairing += (eta[j] - static_cast<double>(cone.apex[j])) *
                       static_cast<double>(cone.normals.at(i, j));
        if (pairing < -tol) out.member = false;
        else if (pairing <= tol) out.facets.insert(i);
    }
    if (!out.member) out.facets.clear();
    return out;
}

}  // namespace foldkit::lattice
