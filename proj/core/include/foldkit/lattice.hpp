#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "foldkit/errors.hpp"
#include "foldkit/rational.hpp"

namespace foldkit::lattice {

/// Integer matrix whose rows are lattice vectors in Z^n.
class LatticeMatrix {
public:
    LatticeMatrix() = default;
    LatticeMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows, std::vector<Int>(cols, 0)), cols_(cols) {}
    explicit LatticeMatrix(std::vector<std::vector<Int>> rows) : rows_(std::move(rows)) {
        cols_ = rows_.empty() ? 0 : rows_[0].size();
        for (const auto& r : rows_)
            if (r.size() != cols_) throw DimensionError("ragged lattice matrix");
    }

    std::size_t row_count() const { return rows_.size(); }
    std::size_t col_count() const { return cols_; }
    Int& at(std::size_t i, std::size_t j) { return rows_[i][j]; }
    const Int& at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
    const std::vector<Int>& row(std::size_t i) const { return rows_[i]; }
    const std::vector<std::vector<Int>>& rows() const { return rows_; }

    bool operator==(const LatticeMatrix& o) const = default;

private:
    std::vector<std::vector<Int>> rows_;
    std::size_t cols_ = 0;
};

/// gcd of |entries| is 1.  Throws ZeroVectorError on the zero vector.
bool is_primitive(const std::vector<Int>& v);

/// Smith normal form U*A*V = diag(d_1..d_r, 0..), with all transforms
/// unimodular and d_1 | d_2 | ... | d_r, d_i > 0.
struct SmithResult {
    std::vector<Int> diagonal;  // min(rows, cols) entries, zeros included
    LatticeMatrix U, U_inv;     // rows x rows
    LatticeMatrix V, V_inv;     // cols x cols
    std::size_t rank = 0;
};
SmithResult smith_normal_form(const LatticeMatrix& A);

/// True iff the SNF of B (k <= n rows) is [I_k | 0]; equivalently the rows
/// are a Z-basis of the integral lattice of a subtorus.  Rows dependent over
/// Q are reported distinctly via RankDeficientError.
bool is_unimodular_basis(const LatticeMatrix& B);

/// Completes a unimodular basis B (k rows in Z^n) to a square matrix with
/// determinant +-1 whose first k rows are B.  The remaining rows generate
/// the complementary subtorus.  Throws NotUnimodularError.
LatticeMatrix extend_to_basis(const LatticeMatrix& B);

/// Exact determinant of a square integer matrix (fraction-free elimination).
Int det_exact(const LatticeMatrix& A);

/// Unimodular cone { eta : <eta - apex, v_i> >= 0 } with inward primitive
/// normals v_i forming a Z-basis of a subtorus lattice.
struct UnimodularCone {
    LatticeMatrix normals;         // k x n
    std::vector<Rational> apex;    // n entries

    std::size_t ambient_dim() const { return apex.size(); }
    std::size_t facet_count() const { return normals.row_count(); }

    /// Throws when a normal is imprimitive or the normals fail the
    /// unimodular-basis test.
    void validate() const;
};

struct ConeMembership {
    bool member = false;
    std::set<std::size_t> facets;  // indices i with <eta - apex, v_i> = 0
};

/// Exact rational membership test; `facets` collects the pairings that
/// vanish.  Throws DimensionError when dim(eta) != ambient dim.
ConeMembership cone_contains(const UnimodularCone& cone, const std::vector<Rational>& eta);

/// Floating-point variant used when the query point comes from evaluating a
/// chart map; pairings within `tol` of zero count as on-facet.
ConeMembership cone_contains_approx(const UnimodularCone& cone, const std::vector<double>& eta,
                                    double tol);

}  // namespace foldkit::lattice
