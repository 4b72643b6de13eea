#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "foldkit/errors.hpp"

namespace foldkit::linalg {

/// Magnitude used for pivot selection; specialized so the generic routines
/// below also run on forward-mode scalars (pivot on the value part).
inline double magnitude(double x) { return std::abs(x); }
template <class T>
double magnitude(const T& x) { return std::abs(x.v); }

/// Division-free determinant (cofactor expansion along the first column),
/// so dual-number derivative parts survive singular matrices.  Meant for the
/// small Jacobians this toolkit meets; sizes stay in single digits.
template <class T>
T det(const std::vector<std::vector<T>>& a) {
    const std::size_t n = a.size();
    if (n == 0) return T(1.0);
    for (const auto& row : a)
        if (row.size() != n) throw DimensionError("determinant of non-square matrix");
    if (n == 1) return a[0][0];
    if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    T acc(0.0);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::vector<T>> minor;
        minor.reserve(n - 1);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == i) continue;
            std::vector<T> row;
            row.reserve(n - 1);
            for (std::size_t c = 1; c < n; ++c) row.push_back(a[r][c]);
            minor.push_back(std::move(row));
        }
        acc = acc + T(sign) * a[i][0] * det(minor);
        sign = -sign;
    }
    return acc;
}

/// Pfaffian of an antisymmetric matrix by cofactor expansion along the first
/// row.  Sign convention: Pf of the standard symplectic block form
/// (coeff(2i, 2i+1) = +1) is +1.  Intended for the small matrices this
/// toolkit meets (n <= 8); throws DimensionError on odd n.
template <class T>
T pfaffian(const std::vector<std::vector<T>>& a) {
    const std::size_t n = a.size();
    if (n % 2 != 0) throw DimensionError("Pfaffian needs even dimension");
    if (n == 0) return T(1.0);
    if (n == 2) return a[0][1];
    T acc(0.0);
    double sign = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        // minor with rows/cols {0, j} removed
        std::vector<std::vector<T>> minor;
        minor.reserve(n - 2);
        for (std::size_t r = 1; r < n; ++r) {
            if (r == j) continue;
            std::vector<T> row;
            row.reserve(n - 2);
            for (std::size_t c = 1; c < n; ++c) {
                if (c == j) continue;
                row.push_back(a[r][c]);
            }
            minor.push_back(std::move(row));
        }
        acc = acc + T(sign) * a[0][j] * pfaffian(minor);
        sign = -sign;
    }
    return acc;
}

inline Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& a) {
    if (a.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(a.size(), a[0].size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != a[0].size()) throw DimensionError("ragged matrix");
        for (std::size_t j = 0; j < a[i].size(); ++j) m(i, j) = a[i][j];
    }
    return m;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
    return out;
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Orthonormal basis of the numerical null space (singular values below
/// `tol`), columns of the returned matrix.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int nullity = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) < tol) ++nullity;
    nullity += static_cast<int>(a.cols()) - static_cast<int>(sv.size());
    return svd.matrixV().rightCols(nullity);
}

inline int numerical_rank(const Eigen::MatrixXd& a, double tol) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

/// Minimal-norm least-squares solution of A x = b via SVD with threshold.
inline Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol / (svd.singularValues().size() ? svd.singularValues()(0) + tol : 1.0));
    return svd.solve(b);
}

/// Projects `v` onto the orthogonal complement of the row space of `g`
/// (tangent space of the active constraint stratum).
inline Eigen::VectorXd project_out_rows(const Eigen::MatrixXd& g, const Eigen::VectorXd& v) {
    if (g.rows() == 0) return v;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::VectorXd out = v;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) < 1e-12) continue;
        Eigen::VectorXd dir = svd.matrixV().col(i);
        out -= dir * dir.dot(out);
    }
    return out;
}

}  // namespace foldkit::linalg
