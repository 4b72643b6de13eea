#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foldkit/expr.hpp"
#include "foldkit/sampling.hpp"

namespace foldkit::form {

/// Differential 2-form sigma = sum_{i<j} coeff(i,j) dx_i ^ dx_j with
/// expression coefficients.  Antisymmetry is structural: only the upper
/// triangle is stored and the accessor negates below the diagonal.
class FormField {
public:
    FormField() = default;
    explicit FormField(std::vector<std::string> vars);

    std::size_t dim() const { return vars_.size(); }
    const std::vector<std::string>& vars() const { return vars_; }

    void set(std::size_t i, std::size_t j, const expr::Expression& e);
    expr::Expression coeff(std::size_t i, std::size_t j) const;

    /// Coefficient matrix A(i,j) = sigma(e_i, e_j) at a point.
    std::vector<std::vector<double>> matrix_at(const std::vector<double>& p) const;

    /// Coefficient matrix of duals, seeded along coordinate `l`.
    std::vector<std::vector<expr::Dual>> matrix_dual(const std::vector<double>& p,
                                                     std::size_t l) const;

    /// Upper-triangle entries that are structurally nonzero, as (i, j).
    std::vector<std::pair<std::size_t, std::size_t>> support() const;

private:
    std::vector<std::string> vars_;
    std::vector<std::vector<expr::Expression>> upper_;  // upper_[i][j-i-1] for j > i
};

struct ClosednessReport {
    bool closed = false;
    double max_residual = 0.0;
};

/// Evaluates every component of d sigma at the sample points.
ClosednessReport exterior_derivative_is_zero(const FormField& sigma,
                                             const std::vector<std::vector<double>>& samples,
                                             double tol = 1e-9);

/// Pfaffian of the coefficient matrix at p; Pf of the standard symplectic
/// form is +1.  Throws DimensionError for odd dimension.
double pfaffian(const FormField& sigma, const std::vector<double>& p);

/// Pfaffian together with its spatial gradient.
std::pair<double, std::vector<double>> pfaffian_with_gradient(const FormField& sigma,
                                                              const std::vector<double>& p);

struct FormTolerances {
    double closed = 1e-9;
    double pf_abs = 1e-8;      // |Pf| at accepted fold points
    double margin = 1e-4;      // transversal-vanishing margin for grad Pf
    double kernel_sv = 1e-6;   // singular values below this span the kernel
    double active_tol = 1e-7;
};

enum class FoldedStatus {
    Folded,
    NotClosed,
    DegenerateVanishing,  // Pf vanishes but not transversally
    KernelTooLarge,       // corank exceeds 2 at a degeneracy point
    MaximalRankViolation, // kernel contained in TZ: i_Z^* sigma drops rank
    NoDegeneracy          // Pf has no zeros on the sampled domain (symplectic)
};

struct FoldPointData {
    std::vector<double> point;
    std::vector<double> kernel_tangent;     // ker(sigma) cap TZ direction
    std::vector<double> kernel_transverse;  // kernel direction transverse to Z
    double pf_value = 0.0;
    double grad_margin = 0.0;  // |P_S grad Pf|
};

struct FoldedVerification {
    FoldedStatus status = FoldedStatus::NoDegeneracy;
    std::string message;
    double closedness_residual = 0.0;
    std::vector<FoldPointData> fold_points;
};

/// Checks the three folded-symplectic conditions on the sampled domain:
/// closedness, transversal vanishing of the Pfaffian, and corank exactly 2
/// with a one-dimensional intersection of the kernel with the tangent space
/// of the degeneracy hypersurface.
FoldedVerification verify_folded(const FormField& sigma, sampling::Sampler& sampler,
                                 std::size_t seeds, const FormTolerances& tol = {});

class NotInKernelError : public Error {
public:
    explicit NotInKernelError(const std::string& what) : Error(what) {}
};
class NotTransverseError : public Error {
public:
    explicit NotTransverseError(const std::string& what) : Error(what) {}
};

/// Sign of the canonical orientation evaluated on the null-line candidate v:
/// the derivative, along the transverse kernel section w, of x -> sigma_x(w, v)
/// with constant-coefficient extensions.  +1 means v is positively oriented.
int induced_orientation(const FormField& sigma, const std::vector<double>& z,
                        const std::vector<double>& v, const std::vector<double>& w,
                        const FormTolerances& tol = {});

/// Extension-independence variant: w and v given as vector fields.
int induced_orientation_fields(const FormField& sigma, const std::vector<double>& z,
                               const expr::VectorExpression& v_field,
                               const expr::VectorExpression& w_field,
                               const FormTolerances& tol = {});

enum class ContractionStatus { Solved, SolvedOnFold, Unsolvable };

struct ContractionSolution {
    ContractionStatus status = ContractionStatus::Solved;
    std::vector<double> field;              // X with sigma(X, .) = beta
    double residual = 0.0;                  // |sigma(X, .) - beta|_inf
    std::vector<double> violating_kernel;   // kernel vector with beta(k) != 0
    double kernel_pairing = 0.0;
    double condition = 0.0;                 // sigma_max / sigma_min off the fold
};

/// Solves i_X sigma = beta pointwise.  Off the fold the solve is unique; on
/// the fold the system is solvable iff beta annihilates ker(sigma), in which
/// case the minimal-norm solution is returned.
ContractionSolution solve_contraction(const FormField& sigma,
                                      const std::vector<expr::Expression>& beta,
                                      const std::vector<double>& p, double fold_tol = 1e-8,
                                      const FormTolerances& tol = {});

}  // namespace foldkit::form
