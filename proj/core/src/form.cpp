#include "foldkit/form.hpp"

#include <algorithm>
#include <cmath>

#include "foldkit/linalg.hpp"

namespace foldkit::form {

using expr::Dual;
using expr::Expression;

FormField::FormField(std::vector<std::string> vars) : vars_(std::move(vars)) {
    const std::size_t n = vars_.size();
    upper_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        upper_[i].assign(n > i + 1 ? n - i - 1 : 0, Expression::constant(0));
}

void FormField::set(std::size_t i, std::size_t j, const Expression& e) {
    if (i >= dim() || j >= dim()) throw DimensionError("form coefficient index out of range");
    if (i == j) throw DimensionError("diagonal coefficients of a 2-form are identically zero");
    if (i < j) upper_[i][j - i - 1] = e;
    else upper_[j][i - j - 1] = expr::mul(Expression::constant(-1), e);
}

Expression FormField::coeff(std::size_t i, std::size_t j) const {
    if (i >= dim() || j >= dim()) throw DimensionError("form coefficient index out of range");
    if (i == j) return Expression::constant(0);
    if (i < j) return upper_[i][j - i - 1];
    return expr::mul(Expression::constant(-1), upper_[j][i - j - 1]);
}

std::vector<std::vector<double>> FormField::matrix_at(const std::vector<double>& p) const {
    if (p.size() != dim()) throw DimensionError("point dimension mismatch");
    std::unordered_map<std::string, double> env;
    for (std::size_t i = 0; i < dim(); ++i) env.emplace(vars_[i], p[i]);
    std::vector<std::vector<double>> A(dim(), std::vector<double>(dim(), 0.0));
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = i + 1; j < dim(); ++j) {
            double v = upper_[i][j - i - 1].eval(env);
            A[i][j] = v;
            A[j][i] = -v;
        }
    return A;
}

std::vector<std::vector<Dual>> FormField::matrix_dual(const std::vector<double>& p,
                                                      std::size_t l) const {
    if (p.size() != dim()) throw DimensionError("point dimension mismatch");
    std::unordered_map<std::string, Dual> env;
    for (std::size_t i = 0; i < dim(); ++i) env.emplace(vars_[i], Dual(p[i]));
    env[vars_[l]].d = 1.0;
    std::vector<std::vector<Dual>> A(dim(), std::vector<Dual>(dim(), Dual(0.0)));
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = i + 1; j < dim(); ++j) {
            Dual v = upper_[i][j - i - 1].eval(env);
            A[i][j] = v;
            A[j][i] = Dual(-v.v, -v.d);
        }
    return A;
}

std::vector<std::pair<std::size_t, std::size_t>> FormField::support() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = i + 1; j < dim(); ++j) {
            const Expression& e = upper_[i][j - i - 1];
            if (!(e.node().kind == expr::NodeKind::Constant && e.node().value == 0))
                out.emplace_back(i, j);
        }
    return out;
}

ClosednessReport exterior_derivative_is_zero(const FormField& sigma,
                                             const std::vector<std::vector<double>>& samples,
                                             double tol) {
    const std::size_t n = sigma.dim();
    ClosednessReport report;
    for (const auto& p : samples) {
        // d sigma component (i<j<k): d_i c_jk - d_j c_ik + d_k c_ij
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) {
                    auto partial = [&](std::size_t dir, std::size_t a, std::size_t b) {
                        std::unordered_map<std::string, Dual> env;
                        for (std::size_t t = 0; t < n; ++t)
                            env.emplace(sigma.vars()[t], Dual(p[t]));
                        env[sigma.vars()[dir]].d = 1.0;
                        return sigma.coeff(a, b).eval(env).d;
                    };
                    double r = partial(i, j, k) - partial(j, i, k) + partial(k, i, j);
                    report.max_residual = std::max(report.max_residual, std::abs(r));
                }
    }
    report.closed = report.max_residual < tol;
    return report;
}

double pfaffian(const FormField& sigma, const std::vector<double>& p) {
    if (sigma.dim() % 2 != 0) throw DimensionError("Pfaffian needs even dimension");
    return linalg::pfaffian(sigma.matrix_at(p));
}

std::pair<double, std::vector<double>> pfaffian_with_gradient(const FormField& sigma,
                                                              const std::vector<double>& p) {
    if (sigma.dim() % 2 != 0) throw DimensionError("Pfaffian needs even dimension");
    const std::size_t n = sigma.dim();
    std::vector<double> grad(n, 0.0);
    double value = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        Dual d = linalg::pfaffian(sigma.matrix_dual(p, l));
        value = d.v;
        grad[l] = d.d;
    }
    return {value, grad};
}

namespace {

// Newton search for Pf(sigma) = 0 within the active stratum.
bool newton_on_pf(const FormField& sigma, const sampling::Domain& domain,
                  const FormTolerances& tol, std::vector<double>& x) {
    for (int it = 0; it < 80; ++it) {
        auto [v, grad] = pfaffian_with_gradient(sigma, x);
        if (std::abs(v) < 1e-13) return true;
        auto active = domain.active_constraints(x, tol.active_tol);
        Eigen::MatrixXd G = linalg::to_eigen(domain.active_gradients(x, active));
        Eigen::VectorXd gs = linalg::project_out_rows(G, linalg::to_eigen(grad));
        double n2 = gs.squaredNorm();
        if (n2 < 1e-18) return std::abs(v) < tol.pf_abs;
        for (std::size_t i = 0; i < domain.dim(); ++i) {
            x[i] -= v * gs(i) / n2;
            x[i] = std::min(std::max(x[i], domain.bounds[i][0]), domain.bounds[i][1]);
        }
    }
    auto [v, grad] = pfaffian_with_gradient(sigma, x);
    (void)grad;
    return std::abs(v) < tol.pf_abs;
}

}  // namespace

FoldedVerification verify_folded(const FormField& sigma, sampling::Sampler& sampler,
                                 std::size_t seeds, const FormTolerances& tol) {
    FoldedVerification out;
    const std::size_t n = sigma.dim();
    if (n % 2 != 0) throw DimensionError("folded-symplectic forms need even dimension");
    const auto& domain = sampler.domain();

    auto samples = sampler.mixed_batch(seeds);
    auto closed = exterior_derivative_is_zero(sigma, samples, tol.closed);
    out.closedness_residual = closed.max_residual;
    if (!closed.closed) {
        out.status = FoldedStatus::NotClosed;
        out.message = "d sigma has a component of size " + std::to_string(closed.max_residual);
        return out;
    }

    // Locate the degeneracy hypersurface Z = {Pf = 0}.
    std::vector<std::vector<double>> located;
    for (const auto& seed : samples) {
        std::vector<double> x = seed;
        if (!newton_on_pf(sigma, domain, tol, x)) continue;
        if (!domain.contains(x, 1e-9)) continue;
        bool dup = false;
        for (const auto& u : located) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - u[i]) * (x[i] - u[i]);
            if (d2 < 1e-12) {
                dup = true;
                break;
            }
        }
        if (!dup) located.push_back(x);
    }
    std::sort(located.begin(), located.end());

    if (located.empty()) {
        out.status = FoldedStatus::NoDegeneracy;
        out.message = "Pfaffian has no zeros on the sampled domain";
        return out;
    }

    for (const auto& z : located) {
        auto [pf, grad] = pfaffian_with_gradient(sigma, z);
        if (std::abs(pf) >= tol.pf_abs) continue;
        FoldPointData fp;
        fp.point = z;
        fp.pf_value = pf;

        auto active = domain.active_constraints(z, tol.active_tol);
        Eigen::MatrixXd G = linalg::to_eigen(domain.active_gradients(z, active));
        Eigen::VectorXd gradv = linalg::to_eigen(grad);
        Eigen::VectorXd gs = linalg::project_out_rows(G, gradv);
        fp.grad_margin = gs.norm();
        if (fp.grad_margin <= tol.margin) {
            out.status = FoldedStatus::DegenerateVanishing;
            out.message = "Pfaffian vanishes non-transversally";
            out.fold_points.push_back(fp);
            return out;
        }

        Eigen::MatrixXd A = linalg::to_eigen(sigma.matrix_at(z));
        Eigen::MatrixXd kernel = linalg::null_space(A, tol.kernel_sv);
        if (kernel.cols() != 2) {
            out.status = FoldedStatus::KernelTooLarge;
            out.message = "kernel dimension " + std::to_string(kernel.cols()) +
                          " at a degeneracy point (want 2)";
            out.fold_points.push_back(fp);
            return out;
        }

        // Split the 2-dimensional kernel against T_z Z (normal = grad Pf):
        // one direction tangent, one transverse.
        Eigen::VectorXd u1 = kernel.col(0), u2 = kernel.col(1);
        double a1 = gradv.dot(u1), a2 = gradv.dot(u2);
        if (std::abs(a1) <= tol.margin * 1e-2 && std::abs(a2) <= tol.margin * 1e-2) {
            out.status = FoldedStatus::MaximalRankViolation;
            out.message = "kernel of sigma is contained in TZ: restriction drops rank";
            out.fold_points.push_back(fp);
            return out;
        }
        Eigen::VectorXd tangent = a2 * u1 - a1 * u2;  // annihilates grad Pf
        Eigen::VectorXd transverse = std::abs(a1) >= std::abs(a2) ? u1 : u2;
        tangent.normalize();
        fp.kernel_tangent = linalg::from_eigen(tangent);
        fp.kernel_transverse = linalg::from_eigen(transverse);
        out.fold_points.push_back(fp);
    }

    if (out.fold_points.empty()) {
        out.status = FoldedStatus::NoDegeneracy;
        out.message = "Pfaffian zeros located by Newton failed the tolerance";
        return out;
    }
    out.status = FoldedStatus::Folded;
    return out;
}

int induced_orientation(const FormField& sigma, const std::vector<double>& z,
                        const std::vector<double>& v, const std::vector<double>& w,
                        const FormTolerances& tol) {
    const std::size_t n = sigma.dim();
    Eigen::MatrixXd A = linalg::to_eigen(sigma.matrix_at(z));
    Eigen::VectorXd vv = linalg::to_eigen(v), wv = linalg::to_eigen(w);
    if (vv.norm() == 0.0 || wv.norm() == 0.0)
        throw NotInKernelError("orientation arguments must be nonzero");
    if ((A * vv).norm() > tol.kernel_sv * 10 * std::max(1.0, vv.norm()))
        throw NotInKernelError("v is not in ker(sigma) at z");
    if ((A * wv).norm() > tol.kernel_sv * 10 * std::max(1.0, wv.norm()))
        throw NotInKernelError("w is not in ker(sigma) at z");

    auto [pf, grad] = pfaffian_with_gradient(sigma, z);
    (void)pf;
    Eigen::VectorXd gradv = linalg::to_eigen(grad);
    if (std::abs(gradv.dot(wv)) <= tol.margin * wv.norm())
        throw NotTransverseError("w is tangent to the fold at z");
    if (std::abs(gradv.dot(vv)) > tol.margin * vv.norm())
        throw NotInKernelError("v is not tangent to the fold at z");

    // h(x) = sigma_x(w, v) with constant extensions; sign of dh(w) at z.
    double deriv = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        auto Ad = sigma.matrix_dual(z, l);
        Dual h(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                h = h + Dual(w[i]) * Ad[i][j] * Dual(v[j]);
        deriv += h.d * w[l];
    }
    if (deriv == 0.0) throw NotTransverseError("orientation derivative vanished");
    return deriv > 0 ? 1 : -1;
}

int induced_orientation_fields(const FormField& sigma, const std::vector<double>& z,
                               const expr::VectorExpression& v_field,
                               const expr::VectorExpression& w_field,
                               const FormTolerances& tol) {
    const std::size_t n = sigma.dim();
    std::vector<double> v = v_field.eval(z);
    std::vector<double> w = w_field.eval(z);
    // Validate pointwise values exactly as the constant-extension variant.
    Eigen::MatrixXd A = linalg::to_eigen(sigma.matrix_at(z));
    Eigen::VectorXd vv = linalg::to_eigen(v), wv = linalg::to_eigen(w);
    if (vv.norm() == 0.0 || wv.norm() == 0.0)
        throw NotInKernelError("orientation arguments must be nonzero");
    if ((A * vv).norm() > tol.kernel_sv * 10 * std::max(1.0, vv.norm()) ||
        (A * wv).norm() > tol.kernel_sv * 10 * std::max(1.0, wv.norm()))
        throw NotInKernelError("field value leaves ker(sigma) at z");

    // h(x) = sigma_x(w(x), v(x)); directional derivative along w(z).
    double deriv = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        auto Ad = sigma.matrix_dual(z, l);
        std::unordered_map<std::string, Dual> env;
        for (std::size_t i = 0; i < n; ++i) env.emplace(sigma.vars()[i], Dual(z[i]));
        env[sigma.vars()[l]].d = 1.0;
        Dual h(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            Dual wi = w_field.components()[i].eval(env);
            for (std::size_t j = 0; j < n; ++j) {
                Dual vj = v_field.components()[j].eval(env);
                h = h + wi * Ad[i][j] * vj;
            }
        }
        deriv += h.d * w[l];
    }
    if (deriv == 0.0) throw NotTransverseError("orientation derivative vanished");
    return deriv > 0 ? 1 : -1;
}

ContractionSolution solve_contraction(const FormField& sigma,
                                      const std::vector<expr::Expression>& beta,
                                      const std::vector<double>& p, double fold_tol,
                                      const FormTolerances& tol) {
    const std::size_t n = sigma.dim();
    if (beta.size() != n) throw DimensionError("covector dimension mismatch");

    std::unordered_map<std::string, double> env;
    for (std::size_t i = 0; i < n; ++i) env.emplace(sigma.vars()[i], p[i]);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) b(i) = beta[i].eval(env);

    Eigen::MatrixXd A = linalg::to_eigen(sigma.matrix_at(p));
    // sigma(X, .) = beta  <=>  A^T X = b  <=>  -A X = b.
    Eigen::MatrixXd M = -A;

    ContractionSolution out;
    double pf = pfaffian(sigma, p);
    if (std::abs(pf) > fold_tol) {
        Eigen::VectorXd X = M.fullPivLu().solve(b);
        out.status = ContractionStatus::Solved;
        out.field = linalg::from_eigen(X);
        out.residual = (M * X - b).lpNorm<Eigen::Infinity>();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const auto& sv = svd.singularValues();
        out.condition = sv(0) / sv(sv.size() - 1);
        return out;
    }

    // On the fold: solvable iff beta annihilates ker(sigma).
    Eigen::MatrixXd kernel = linalg::null_space(A, tol.kernel_sv);
    for (int c = 0; c < kernel.cols(); ++c) {
        double pairing = b.dot(kernel.col(c));
        if (std::abs(pairing) > fold_tol) {
            out.status = ContractionStatus::Unsolvable;
            out.violating_kernel = linalg::from_eigen(kernel.col(c));
            out.kernel_pairing = pairing;
            return out;
        }
    }
    Eigen::VectorXd X = linalg::min_norm_solve(M, b, tol.kernel_sv);
    out.status = ContractionStatus::SolvedOnFold;
    out.field = linalg::from_eigen(X);
    out.residual = (M * X - b).lpNorm<Eigen::Infinity>();
    return out;
}

}  // namespace foldkit::form
