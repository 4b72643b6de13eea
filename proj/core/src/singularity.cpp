#include "foldkit/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "foldkit/linalg.hpp"

namespace foldkit::singularity {

using expr::Dual;
using expr::Dual2;
using expr::VectorExpression;

namespace {

std::vector<std::vector<double>> jacobian_of(const VectorExpression& f,
                                             const std::vector<double>& p) {
    return f.jacobian(p);
}

// Matrix of duals J_ij = (value, d/d x_l) obtained from mixed second
// derivatives of f.
std::vector<std::vector<Dual>> jacobian_dual(const VectorExpression& f,
                                             const std::vector<double>& p, std::size_t l) {
    const std::size_t m = f.output_dim();
    const std::size_t n = f.input_dim();
    std::vector<std::vector<Dual>> J(m, std::vector<Dual>(n));
    for (std::size_t j = 0; j < n; ++j) {
        std::unordered_map<std::string, Dual2> env;
        for (std::size_t i = 0; i < n; ++i) {
            Dual2 x(p[i]);
            if (i == j) x.du = 1.0;
            if (i == l) x.dv = 1.0;
            env.emplace(f.vars()[i], x);
        }
        for (std::size_t i = 0; i < m; ++i) {
            Dual2 r = f.components()[i].eval(env);
            J[i][j] = Dual(r.du, r.duv);
        }
    }
    return J;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) { return linalg::to_eigen(v); }

struct Located {
    std::vector<double> point;
    std::vector<std::size_t> stratum;
};

}  // namespace

std::pair<double, std::vector<double>> det_df_with_gradient(const VectorExpression& f,
                                                            const std::vector<double>& p) {
    const std::size_t n = f.input_dim();
    std::vector<double> grad(n, 0.0);
    double value = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        Dual d = linalg::det(jacobian_dual(f, p, l));
        value = d.v;
        grad[l] = d.d;
    }
    if (n == 0) value = 1.0;
    return {value, grad};
}

namespace {

// Newton search for det(df) = 0 restricted to the stratum the current point
// sits on.  Constraint activity is re-evaluated as the point moves so that
// interior seeds may converge onto a boundary stratum.
bool newton_on_det(const VectorExpression& f, const sampling::Domain& domain,
                   const Tolerances& tol, std::vector<double>& x) {
    for (int it = 0; it < 80; ++it) {
        auto [d, grad] = det_df_with_gradient(f, x);
        if (std::abs(d) < 1e-13) return true;
        auto active = domain.active_constraints(x, tol.active_tol);
        Eigen::MatrixXd G = linalg::to_eigen(domain.active_gradients(x, active));
        Eigen::VectorXd gs = linalg::project_out_rows(G, to_vec(grad));
        double n2 = gs.squaredNorm();
        if (n2 < 1e-18) return std::abs(d) < tol.det_abs;  // stalled; accept only tiny det
        Eigen::VectorXd step = -(d / n2) * gs;
        double cap = 0.0;
        for (std::size_t i = 0; i < domain.dim(); ++i)
            cap = std::max(cap, domain.bounds[i][1] - domain.bounds[i][0]);
        if (step.norm() > 0.5 * cap) step *= 0.5 * cap / step.norm();
        for (std::size_t i = 0; i < domain.dim(); ++i) {
            x[i] += step(i);
            x[i] = std::min(std::max(x[i], domain.bounds[i][0]), domain.bounds[i][1]);
        }
        // Restore any constraint the step pushed negative.
        if (!domain.halfspaces.empty()) {
            for (int rep = 0; rep < 20; ++rep) {
                bool moved = false;
                std::unordered_map<std::string, double> env;
                for (std::size_t i = 0; i < domain.dim(); ++i) env[domain.vars[i]] = x[i];
                for (const auto& h : domain.halfspaces) {
                    double v = h.eval(env);
                    if (v >= 0) continue;
                    std::vector<double> g(domain.dim(), 0.0);
                    double norm2 = 0.0;
                    for (std::size_t j = 0; j < domain.dim(); ++j) {
                        std::unordered_map<std::string, Dual> denv;
                        for (std::size_t i = 0; i < domain.dim(); ++i)
                            denv.emplace(domain.vars[i], Dual(x[i]));
                        denv[domain.vars[j]].d = 1.0;
                        g[j] = h.eval(denv).d;
                        norm2 += g[j] * g[j];
                    }
                    if (norm2 < 1e-18) continue;
                    for (std::size_t j = 0; j < domain.dim(); ++j) x[j] -= v * g[j] / norm2;
                    moved = true;
                }
                if (!moved) break;
            }
        }
    }
    auto [d, grad] = det_df_with_gradient(f, x);
    (void)grad;
    return std::abs(d) < tol.det_abs;
}

}  // namespace

FoldCertificate is_fold_map(const VectorExpression& f, sampling::Sampler& sampler,
                            std::size_t seeds_per_stratum, const Tolerances& tol) {
    if (f.output_dim() != f.input_dim())
        throw DimensionError("is_fold_map needs an equidimensional map");
    const auto& domain = sampler.domain();
    const std::size_t n = f.input_dim();

    FoldCertificate cert;

    auto seeds = sampler.mixed_batch(seeds_per_stratum);
    double min_det = 0.0, max_det = 0.0;
    bool first = true;
    std::vector<Located> located;
    for (auto& seed : seeds) {
        auto [d0, g0] = det_df_with_gradient(f, seed);
        (void)g0;
        if (first) {
            min_det = max_det = d0;
            first = false;
        } else {
            min_det = std::min(min_det, d0);
            max_det = std::max(max_det, d0);
        }
        std::vector<double> x = seed;
        if (!newton_on_det(f, domain, tol, x)) {
            ++cert.newton_failures;
            continue;
        }
        if (!domain.contains(x, 1e-9)) continue;
        located.push_back({x, domain.active_constraints(x, tol.active_tol)});
    }
    cert.sign_change_seen = (min_det < -tol.det_abs && max_det > tol.det_abs);

    // Deduplicate located points (lexicographic order keeps output stable).
    std::sort(located.begin(), located.end(), [](const Located& a, const Located& b) {
        return a.point < b.point;
    });
    std::vector<Located> unique_pts;
    for (const auto& l : located) {
        bool dup = false;
        for (const auto& u : unique_pts) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dist2 += (l.point[i] - u.point[i]) * (l.point[i] - u.point[i]);
            if (dist2 < 1e-12) {
                dup = true;
                break;
            }
        }
        if (!dup) unique_pts.push_back(l);
    }

    if (unique_pts.empty()) {
        if (cert.sign_change_seen) {
            cert.verdict = FoldVerdict::Inconclusive;
            cert.reason = "det(df) changes sign between samples but Newton located no zero";
        } else {
            cert.verdict = FoldVerdict::IsFold;
            cert.reason = "no degeneracies located on samples (empty fold locus)";
        }
        return cert;
    }

    bool all_ok = true;
    for (const auto& l : unique_pts) {
        FoldPoint fp;
        fp.point = l.point;
        fp.stratum = l.stratum;
        auto [d, grad] = det_df_with_gradient(f, l.point);
        fp.det_value = d;
        if (std::abs(d) >= tol.det_abs) continue;  // stray point, not on the locus

        Eigen::MatrixXd J = linalg::to_eigen(jacobian_of(f, l.point));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        double sigma_min = sv(sv.size() - 1);
        double sigma_next = sv.size() >= 2 ? sv(sv.size() - 2) : 1.0;
        Eigen::VectorXd k = svd.matrixV().col(sv.size() - 1);
        fp.kernel = linalg::from_eigen(k);

        Eigen::VectorXd gradv = to_vec(grad);
        fp.margin = std::abs(gradv.dot(k));
        Eigen::MatrixXd G = linalg::to_eigen(domain.active_gradients(l.point, l.stratum));
        fp.stratum_margin = linalg::project_out_rows(G, gradv).norm();
        cert.fold_points.push_back(fp);

        if (sigma_min >= tol.corank_low || sigma_next <= tol.corank_high) {
            all_ok = false;
            cert.reason = "df drops rank by more than 1 at a degeneracy point";
        } else if (fp.stratum_margin <= tol.margin) {
            all_ok = false;
            cert.reason = "det(df) does not vanish transversally within its stratum";
        } else if (fp.margin <= tol.margin) {
            all_ok = false;
            cert.reason = "ker(df) is tangent to the degeneracy locus";
        }
    }

    if (cert.fold_points.empty()) {
        cert.verdict = cert.sign_change_seen ? FoldVerdict::Inconclusive : FoldVerdict::IsFold;
        cert.reason = cert.sign_change_seen
                          ? "sign change seen but no located zero met the tolerance"
                          : "no degeneracies located on samples (empty fold locus)";
        return cert;
    }
    cert.verdict = all_ok ? FoldVerdict::IsFold : FoldVerdict::NotFold;
    if (all_ok) cert.reason.clear();
    return cert;
}

FoldFactorization fold_factorization(const VectorExpression& f, const std::vector<double>& z0,
                                     double window, std::size_t grid_per_axis,
                                     const Tolerances& tol) {
    if (f.output_dim() != f.input_dim())
        throw DimensionError("fold_factorization needs an equidimensional map");
    const std::size_t n = f.input_dim();
    if (z0.size() != n) throw DimensionError("fold point dimension mismatch");

    Eigen::MatrixXd J = linalg::to_eigen(f.jacobian(z0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd kernel = svd.matrixV().col(n - 1);
    Eigen::VectorXd coker = svd.matrixU().col(n - 1);

    // Orthonormal frame with the kernel as the last axis.
    Eigen::MatrixXd Q(n, n);
    Q.col(n - 1) = kernel.normalized();
    std::size_t filled = 0;
    for (std::size_t i = 0; i < n && filled + 1 < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
        e -= Q.col(n - 1) * Q.col(n - 1).dot(e);
        for (std::size_t c = 0; c < filled; ++c) e -= Q.col(c) * Q.col(c).dot(e);
        if (e.norm() > 1e-8) {
            Q.col(filled) = e.normalized();
            ++filled;
        }
    }

    auto to_world = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd w = to_vec(z0) + Q * y;
        return linalg::from_eigen(w);
    };

    FoldFactorization out;
    out.center = z0;
    out.frame.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.frame[i][j] = Q(i, j);

    const std::size_t g = std::max<std::size_t>(grid_per_axis, 2);
    std::vector<double> ticks(g);
    for (std::size_t i = 0; i < g; ++i)
        ticks[i] = -window + 2.0 * window * static_cast<double>(i) / static_cast<double>(g - 1);

    // Grid over (x, t); for n == 1 the x-part is empty and only t varies.
    std::vector<std::vector<double>> xs;
    if (n == 1) {
        xs.push_back({});
    } else {
        // tensor grid over the first n-1 chart coordinates
        std::vector<std::size_t> idx(n - 1, 0);
        for (;;) {
            std::vector<double> x(n - 1);
            for (std::size_t i = 0; i < n - 1; ++i) x[i] = ticks[idx[i]];
            xs.push_back(x);
            std::size_t c = 0;
            while (c < n - 1 && ++idx[c] == g) {
                idx[c] = 0;
                ++c;
            }
            if (c == n - 1) break;
        }
    }

    double residual = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    std::vector<double> kdir = linalg::from_eigen(kernel);
    for (const auto& x : xs) {
        Eigen::VectorXd y0 = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < n; ++i) y0(i) = x[i];
        std::vector<double> foot = to_world(y0);

        std::vector<double> d2 = f.second_derivative(foot, kdir, kdir);
        Eigen::VectorXd F = 0.5 * to_vec(d2);

        // F must be transverse to the image of df at the footpoint.
        Eigen::MatrixXd Jf = linalg::to_eigen(f.jacobian(foot));
        Eigen::JacobiSVD<Eigen::MatrixXd> s(Jf, Eigen::ComputeFullU);
        Eigen::VectorXd ck = s.matrixU().col(n - 1);
        margin = std::min(margin, std::abs(ck.dot(F)));

        Eigen::VectorXd f0 = to_vec(f.eval(foot));
        for (double t : ticks) {
            Eigen::VectorXd y = y0;
            y(n - 1) = t;
            std::vector<double> p = to_world(y);
            Eigen::VectorXd fv = to_vec(f.eval(p));
            double r = (fv - f0 - t * t * F).lpNorm<Eigen::Infinity>();
            residual = std::max(residual, r);
            out.grid_points.push_back(linalg::from_eigen(y));
            out.normal_term.push_back(linalg::from_eigen(F));
        }
    }
    out.residual_max = residual;
    out.transverse_margin_min = margin;
    (void)coker;

    if (margin <= tol.margin)
        throw KernelNotTransverseError(
            "the quadratic normal-form term lies in the image of df (margin " +
            std::to_string(margin) + ")");
    if (residual > tol.residual)
        throw ResidualTooLargeError("normal-form residual " + std::to_string(residual) +
                                    " exceeds tolerance");
    return out;
}

ChiMorseReport chi_morse_check(const expr::Expression& f, const std::string& svar,
                               const expr::Expression& slope, const std::string& slope_svar,
                               const std::string& slope_tvar, double lo, double hi,
                               const Tolerances& tol) {
    auto g_and_prime = [&](double s) -> std::pair<double, double> {
        // g(s) = f'(s) - a(s, f(s)); forward-mode through the composition.
        std::unordered_map<std::string, Dual2> fenv{{svar, Dual2(s, 1.0, 1.0, 0.0)}};
        Dual2 fv = f.eval(fenv);  // fv.du = f', fv.duv = f''
        std::unordered_map<std::string, Dual> aenv{{slope_svar, Dual(s, 1.0)},
                                                   {slope_tvar, Dual(fv.v, fv.du)}};
        Dual av = slope.eval(aenv);
        return {fv.du - av.v, fv.duv - av.d};
    };

    ChiMorseReport report;
    const int N = 512;
    std::vector<double> gs(N + 1);
    double gmax = 0.0;
    for (int i = 0; i <= N; ++i) {
        double s = lo + (hi - lo) * static_cast<double>(i) / N;
        gs[i] = g_and_prime(s).first;
        gmax = std::max(gmax, std::abs(gs[i]));
    }
    if (gmax < 1e-10) {
        report.degenerate = true;
        report.chi_morse = false;  // tangency everywhere, no transversal crossing
        return report;
    }

    auto refine = [&](double a, double b) {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            double gm = g_and_prime(mid).first;
            if (gm == 0.0) return mid;
            if ((g_and_prime(a).first < 0) != (gm < 0)) b = mid;
            else a = mid;
        }
        return 0.5 * (a + b);
    };

    bool all_transversal = true;
    for (int i = 0; i < N; ++i) {
        double a = lo + (hi - lo) * static_cast<double>(i) / N;
        double b = lo + (hi - lo) * static_cast<double>(i + 1) / N;
        bool crossing = (gs[i] == 0.0) || ((gs[i] < 0) != (gs[i + 1] < 0));
        if (!crossing) continue;
        double s = gs[i] == 0.0 ? a : refine(a, b);
        double gp = g_and_prime(s).second;
        // avoid double-reporting the same zero from adjacent intervals
        bool dup = false;
        for (const auto& c : report.critical_points)
            if (std::abs(c.s - s) < (hi - lo) / (2.0 * N)) dup = true;
        if (dup) continue;
        report.critical_points.push_back({s, gp});
        if (std::abs(gp) <= tol.margin) all_transversal = false;
    }
    report.chi_morse = all_transversal;
    return report;
}

}  // namespace foldkit::singularity
