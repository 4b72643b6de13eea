#include "foldkit/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "foldkit/linalg.hpp"

namespace foldkit::hamiltonian {

using expr::Dual;
using expr::VectorExpression;

namespace {

std::unordered_map<std::string, double> env_of(const std::vector<std::string>& vars,
                                               const std::vector<double>& p) {
    std::unordered_map<std::string, double> env;
    for (std::size_t i = 0; i < vars.size(); ++i) env.emplace(vars[i], p[i]);
    return env;
}

// Lie bracket [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i at p.
std::vector<double> lie_bracket(const VectorExpression& X, const VectorExpression& Y,
                                const std::vector<double>& p) {
    auto xv = X.eval(p);
    auto yv = Y.eval(p);
    auto jx = X.jacobian(p);
    auto jy = Y.jacobian(p);
    const std::size_t n = p.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out[i] += xv[j] * jy[i][j] - yv[j] * jx[i][j];
    return out;
}

// (L_X sigma)_{ij} = X^k d_k s_ij + s_kj d_i X^k + s_ik d_j X^k
double lie_derivative_residual(const form::FormField& sigma, const VectorExpression& X,
                               const std::vector<double>& p) {
    const std::size_t n = sigma.dim();
    auto xv = X.eval(p);
    auto jx = X.jacobian(p);
    auto A = sigma.matrix_at(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double term = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                auto Ad = sigma.matrix_dual(p, k);
                term += xv[k] * Ad[i][j].d;
                term += A[k][j] * jx[k][i];
                term += A[i][k] * jx[k][j];
            }
            worst = std::max(worst, std::abs(term));
        }
    return worst;
}

}  // namespace

HamiltonianReport verify_hamiltonian(const form::FormField& sigma, const TorusAction& action,
                                     const MomentMap& moment,
                                     const std::vector<std::vector<double>>& samples,
                                     double tol) {
    const std::size_t n = sigma.dim();
    if (moment.rank() != action.torus_rank())
        throw DimensionError("moment components and generators disagree on torus rank");
    for (const auto& g : action.generators)
        if (g.output_dim() != n || g.input_dim() != n)
            throw DimensionError("generator is not a vector field on the chart");

    HamiltonianReport report;
    for (const auto& p : samples) {
        auto A = sigma.matrix_at(p);
        auto dmu = moment.components.jacobian(p);  // rank x n
        for (std::size_t a = 0; a < action.torus_rank(); ++a) {
            auto xv = action.generators[a].eval(p);
            // i_X sigma + d mu_a as a covector.
            for (std::size_t j = 0; j < n; ++j) {
                double c = dmu[a][j];
                for (std::size_t i = 0; i < n; ++i) c += xv[i] * A[i][j];
                report.max_moment_residual = std::max(report.max_moment_residual, std::abs(c));
            }
            report.max_invariance_residual =
                std::max(report.max_invariance_residual,
                         lie_derivative_residual(sigma, action.generators[a], p));
            for (std::size_t b = a + 1; b < action.torus_rank(); ++b) {
                auto br = lie_bracket(action.generators[a], action.generators[b], p);
                for (double c : br)
                    report.max_commutator_residual =
                        std::max(report.max_commutator_residual, std::abs(c));
            }
            for (std::size_t b = 0; b < moment.rank(); ++b) {
                double c = 0.0;
                for (std::size_t j = 0; j < n; ++j) c += dmu[b][j] * xv[j];
                report.max_moment_invariance = std::max(report.max_moment_invariance, std::abs(c));
            }
        }
    }
    report.passed = report.max_moment_residual < tol &&
                    report.max_invariance_residual < tol &&
                    report.max_commutator_residual < tol &&
                    report.max_moment_invariance < tol;
    return report;
}

std::vector<double> weighted_moment(const lattice::LatticeMatrix& weights,
                                    const std::vector<double>& z_pairs) {
    const std::size_t h = weights.row_count();
    if (z_pairs.size() != 2 * h)
        throw DimensionError("need one (re, im) pair per weight row");
    const std::size_t n = weights.col_count();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        double norm2 = z_pairs[2 * i] * z_pairs[2 * i] + z_pairs[2 * i + 1] * z_pairs[2 * i + 1];
        for (std::size_t j = 0; j < n; ++j)
            out[j] += norm2 * static_cast<double>(weights.at(i, j));
    }
    return out;
}

namespace {

// Gauss-Newton projection onto mu^{-1}(0).
bool project_to_level(const MomentMap& mu, std::vector<double>& x, double tol) {
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd v = linalg::to_eigen(mu.components.eval(x));
        if (v.lpNorm<Eigen::Infinity>() < tol) return true;
        Eigen::MatrixXd J = linalg::to_eigen(mu.components.jacobian(x));
        Eigen::VectorXd step = linalg::min_norm_solve(J, v, 1e-12);
        if (step.norm() < 1e-16) return false;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step(i);
    }
    Eigen::VectorXd v = linalg::to_eigen(mu.components.eval(x));
    return v.lpNorm<Eigen::Infinity>() < tol;
}

}  // namespace

ReductionReport classify_zero_level(const form::FormField& sigma, const TorusAction& action,
                                    const MomentMap& moment,
                                    const std::vector<std::vector<double>>& seeds,
                                    std::size_t walk_steps, std::uint64_t seed,
                                    const ReductionTolerances& tol) {
    const std::size_t n = sigma.dim();
    const std::size_t g = action.torus_rank();
    ReductionReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> cloud;
    for (const auto& s : seeds) {
        std::vector<double> x = s;
        if (x.size() != n) throw DimensionError("seed dimension mismatch");
        if (!project_to_level(moment, x, tol.level)) continue;
        cloud.push_back(x);
        // Tangent random walk along ker(d mu), reprojecting after each step.
        std::vector<double> y = x;
        for (std::size_t stepi = 0; stepi < walk_steps; ++stepi) {
            Eigen::MatrixXd J = linalg::to_eigen(moment.components.jacobian(y));
            Eigen::VectorXd dir(n);
            for (std::size_t i = 0; i < n; ++i) dir(i) = gauss(rng);
            dir = linalg::project_out_rows(J, dir);
            if (dir.norm() < 1e-12) break;
            dir.normalize();
            std::vector<double> next = y;
            for (std::size_t i = 0; i < n; ++i) next[i] += tol.step * dir(i);
            if (!project_to_level(moment, next, tol.level)) continue;
            y = next;
            cloud.push_back(y);
        }
    }
    report.cloud_size = cloud.size();
    if (cloud.empty()) {
        report.verdict = ReductionVerdict::MixedEvidence;
        report.detail = "no seed could be projected onto the zero level";
        return report;
    }

    std::set<int> ranks;
    bool free_everywhere = true;
    double min_pf = 0.0, max_pf = 0.0;
    bool first = true;
    std::size_t on_fold = 0;
    for (const auto& x : cloud) {
        Eigen::VectorXd v = linalg::to_eigen(moment.components.eval(x));
        report.max_level_residual =
            std::max(report.max_level_residual, v.lpNorm<Eigen::Infinity>());

        Eigen::MatrixXd J = linalg::to_eigen(moment.components.jacobian(x));
        ranks.insert(linalg::numerical_rank(J, tol.rank_sv));

        Eigen::MatrixXd gens(g, n);
        for (std::size_t a = 0; a < g; ++a) {
            auto gv = action.generators[a].eval(x);
            for (std::size_t i = 0; i < n; ++i) gens(a, i) = gv[i];
        }
        if (linalg::numerical_rank(gens, tol.free_sv) < static_cast<int>(g))
            free_everywhere = false;

        double pf = form::pfaffian(sigma, x);
        if (first) {
            min_pf = max_pf = pf;
            first = false;
        } else {
            min_pf = std::min(min_pf, pf);
            max_pf = std::max(max_pf, pf);
        }
        if (std::abs(pf) < tol.pf_on_fold) ++on_fold;
    }
    report.min_pf = min_pf;
    report.max_pf = max_pf;
    report.pf_sign_change = (min_pf < -tol.pf_on_fold && max_pf > tol.pf_on_fold);
    report.dmu_ranks.assign(ranks.begin(), ranks.end());

    // Rank pattern of d mu along the level decides regularity:
    //  - rank g everywhere: the level is cut out regularly (transverse case);
    //  - rank g-1 everywhere with every sample on the fold: the contained
    //    case, where the moment map degenerates along Z by i_X sigma = -d mu;
    //  - anything mixed or lower: the level is not a manifold of
    //    codimension dim G.
    const int gi = static_cast<int>(g);
    bool all_full = ranks.size() == 1 && *ranks.begin() == gi;
    bool all_gm1 = ranks.size() == 1 && *ranks.begin() == gi - 1;

    if (!free_everywhere) {
        report.verdict = ReductionVerdict::NotFree;
        report.detail = "generators become dependent on the level";
        return report;
    }
    if (all_full) {
        if (report.pf_sign_change) {
            report.verdict = ReductionVerdict::TransverseToFold;
            report.detail = "level crosses the fold transversally; reduced form is folded";
        } else if (on_fold == 0) {
            report.verdict = ReductionVerdict::DisjointFromFold;
            report.detail = "level misses the fold; reduced form is symplectic";
        } else {
            report.verdict = ReductionVerdict::MixedEvidence;
            report.detail = "level touches the fold without a clean sign change";
        }
        return report;
    }
    if (all_gm1 && on_fold == cloud.size()) {
        report.verdict = ReductionVerdict::ContainedInFold;
        report.detail = "level lies inside the fold; reduced form is symplectic";
        return report;
    }
    report.verdict = ReductionVerdict::NotRegular;
    report.detail = "d mu rank pattern {";
    for (int r : report.dmu_ranks) report.detail += " " + std::to_string(r);
    report.detail += " } is incompatible with a codimension-" + std::to_string(g) + " manifold";
    return report;
}

}  // namespace foldkit::hamiltonian
