#pragma once

#include <string>
#include <vector>

#include "foldkit/expr.hpp"
#include "foldkit/sampling.hpp"

namespace foldkit::singularity {

struct Tolerances {
    double det_abs = 1e-8;     // |det df| at accepted degeneracy points
    double margin = 1e-4;      // transversality margins must exceed this
    double corank_low = 1e-6;  // sigma_min below this counts as rank drop
    double corank_high = 0.1;  // sigma_{min+1} must stay above this
    double active_tol = 1e-7;  // constraint activity threshold
    double residual = 1e-6;    // fold_factorization residual bound
};

enum class FoldVerdict { IsFold, NotFold, Inconclusive };

struct FoldPoint {
    std::vector<double> point;
    std::vector<std::size_t> stratum;  // active constraint indices
    double det_value = 0.0;
    double margin = 0.0;          // |grad(det df) . k|, k unit kernel vector
    double stratum_margin = 0.0;  // |P_S grad(det df)| within the stratum
    std::vector<double> kernel;   // unit vector spanning ker(df)
};

struct FoldCertificate {
    FoldVerdict verdict = FoldVerdict::Inconclusive;
    std::string reason;
    std::vector<FoldPoint> fold_points;
    int newton_failures = 0;      // non-fatal, per seed
    bool sign_change_seen = false;
};

/// Decides whether the square map f has fold singularities on the sampled
/// domain: locates zeros of det(df) by Newton iteration from seeds, then
/// checks corank 1, per-stratum transversal vanishing of the determinant,
/// and transversality of ker(df) to the degeneracy locus.
FoldCertificate is_fold_map(const expr::VectorExpression& f, sampling::Sampler& sampler,
                            std::size_t seeds_per_stratum, const Tolerances& tol = {});

/// det(df) at `point` together with its spatial gradient (forward-mode,
/// second derivatives of f flow through the cofactor expansion).
std::pair<double, std::vector<double>> det_df_with_gradient(const expr::VectorExpression& f,
                                                            const std::vector<double>& point);

class KernelNotTransverseError : public Error {
public:
    explicit KernelNotTransverseError(const std::string& what) : Error(what) {}
};
class ResidualTooLargeError : public Error {
public:
    explicit ResidualTooLargeError(const std::string& what) : Error(what) {}
};

struct FoldFactorization {
    std::vector<double> center;                    // z0
    std::vector<std::vector<double>> frame;        // orthonormal columns, last = kernel
    std::vector<std::vector<double>> grid_points;  // chart coordinates (x, t)
    std::vector<std::vector<double>> normal_term;  // F(x) at each grid point's footpoint
    double residual_max = 0.0;                     // max |f - f0 - t^2 F(x)|
    double transverse_margin_min = 0.0;            // min |<F(x), coker>|
};

/// Factors f near the fold point z0 as (x, 0) + t^2 F(x) in an orthonormal
/// chart whose last axis is ker(df_{z0}).  F is the forward-mode limit
/// (half the second derivative along the kernel); the residual measures the
/// defect of the quadratic normal form over the grid.  Throws
/// KernelNotTransverseError when F fails to leave the image of df, and
/// ResidualTooLargeError when the normal form does not hold at tolerance.
FoldFactorization fold_factorization(const expr::VectorExpression& f,
                                     const std::vector<double>& z0, double window,
                                     std::size_t grid_per_axis, const Tolerances& tol = {});

struct ChiMorseReport {
    bool chi_morse = false;
    bool degenerate = false;  // the section runs tangent to the connection everywhere
    struct Critical {
        double s;
        double g_prime;
    };
    std::vector<Critical> critical_points;
};

/// chi-Morse test for a one-variable section f against the connection with
/// horizontal slope field a(s, t): finds zeros of g(s) = f'(s) - a(s, f(s))
/// in [lo, hi] and requires g' != 0 at each.
ChiMorseReport chi_morse_check(const expr::Expression& f, const std::string& svar,
                               const expr::Expression& slope, const std::string& slope_svar,
                               const std::string& slope_tvar, double lo, double hi,
                               const Tolerances& tol = {});

}  // namespace foldkit::singularity
