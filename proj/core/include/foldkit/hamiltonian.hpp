#pragma once

#include <string>
#include <vector>

#include "foldkit/expr.hpp"
#include "foldkit/form.hpp"
#include "foldkit/lattice.hpp"
#include "foldkit/sampling.hpp"

namespace foldkit::hamiltonian {

/// Torus action presented by the induced vector fields of a basis of the
/// Lie algebra.  Abelian-ness (pairwise commuting generators) is checked on
/// samples, not assumed.
struct TorusAction {
    std::vector<expr::VectorExpression> generators;
    std::size_t torus_rank() const { return generators.size(); }
};

struct MomentMap {
    expr::VectorExpression components;
    std::size_t rank() const { return components.output_dim(); }
};

struct HamiltonianReport {
    bool passed = false;
    double max_moment_residual = 0.0;      // |i_X sigma + d<mu, X>|
    double max_invariance_residual = 0.0;  // |L_X sigma|
    double max_commutator_residual = 0.0;  // |[X_a, X_b]|
    double max_moment_invariance = 0.0;    // |d mu_b (X_a)|
};

/// Checks i_{X_a} sigma = -d mu_a, invariance of sigma along the generators,
/// commuting generators, and invariance of the moment components, at the
/// given samples.
HamiltonianReport verify_hamiltonian(const form::FormField& sigma, const TorusAction& action,
                                     const MomentMap& moment,
                                     const std::vector<std::vector<double>>& samples,
                                     double tol = 1e-8);

/// Standard weighted moment map sum |z_i|^2 beta_i for the torus action on
/// C^h with weight rows beta_i.  `z` is given as interleaved (re, im) pairs.
std::vector<double> weighted_moment(const lattice::LatticeMatrix& weights,
                                    const std::vector<double>& z_pairs);

enum class ReductionVerdict {
    ContainedInFold,   // level inside Z; reduced form symplectic
    TransverseToFold,  // level crosses Z; reduced form folded
    DisjointFromFold,  // level misses Z; reduced form symplectic
    NotRegular,        // level is not a manifold of codimension dim G
    NotFree,           // generators dependent somewhere on the level
    MixedEvidence      // samples inconsistent; no verdict
};

struct ReductionReport {
    ReductionVerdict verdict = ReductionVerdict::MixedEvidence;
    std::string detail;
    std::size_t cloud_size = 0;
    double max_level_residual = 0.0;  // |mu| after projection
    double min_pf = 0.0, max_pf = 0.0;
    bool pf_sign_change = false;
    // per-sample dmu ranks seen (sorted unique)
    std::vector<int> dmu_ranks;
};

struct ReductionTolerances {
    double level = 1e-8;      // |mu| on accepted level points
    double pf_on_fold = 1e-6; // |Pf| below this counts as on the fold
    double rank_sv = 1e-6;    // singular-value threshold for dmu rank
    double free_sv = 1e-8;    // generator independence threshold
    double step = 0.05;       // tangent walk step size
};

/// Classifies the zero level set of the moment map against the fold, per
/// component cloud reachable from the seeds: projects seeds onto mu^{-1}(0),
/// walks the level tangentially, and inspects the rank pattern of d mu and
/// the Pfaffian along the cloud.
ReductionReport classify_zero_level(const form::FormField& sigma, const TorusAction& action,
                                    const MomentMap& moment,
                                    const std::vector<std::vector<double>>& seeds,
                                    std::size_t walk_steps, std::uint64_t seed,
                                    const ReductionTolerances& tol = {});

}  // namespace foldkit::hamiltonian
