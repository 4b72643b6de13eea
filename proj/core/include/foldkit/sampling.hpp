#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "foldkit/expr.hpp"

namespace foldkit::sampling {

/// Coordinate domain: a box, optionally cut by half-space constraints
/// h_i(x) >= 0 whose zero sets are the boundary strata (the manifold-with-
/// corners picture).  The stratum of a point is its set of active
/// constraints.
struct Domain {
    std::vector<std::string> vars;
    std::vector<std::array<double, 2>> bounds;
    std::vector<expr::Expression> halfspaces;

    std::size_t dim() const { return bounds.size(); }

    bool contains(const std::vector<double>& p, double tol = 0.0) const;

    /// Indices of constraints with |h_i(p)| <= tol.
    std::vector<std::size_t> active_constraints(const std::vector<double>& p, double tol) const;

    /// Rows = gradients of the active constraints at p.
    std::vector<std::vector<double>> active_gradients(const std::vector<double>& p,
                                                      const std::vector<std::size_t>& active) const;
};

/// Deterministic sample generator: given the same seed the same points come
/// out in the same order.
class Sampler {
public:
    Sampler(Domain domain, std::uint64_t seed) : domain_(std::move(domain)), rng_(seed) {}

    const Domain& domain() const { return domain_; }

    /// Uniform in the box, rejected against the half-space constraints.
    std::vector<double> interior_point();

    /// A point with constraint `k` active: sampled in the box and Newton-
    /// projected onto {h_k = 0}; returns empty when projection fails.
    std::vector<double> stratum_point(std::size_t k);

    /// count interior points plus (when constraints exist) count points per
    /// boundary stratum.
    std::vector<std::vector<double>> mixed_batch(std::size_t count);

    double uniform(double lo, double hi);

private:
    Domain domain_;
    std::mt19937_64 rng_;
};

}  // namespace foldkit::sampling
