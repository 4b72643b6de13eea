#include "foldkit/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace foldkit::sampling {

namespace {

std::unordered_map<std::string, double> env_of(const std::vector<std::string>& vars,
                                               const std::vector<double>& p) {
    std::unordered_map<std::string, double> env;
    env.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) env.emplace(vars[i], p[i]);
    return env;
}

}  // namespace

bool Domain::contains(const std::vector<double>& p, double tol) const {
    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (p[i] < bounds[i][0] - tol || p[i] > bounds[i][1] + tol) return false;
    if (!halfspaces.empty()) {
        auto env = env_of(vars, p);
        for (const auto& h : halfspaces)
            if (h.eval(env) < -tol) return false;
    }
    return true;
}

std::vector<std::size_t> Domain::active_constraints(const std::vector<double>& p,
                                                    double tol) const {
    std::vector<std::size_t> active;
    if (halfspaces.empty()) return active;
    auto env = env_of(vars, p);
    for (std::size_t i = 0; i < halfspaces.size(); ++i)
        if (std::abs(halfspaces[i].eval(env)) <= tol) active.push_back(i);
    return active;
}

std::vector<std::vector<double>> Domain::active_gradients(
    const std::vector<double>& p, const std::vector<std::size_t>& active) const {
    std::vector<std::vector<double>> grads;
    grads.reserve(active.size());
    for (std::size_t k : active) {
        std::vector<double> g(dim(), 0.0);
        for (std::size_t j = 0; j < dim(); ++j) {
            auto env = env_of(vars, p);
            std::unordered_map<std::string, expr::Dual> denv;
            for (const auto& [name, value] : env) denv.emplace(name, expr::Dual(value));
            denv[vars[j]].d = 1.0;
            g[j] = halfspaces[k].eval(denv).d;
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double Sampler::uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng_);
}

std::vector<double> Sampler::interior_point() {
    for (int attempt = 0; attempt < 512; ++attempt) {
        std::vector<double> p(domain_.dim());
        for (std::size_t i = 0; i < domain_.dim(); ++i)
            p[i] = uniform(domain_.bounds[i][0], domain_.bounds[i][1]);
        if (domain_.contains(p)) return p;
    }
    throw Error("sampler could not find an interior point (empty domain?)");
}

std::vector<double> Sampler::stratum_point(std::size_t k) {
    const auto& h = domain_.halfspaces.at(k);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<double> p = interior_point();
        // Newton projection onto {h = 0}.
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            auto env = env_of(domain_.vars, p);
            double value = h.eval(env);
            if (std::abs(value) < 1e-12) {
                ok = true;
                break;
            }
            std::vector<double> g(domain_.dim(), 0.0);
            double norm2 = 0.0;
            for (std::size_t j = 0; j < domain_.dim(); ++j) {
                std::unordered_map<std::string, expr::Dual> denv;
                for (const auto& [name, val] : env) denv.emplace(name, expr::Dual(val));
                denv[domain_.vars[j]].d = 1.0;
                g[j] = h.eval(denv).d;
                norm2 += g[j] * g[j];
            }
            if (norm2 < 1e-14) break;
            for (std::size_t j = 0; j < domain_.dim(); ++j) p[j] -= value * g[j] / norm2;
        }
        if (ok && domain_.contains(p, 1e-9)) return p;
    }
    return {};
}

std::vector<std::vector<double>> Sampler::mixed_batch(std::size_t count) {
    std::vector<std::vector<double>> out;
    out.reserve(count * (1 + domain_.halfspaces.size()));
    for (std::size_t i = 0; i < count; ++i) out.push_back(interior_point());
    for (std::size_t k = 0; k < domain_.halfspaces.size(); ++k)
        for (std::size_t i = 0; i < count; ++i) {
            auto p = stratum_point(k);
            if (!p.empty()) out.push_back(std::move(p));
        }
    return out;
}

}  // namespace foldkit::sampling
