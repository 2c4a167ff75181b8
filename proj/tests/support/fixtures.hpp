#pragma once

// Independent oracles and small fixtures shared by the unit and acceptance tests.

#include "hetsnn/bayesopt.hpp"
#include "hetsnn/simulator.hpp"
#include "hetsnn/topology.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace fixtures {

/// Graph on ids 0..n-1 with unit excitatory weights.
inline hetsnn::NetworkGraph digraph(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    std::vector<hetsnn::Node> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i].id = hetsnn::NeuronId{static_cast<std::uint32_t>(i)};
        nodes[i].pos = {static_cast<double>(i), 0.0, 0.0};
    }
    std::vector<hetsnn::Edge> es;
    for (auto [s, d] : edges) es.push_back({hetsnn::NeuronId{s}, hetsnn::NeuronId{d}, 1.0});
    return hetsnn::NetworkGraph(std::move(nodes), std::move(es), {}, 0);
}

/// Each ordered pair connected with probability p.
inline hetsnn::NetworkGraph random_digraph(std::size_t n, double p, hetsnn::Rng& rng) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (i != j && hetsnn::uniform01(rng) < p) edges.emplace_back(i, j);
    return digraph(n, edges);
}

/// Betweenness by enumerating every shortest path of every ordered pair
/// (depth-first over simple paths, kept when their length equals the BFS
/// distance).
inline std::vector<double> brute_force_betweenness(std::size_t n,
                                                   const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (auto [s, d] : edges) adj[s][d] = true;
    std::vector<double> score(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t) continue;
            std::vector<std::vector<std::size_t>> shortest;
            std::size_t best = n + 1;
            std::vector<std::size_t> path{s};
            std::vector<bool> used(n, false);
            used[s] = true;
            auto dfs = [&](auto&& self, std::size_t u) -> void {
                if (path.size() - 1 > best) return;
                if (u == t) {
                    const std::size_t len = path.size() - 1;
                    if (len < best) {
                        best = len;
                        shortest.clear();
                    }
                    if (len == best) shortest.push_back(path);
                    return;
                }
                for (std::size_t v = 0; v < n; ++v) {
                    if (adj[u][v] && !used[v]) {
                        used[v] = true;
                        path.push_back(v);
                        self(self, v);
                        path.pop_back();
                        used[v] = false;
                    }
                }
            };
            dfs(dfs, s);
            if (shortest.empty()) continue;
            for (const auto& p : shortest)
                for (std::size_t k = 1; k + 1 < p.size(); ++k) score[p[k]] += 1.0 / static_cast<double>(shortest.size());
        }
    }
    return score;
}

/// Solves A S + S A^T = -sigma^2 I through the Kronecker system.
inline Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& a, double sigma) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            k.block(i * n, j * n, n, n) += a(i, j) * eye;
            k.block(i * n, j * n, n, n) += (i == j ? 1.0 : 0.0) * a;
        }
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(eye.data(), n * n) * (-sigma * sigma);
    Eigen::VectorXd x = k.fullPivLu().solve(rhs);
    return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

/// Random matrix with spectrum shifted into the open left half plane.
inline Eigen::MatrixXd random_stable(std::size_t n, hetsnn::Rng& rng) {
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 2.0 * hetsnn::uniform01(rng) - 1.0;
    const double shift = a.eigenvalues().real().maxCoeff() + 0.5;
    a -= shift * Eigen::MatrixXd::Identity(n, n);
    return a;
}

/// Single neuron with the given parameters and no synapses.
inline hetsnn::Model single_neuron(const hetsnn::NeuronParams& p) {
    hetsnn::Model m;
    m.graph = digraph(1, {});
    m.neurons = {p};
    return m;
}

/// Uniform draw inside the default search bounds.
inline hetsnn::ParamDistributionSet random_distribution_set(hetsnn::Rng& rng) {
    const auto bounds = hetsnn::DistributionBounds::around(hetsnn::ParamDistributionSet::bio_defaults());
    hetsnn::ParamDistributionSet s;
    for (std::size_t k = 0; k < hetsnn::ParamDistributionSet::count; ++k) {
        const double shape = bounds.shape[k].first + hetsnn::uniform01(rng) * (bounds.shape[k].second - bounds.shape[k].first);
        const double scale = bounds.scale[k].first + hetsnn::uniform01(rng) * (bounds.scale[k].second - bounds.scale[k].first);
        s[k] = hetsnn::GammaSpec::gamma(shape, scale);
    }
    return s;
}

/// Matern Gram matrix of the points with the length scale set to the
/// median pairwise distance.
inline Eigen::MatrixXd matern_gram(const std::vector<hetsnn::ParamDistributionSet>& pts, double smoothness) {
    const Eigen::MatrixXd d = hetsnn::distance_matrix(pts);
    std::vector<double> off;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) off.push_back(d(i, j));
    std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2), off.end());
    const hetsnn::KernelHyper hyper{1.0, off[off.size() / 2], smoothness};
    Eigen::MatrixXd k(d.rows(), d.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) k(i, j) = hetsnn::matern_w_kernel(pts[i], pts[j], hyper);
    return k;
}

}  // namespace fixtures
