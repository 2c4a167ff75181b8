#include "hetsnn/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hetsnn {

double shifted_harmonic_mean(std::span<const double> pool, double epsilon_h) {
    if (pool.empty()) throw InputError("harmonic mean of an empty pool");
    if (!(epsilon_h > 0.0)) throw ConfigError("lnp: epsilon_h must be positive");
    double inv = 0.0;
    double sum = 0.0;
    for (double v : pool) {
        if (!std::isfinite(v)) throw NumericError("non-finite Lyapunov exponent in pool");
        inv += 1.0 / (std::abs(v) + epsilon_h);
        sum += v;
    }
    const double magnitude = std::max(static_cast<double>(pool.size()) / inv - epsilon_h, 0.0);
    return sum < 0.0 ? -magnitude : magnitude;
}

LyapunovMatrix build_lyapunov_matrix(const NetworkGraph& graph, std::span<const double> node_exponent,
                                     double multiplier, double epsilon_h) {
    if (node_exponent.size() != graph.size()) throw InputError("node exponents misaligned with graph");
    const auto nbrs = graph.neighbors();
    const auto idx = graph.edge_indices();
    LyapunovMatrix out;
    out.entries.resize(idx.size());
    out.pool_size.resize(idx.size());
    out.fallback.assign(idx.size(), false);
    std::vector<double> pool;
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const auto [i, j] = idx[e];
        pool.clear();
        for (std::size_t k : nbrs[i]) pool.push_back(node_exponent[k]);
        for (std::size_t k : nbrs[j]) pool.push_back(node_exponent[k]);
        if (pool.empty()) {
            pool = {node_exponent[i], node_exponent[j]};
            out.fallback[e] = true;
        }
        out.pool_size[e] = pool.size();
        out.entries[e] = multiplier * shifted_harmonic_mean(pool, epsilon_h);
    }
    return out;
}

LinearizedSystem linearize(const Model& model, std::span<const double> offdiag, double drive, double sigma) {
    const auto& g = model.graph;
    if (offdiag.size() != g.edges().size()) throw InputError("off-diagonal entries misaligned with edges");
    const auto n = static_cast<Eigen::Index>(g.size());
    LinearizedSystem s;
    s.sigma = sigma;
    s.d.resize(n);
    s.a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.d[i] = 1.0 / model.neurons[static_cast<std::size_t>(i)].tau_m;
        s.a(i, i) = -s.d[i];
    }
    const auto idx = g.edge_indices();
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const double sgn = g.edges()[e].w < 0.0 ? -1.0 : 1.0;
        s.a(static_cast<Eigen::Index>(idx[e].second), static_cast<Eigen::Index>(idx[e].first)) = sgn * std::abs(offdiag[e]);
    }
    s.b = Eigen::VectorXd::Constant(n, drive);
    return s;
}

Eigen::MatrixXd edge_scores(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma) {
    if (a.rows() != sigma.rows() || a.cols() != sigma.cols()) throw InputError("edge_scores: shape mismatch");
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || a(i, j) == 0.0) continue;
            const double cross = a(i, j) > 0.0 ? -2.0 * sigma(i, j) : 2.0 * sigma(i, j);
            s(i, j) = std::abs(a(i, j)) * std::max(sigma(i, i) + sigma(j, j) + cross, 0.0);
        }
    }
    return s;
}

Eigen::MatrixXd keep_probabilities(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma, double rho, double p_min) {
    if (!(rho > 0.0)) throw ConfigError("lnp: rho_density must be positive");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw ConfigError("lnp: p_min must lie in (0, 1]");
    const Eigen::MatrixXd s = edge_scores(a, sigma);
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p(i, i) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && a(i, j) != 0.0) p(i, j) = std::clamp(rho * s(i, j), p_min, 1.0);
        }
    }
    return p;
}

Eigen::MatrixXd sparsify(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p, DiagonalMode mode, Rng& rng) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd out = a;
    for (Eigen::Index i = 0; i < n; ++i) {
        double before = 0.0;
        double after = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || a(i, j) == 0.0) continue;
            const double u = uniform01(rng);
            out(i, j) = u < p(i, j) ? a(i, j) / p(i, j) : 0.0;
            before += std::abs(a(i, j));
            after += std::abs(out(i, j));
        }
        if (mode == DiagonalMode::perturb) out(i, i) = a(i, i) - (after - before);
    }
    return out;
}

Eigen::MatrixXd prune_synapses(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma, double rho, double p_min,
                               DiagonalMode mode, std::uint64_t seed) {
    Rng rng = make_rng(seed, 71);
    return sparsify(a, keep_probabilities(a, sigma, rho, p_min), mode, rng);
}

Model apply_sparsification(const Model& model, const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_sparse,
                           double excitability_gain) {
    const auto& g = model.graph;
    const auto idx = g.edge_indices();
    std::vector<Edge> kept;
    std::vector<StdpParams> kept_params;
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const auto i = static_cast<Eigen::Index>(idx[e].second);
        const auto j = static_cast<Eigen::Index>(idx[e].first);
        if (a_sparse(i, j) == 0.0) continue;
        Edge edge = g.edges()[e];
        const double scale = a(i, j) != 0.0 ? a_sparse(i, j) / a(i, j) : 1.0;
        const double mag = std::min(std::abs(edge.w) * scale, model.stdp.recurrent[e].w_max);
        edge.w = edge.w < 0.0 ? -mag : mag;
        kept.push_back(edge);
        kept_params.push_back(model.stdp.recurrent[e]);
    }
    Model out = model;
    out.graph = g.with_edges(std::move(kept));
    out.stdp.recurrent = std::move(kept_params);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double delta = a(ii, ii) - a_sparse(ii, ii);
        out.neurons[i].v_rest -= delta * out.neurons[i].tau_m * excitability_gain;
    }
    return out;
}

std::vector<NeuronId> nodes_below_threshold(const NetworkGraph& graph, const NodeThreshold& threshold) {
    if (graph.empty()) throw InputError("node pruning on an empty graph");
    const auto scores = betweenness_scores(graph);
    const auto nodes = graph.nodes();
    std::vector<NeuronId> out;
    if (threshold.kind == NodeThreshold::Kind::absolute) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (scores[i] < threshold.value) out.push_back(nodes[i].id);
        }
    } else {
        if (!(threshold.value >= 0.0 && threshold.value < 1.0)) throw ConfigError("lnp: centrality quantile must lie in [0, 1)");
        std::vector<std::size_t> order(nodes.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (scores[x] != scores[y]) return scores[x] < scores[y];
            return nodes[x].id < nodes[y].id;
        });
        const auto k = static_cast<std::size_t>(std::floor(threshold.value * static_cast<double>(nodes.size()) + 1e-9));
        for (std::size_t r = 0; r < k; ++r) out.push_back(nodes[order[r]].id);
        std::sort(out.begin(), out.end());
    }
    if (out.size() == nodes.size()) throw InputError("centrality threshold would remove every neuron");
    return out;
}

NetworkGraph prune_nodes(const NetworkGraph& graph, const NodeThreshold& threshold) {
    return graph.without_nodes(nodes_below_threshold(graph, threshold));
}

DelocalizeResult delocalize_edges(const NetworkGraph& graph, std::size_t m, std::uint64_t seed, double w_scale) {
    DelocalizeResult out;
    out.graph = graph;
    if (m == 0) return out;
    if (!(w_scale > 0.0)) throw ConfigError("lnp: delocalization w_scale must be positive");
    const std::size_t n = graph.size();
    const auto nodes = graph.nodes();
    std::vector<char> adj(n * n, 0);
    for (const auto& [s, d] : graph.edge_indices()) adj[s * n + d] = 1;
    auto degrees = graph.total_degrees();
    auto nbrs = graph.neighbors();
    Rng rng = make_rng(seed, 81);
    std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
    std::vector<char> within(n);

    for (std::size_t added = 0; added < m; ++added) {
        bool found = false;
        std::size_t best_u = 0;
        std::size_t best_v = 0;
        std::size_t best_score = 0;
        for (std::size_t v = 0; v < n; ++v) {
            std::fill(within.begin(), within.end(), 0);
            for (std::size_t a : nbrs[v]) {
                within[a] = 1;
                for (std::size_t b : nbrs[a]) within[b] = 1;
            }
            for (std::size_t u = 0; u < n; ++u) {
                if (u == v || !within[u] || adj[u * n + v]) continue;
                const std::size_t score = degrees[u] + degrees[v];
                // Local indices follow id order, so (u, v) order is id order.
                if (!found || score > best_score || (score == best_score && (u < best_u || (u == best_u && v < best_v)))) {
                    found = true;
                    best_u = u;
                    best_v = v;
                    best_score = score;
                }
            }
        }
        if (!found) break;
        adj[best_u * n + best_v] = 1;
        ++degrees[best_u];
        ++degrees[best_v];
        for (auto [a, b] : {std::pair{best_u, best_v}, std::pair{best_v, best_u}}) {
            auto& list = nbrs[a];
            auto it = std::lower_bound(list.begin(), list.end(), b);
            if (it == list.end() || *it != b) list.insert(it, b);
        }
        const Edge e{nodes[best_u].id, nodes[best_v].id, draw_weight(rng, w_scale, nodes[best_u].sign)};
        edges.push_back(e);
        out.added.push_back(e);
    }
    out.shortfall = m - out.added.size();
    out.graph = graph.with_edges(std::move(edges));
    return out;
}

}  // namespace hetsnn
