#include "hetsnn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hetsnn {

std::size_t TopologyConfig::n_excitatory() const {
    const double parts = static_cast<double>(ei_ratio.first + ei_ratio.second);
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_total) * ei_ratio.first / parts));
}

void TopologyConfig::validate() const {
    if (n_total == 0) throw ConfigError("topology.n_total must be positive");
    if (ei_ratio.first + ei_ratio.second == 0) throw ConfigError("topology.ei_ratio must have a positive part");
    if (!(amplitude_c >= 0.0 && amplitude_c <= 1.0)) throw ConfigError("topology.amplitude_c must lie in [0, 1]");
    if (!(lambda_scale > 0.0)) throw ConfigError("topology.lambda_scale must be positive");
    if (!(input_fraction > 0.0 && input_fraction <= 1.0)) {
        throw ConfigError("topology.input_fraction must lie in (0, 1]");
    }
    if (!(input_connect_prob >= 0.0 && input_connect_prob <= 1.0)) {
        throw ConfigError("topology.input_connect_prob must lie in [0, 1]");
    }
    if (!(w_scale > 0.0) || !(input_w_scale > 0.0)) throw ConfigError("topology weight scales must be positive");
    const std::size_t volume = lattice_shape[0] * lattice_shape[1] * lattice_shape[2];
    if (volume < n_total) {
        throw ConfigError("topology.lattice_shape volume " + std::to_string(volume) + " is smaller than n_total " +
                          std::to_string(n_total));
    }
}

namespace {

bool edge_less(const Edge& a, const Edge& b) {
    return std::tie(a.src.value, a.dst.value) < std::tie(b.src.value, b.dst.value);
}

bool input_less(const InputEdge& a, const InputEdge& b) {
    return std::tie(a.enc, a.dst.value) < std::tie(b.enc, b.dst.value);
}

}  // namespace

NetworkGraph::NetworkGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::vector<InputEdge> input_edges,
                           std::uint32_t n_encoders)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), input_edges_(std::move(input_edges)),
      n_encoders_(n_encoders) {
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (nodes_[i].id == nodes_[i - 1].id) throw ConfigError("duplicate neuron id in graph");
    }
    std::sort(edges_.begin(), edges_.end(), edge_less);
    std::sort(input_edges_.begin(), input_edges_.end(), input_less);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        if (edge.src == edge.dst) throw ConfigError("self-loop on neuron " + std::to_string(edge.src.value));
        if (e > 0 && edge.src == edges_[e - 1].src && edge.dst == edges_[e - 1].dst) {
            throw ConfigError("duplicate edge in graph");
        }
        const auto src = index_of(edge.src);
        if (!src || !index_of(edge.dst)) throw ConfigError("edge references a neuron missing from the graph");
        if (!std::isfinite(edge.w) || edge.w * sign_factor(nodes_[*src].sign) < 0.0) {
            throw ConfigError("edge weight sign disagrees with presynaptic label");
        }
    }
    for (const InputEdge& edge : input_edges_) {
        if (edge.enc >= n_encoders_) throw ConfigError("input edge references an unknown encoder");
        if (!index_of(edge.dst)) throw ConfigError("input edge references a neuron missing from the graph");
        if (!std::isfinite(edge.w) || edge.w < 0.0) throw ConfigError("input weights must be non-negative");
    }
}

std::optional<std::size_t> NetworkGraph::index_of(NeuronId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, NeuronId v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t NetworkGraph::index(NeuronId id) const {
    auto idx = index_of(id);
    if (!idx) throw InputError("unknown neuron id " + std::to_string(id.value));
    return *idx;
}

std::optional<std::size_t> NetworkGraph::edge_index(NeuronId src, NeuronId dst) const {
    const Edge probe{src, dst, 0.0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), probe, edge_less);
    if (it == edges_.end() || it->src != src || it->dst != dst) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<std::pair<std::size_t, std::size_t>> NetworkGraph::edge_indices() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edges_.size());
    // Edges are sorted by src, so src lookups advance monotonically.
    std::size_t src_idx = 0;
    for (const Edge& e : edges_) {
        while (nodes_[src_idx].id != e.src) ++src_idx;
        out.emplace_back(src_idx, index(e.dst));
    }
    return out;
}

std::vector<std::size_t> NetworkGraph::out_degrees() const {
    std::vector<std::size_t> d(size(), 0);
    for (auto [s, t] : edge_indices()) ++d[s];
    return d;
}

std::vector<std::size_t> NetworkGraph::in_degrees() const {
    std::vector<std::size_t> d(size(), 0);
    for (auto [s, t] : edge_indices()) ++d[t];
    return d;
}

std::vector<std::size_t> NetworkGraph::total_degrees() const {
    std::vector<std::size_t> d(size(), 0);
    for (auto [s, t] : edge_indices()) {
        ++d[s];
        ++d[t];
    }
    return d;
}

std::vector<std::vector<std::size_t>> NetworkGraph::neighbors() const {
    std::vector<std::vector<std::size_t>> nb(size());
    for (auto [s, t] : edge_indices()) {
        nb[s].push_back(t);
        nb[t].push_back(s);
    }
    for (auto& v : nb) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nb;
}

double NetworkGraph::density() const {
    const double n = static_cast<double>(size());
    if (n < 2) return 0.0;
    return static_cast<double>(edges_.size()) / (n * (n - 1.0));
}

NetworkGraph NetworkGraph::with_edges(std::vector<Edge> edges) const {
    return NetworkGraph(nodes_, std::move(edges), input_edges_, n_encoders_);
}

NetworkGraph NetworkGraph::with_weights(std::span<const double> edge_w, std::span<const double> input_w) const {
    if (edge_w.size() != edges_.size() || input_w.size() != input_edges_.size()) {
        throw InputError("weight vector size does not match the graph");
    }
    std::vector<Edge> edges = edges_;
    std::vector<InputEdge> inputs = input_edges_;
    for (std::size_t e = 0; e < edges.size(); ++e) edges[e].w = edge_w[e];
    for (std::size_t e = 0; e < inputs.size(); ++e) inputs[e].w = input_w[e];
    return NetworkGraph(nodes_, std::move(edges), std::move(inputs), n_encoders_);
}

NetworkGraph NetworkGraph::without_nodes(std::span<const NeuronId> removed) const {
    std::vector<NeuronId> gone(removed.begin(), removed.end());
    std::sort(gone.begin(), gone.end());
    auto is_gone = [&](NeuronId id) { return std::binary_search(gone.begin(), gone.end(), id); };
    std::vector<Node> nodes;
    std::copy_if(nodes_.begin(), nodes_.end(), std::back_inserter(nodes), [&](const Node& n) { return !is_gone(n.id); });
    std::vector<Edge> edges;
    std::copy_if(edges_.begin(), edges_.end(), std::back_inserter(edges),
                 [&](const Edge& e) { return !is_gone(e.src) && !is_gone(e.dst); });
    std::vector<InputEdge> inputs;
    std::copy_if(input_edges_.begin(), input_edges_.end(), std::back_inserter(inputs),
                 [&](const InputEdge& e) { return !is_gone(e.dst); });
    return NetworkGraph(std::move(nodes), std::move(edges), std::move(inputs), n_encoders_);
}

double connection_probability(double distance, double amplitude_c, double lambda_scale) {
    const double r = distance / lambda_scale;
    return amplitude_c * std::exp(-r * r);
}

std::array<double, 3> lattice_position(std::size_t index, const std::array<std::size_t, 3>& shape) {
    const std::size_t x = index % shape[0];
    const std::size_t y = (index / shape[0]) % shape[1];
    const std::size_t z = index / (shape[0] * shape[1]);
    return {static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)};
}

double draw_weight(Rng& rng, double scale, NeuronSign sign) {
    // 1 - U[0,1) lies in (0, 1].
    return sign_factor(sign) * scale * (1.0 - uniform01(rng));
}

NetworkGraph build_recurrent_graph(const TopologyConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t n = config.n_total;

    std::vector<Node> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i].id = NeuronId{static_cast<std::uint32_t>(i)};
        nodes[i].pos = lattice_position(i, config.lattice_shape);
    }

    // Shuffled partition into E and I at the configured ratio.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng label_rng = make_rng(seed, 1);
    std::shuffle(order.begin(), order.end(), label_rng);
    const std::size_t n_exc = config.n_excitatory();
    for (std::size_t k = 0; k < n; ++k) {
        nodes[order[k]].sign = k < n_exc ? NeuronSign::excitatory : NeuronSign::inhibitory;
    }

    Rng edge_rng = make_rng(seed, 2);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& a = nodes[i].pos;
            const auto& b = nodes[j].pos;
            const double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
            const double p = connection_probability(d, config.amplitude_c, config.lambda_scale);
            if (uniform01(edge_rng) < p) {
                edges.push_back({nodes[i].id, nodes[j].id, draw_weight(edge_rng, config.w_scale, nodes[i].sign)});
            }
        }
    }

    Rng input_rng = make_rng(seed, 3);
    std::vector<std::size_t> targets(n);
    std::iota(targets.begin(), targets.end(), 0);
    std::shuffle(targets.begin(), targets.end(), input_rng);
    const auto n_targets = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.input_fraction * static_cast<double>(n))));
    targets.resize(std::min(n_targets, n));
    std::sort(targets.begin(), targets.end());
    std::vector<InputEdge> inputs;
    for (std::uint32_t enc = 0; enc < config.n_encoders; ++enc) {
        for (std::size_t t : targets) {
            if (uniform01(input_rng) < config.input_connect_prob) {
                inputs.push_back({enc, nodes[t].id, draw_weight(input_rng, config.input_w_scale, NeuronSign::excitatory)});
            }
        }
    }
    return NetworkGraph(std::move(nodes), std::move(edges), std::move(inputs),
                        static_cast<std::uint32_t>(config.n_encoders));
}

double degree_variance(std::span<const std::size_t> degrees) {
    if (degrees.empty()) throw InputError("degree variance of an empty graph");
    const double n = static_cast<double>(degrees.size());
    double mean = 0.0;
    for (auto d : degrees) mean += static_cast<double>(d);
    mean /= n;
    double acc = 0.0;
    for (auto d : degrees) acc += (static_cast<double>(d) - mean) * (static_cast<double>(d) - mean);
    return acc / n;
}

double degree_variance(const NetworkGraph& graph) {
    if (graph.empty()) throw InputError("degree variance of an empty graph");
    const auto d = graph.total_degrees();
    return degree_variance(std::span<const std::size_t>(d));
}

}  // namespace hetsnn
