#pragma once

// Recurrent network graph: spatial placement, distance-dependent
// connectivity, E/I labels and the graph queries used by pruning.

#include "hetsnn/common.hpp"
#include "hetsnn/kernels.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hetsnn {

struct TopologyConfig {
    std::size_t n_total = 200;
    /// Excitatory : inhibitory parts.
    std::pair<std::size_t, std::size_t> ei_ratio{4, 1};
    /// Peak connection probability C.
    double amplitude_c = 0.3;
    /// Distance scale lambda, in lattice units.
    double lambda_scale = 2.0;
    /// Fraction of recurrent neurons that receive encoder input.
    double input_fraction = 0.30;
    double input_connect_prob = 0.5;
    std::size_t n_encoders = 12;
    std::array<std::size_t, 3> lattice_shape{6, 6, 6};
    /// Recurrent |w| is drawn uniform in (0, w_scale].
    double w_scale = 2.0;
    double input_w_scale = 4.0;

    std::size_t n_excitatory() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct Node {
    NeuronId id;
    std::array<double, 3> pos{};
    NeuronSign sign = NeuronSign::excitatory;
};

/// Directed synapse src -> dst. The weight's sign follows the src label.
struct Edge {
    NeuronId src;
    NeuronId dst;
    double w = 0.0;
};

struct InputEdge {
    std::uint32_t enc = 0;
    NeuronId dst;
    double w = 0.0;
};

/// Immutable signed digraph of E/I neurons. Nodes are kept sorted by id,
/// edges by (src, dst) and input edges by (enc, dst). Local indices are
/// positions in nodes(); they change when nodes are removed, ids do not.
class NetworkGraph {
public:
    NetworkGraph() = default;
    /// Sorts and validates; throws ConfigError on a broken invariant.
    NetworkGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::vector<InputEdge> input_edges,
                 std::uint32_t n_encoders);

    std::span<const Node> nodes() const { return nodes_; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const InputEdge> input_edges() const { return input_edges_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    std::uint32_t n_encoders() const { return n_encoders_; }

    std::optional<std::size_t> index_of(NeuronId id) const;
    /// Throws InputError for an unknown id.
    std::size_t index(NeuronId id) const;
    const Node& node(NeuronId id) const { return nodes_[index(id)]; }
    std::optional<std::size_t> edge_index(NeuronId src, NeuronId dst) const;
    bool has_edge(NeuronId src, NeuronId dst) const { return edge_index(src, dst).has_value(); }

    /// Edge endpoints as local indices, aligned with edges().
    std::vector<std::pair<std::size_t, std::size_t>> edge_indices() const;
    std::vector<std::size_t> out_degrees() const;
    std::vector<std::size_t> in_degrees() const;
    /// in + out degree per local index.
    std::vector<std::size_t> total_degrees() const;
    /// Undirected neighbor sets (in or out), local indices, sorted.
    std::vector<std::vector<std::size_t>> neighbors() const;
    /// Synapse count over N(N-1).
    double density() const;

    NetworkGraph with_edges(std::vector<Edge> edges) const;
    /// Replaces recurrent and input weights (aligned with edges()/input_edges()).
    NetworkGraph with_weights(std::span<const double> edge_w, std::span<const double> input_w) const;
    /// Drops the given neurons and every incident synapse.
    NetworkGraph without_nodes(std::span<const NeuronId> removed) const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<InputEdge> input_edges_;
    std::uint32_t n_encoders_ = 0;
};

/// C * exp(-(d / lambda)^2).
double connection_probability(double distance, double amplitude_c, double lambda_scale);

/// Row-major fill of the 3-D integer lattice.
std::array<double, 3> lattice_position(std::size_t index, const std::array<std::size_t, 3>& shape);

NetworkGraph build_recurrent_graph(const TopologyConfig& config, std::uint64_t seed);

/// Draws |w| uniform in (0, scale] with the presynaptic sign.
double draw_weight(Rng& rng, double scale, NeuronSign sign);

/// Outgoing adjacency over local indices.
kernels::Csr out_adjacency(const NetworkGraph& graph);

/// Shortest-path betweenness over the unweighted directed structure, raw
/// pair counts, ties split fractionally. Parallel over source nodes.
std::map<NeuronId, double> betweenness_centrality(const NetworkGraph& graph);
/// Same scores aligned with nodes().
std::vector<double> betweenness_scores(const NetworkGraph& graph);

/// Variance of the total-degree distribution; throws InputError on an empty graph.
double degree_variance(const NetworkGraph& graph);
double degree_variance(std::span<const std::size_t> degrees);

}  // namespace hetsnn
