#include "hetsnn/kernels.hpp"
#include "hetsnn/topology.hpp"

namespace hetsnn {

kernels::Csr out_adjacency(const NetworkGraph& graph) {
    kernels::Csr csr;
    const std::size_t n = graph.size();
    std::vector<std::size_t> counts(n, 0);
    const auto idx = graph.edge_indices();
    for (auto [s, t] : idx) ++counts[s];
    csr.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) csr.offsets[i + 1] = csr.offsets[i] + counts[i];
    csr.targets.resize(idx.size());
    // edge_indices() is grouped by src in ascending dst-id order.
    std::vector<std::size_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
    for (auto [s, t] : idx) csr.targets[fill[s]++] = t;
    return csr;
}

std::vector<double> betweenness_scores(const NetworkGraph& graph) {
    return kernels::betweenness_parallel(out_adjacency(graph));
}

std::map<NeuronId, double> betweenness_centrality(const NetworkGraph& graph) {
    if (graph.empty()) throw InputError("betweenness of an empty graph");
    const auto scores = betweenness_scores(graph);
    std::map<NeuronId, double> out;
    for (std::size_t i = 0; i < graph.size(); ++i) out.emplace(graph.nodes()[i].id, scores[i]);
    return out;
}

}  // namespace hetsnn
