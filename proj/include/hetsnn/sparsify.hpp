#pragma once

// Building blocks of Lyapunov noise pruning: the edge-wise Lyapunov matrix,
// covariance-weighted synapse sampling, centrality node removal and
// degree-variance edge restoration.

#include "hetsnn/simulator.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hetsnn {

/// Harmonic mean of |v| + eps_h minus eps_h, signed by the arithmetic mean
/// of the pool (positive when the mean is zero). Throws on an empty pool.
double shifted_harmonic_mean(std::span<const double> pool, double epsilon_h = 1e-6);

struct LyapunovMatrix {
    /// Aligned with graph.edges().
    std::vector<double> entries;
    /// Size of the pooled neighbor multiset behind each entry.
    std::vector<std::size_t> pool_size;
    /// Entries that fell back to the endpoints' own exponents.
    std::vector<bool> fallback;
};

/// For edge (i, j) pools the exponents of the undirected neighbors of i and
/// of j as a multiset and takes multiplier * shifted_harmonic_mean(pool).
/// node_exponent is aligned with graph.nodes().
LyapunovMatrix build_lyapunov_matrix(const NetworkGraph& graph, std::span<const double> node_exponent,
                                     double multiplier = 1.0, double epsilon_h = 1e-6);

struct LinearizedSystem {
    /// A = -D + L; A(i, j) couples presynaptic j into i.
    Eigen::MatrixXd a;
    Eigen::VectorXd d;
    Eigen::VectorXd b;
    double sigma = 1.0;
};

/// D_ii = 1 / tau_m(i); off-diagonal entry for synapse j -> i is
/// sign(w) * |offdiag[e]|.
LinearizedSystem linearize(const Model& model, std::span<const double> offdiag, double drive, double sigma);

/// Unscaled edge scores |A_ij| (S_ii + S_jj - 2 S_ij) for excitatory and
/// |A_ij| (S_ii + S_jj + 2 S_ij) for inhibitory entries; zero elsewhere.
Eigen::MatrixXd edge_scores(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma);

/// rho * score clamped to [p_min, 1] on the off-diagonal support of A, 1 on
/// the diagonal and 0 elsewhere.
Eigen::MatrixXd keep_probabilities(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma, double rho,
                                   double p_min = 1e-3);

enum class DiagonalMode { retain, perturb };

/// Keeps each off-diagonal nonzero with probability p (rescaled by 1/p),
/// row-major draw order. In perturb mode A_ii becomes A_ii - Delta_i.
Eigen::MatrixXd sparsify(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p, DiagonalMode mode, Rng& rng);

/// One seeded draw of sparsify with probabilities from keep_probabilities.
Eigen::MatrixXd prune_synapses(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma, double rho, double p_min,
                               DiagonalMode mode, std::uint64_t seed);

/// Writes A_sparse back onto the model: removed entries drop their synapse,
/// kept ones scale |w| by A_sparse / A (clamped to the synapse's w_max), and
/// diagonal changes shift v_rest by -Delta_i * tau_m * excitability_gain.
Model apply_sparsification(const Model& model, const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_sparse,
                           double excitability_gain = 1.0);

struct NodeThreshold {
    enum class Kind { absolute, quantile };
    Kind kind = Kind::quantile;
    /// Score threshold, or the quantile q in [0, 1).
    double value = 0.05;
};

/// Neurons whose betweenness falls below the threshold, in id order. In
/// quantile mode exactly floor(q N) lowest scores are chosen (ties by id).
/// Throws InputError if every neuron would be removed.
std::vector<NeuronId> nodes_below_threshold(const NetworkGraph& graph, const NodeThreshold& threshold);
NetworkGraph prune_nodes(const NetworkGraph& graph, const NodeThreshold& threshold);

struct DelocalizeResult {
    NetworkGraph graph;
    std::vector<Edge> added;
    /// m minus the number of edges actually added.
    std::size_t shortfall = 0;
};

/// Greedily adds m edges u -> v (not already present, u within two
/// undirected hops of v) maximizing the degree-variance gain, ties by
/// lexicographic (u, v) id. Weights are drawn like initial weights.
DelocalizeResult delocalize_edges(const NetworkGraph& graph, std::size_t m, std::uint64_t seed, double w_scale);

}  // namespace hetsnn
