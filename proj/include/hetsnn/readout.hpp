#pragma once

// Reservoir state features and the trained readout layers.

#include "hetsnn/dynamics.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hetsnn {

/// Rows are timestamps, columns the sampled neurons.
struct StateFeatures {
    Eigen::MatrixXd values;
    std::vector<NeuronId> neurons;
    std::vector<double> timestamps;
    double filter_tau = 20.0;
};

/// Feature (t, n) = sum over spikes s of n with s <= t of exp(-(t - s) / tau).
StateFeatures extract_features(const SpikeRecord& record, std::span<const NeuronId> sampled, double filter_tau,
                               std::span<const double> timestamps);

/// Ridge regression y = X W + bias.
struct LinearReadout {
    Eigen::MatrixXd weights;
    Eigen::RowVectorXd bias;
    double regularization = 0.0;

    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

/// Minimizes ||X W - Y||^2 + reg ||W||^2. With an intercept the columns are
/// centered first and the bias is not penalized.
LinearReadout fit_linear_readout(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double regularization,
                                 bool intercept = false);

/// Multi-target ridge that factors the Gram matrix once; used when many
/// targets share one design matrix.
class RidgeSolver {
public:
    RidgeSolver(const Eigen::MatrixXd& x, double regularization, bool intercept);
    LinearReadout solve(const Eigen::MatrixXd& y) const;

private:
    Eigen::MatrixXd x_;
    Eigen::RowVectorXd x_mean_;
    Eigen::LDLT<Eigen::MatrixXd> gram_;
    double regularization_;
    bool intercept_;
};

/// Readout over sampled neurons: optional fixed random tanh hidden layer,
/// then a ridge output layer.
struct ReadoutLayer {
    std::vector<NeuronId> sampled_neurons;
    /// Input, optional hidden and output sizes.
    std::vector<std::size_t> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::RowVectorXd> biases;
    double regularization = 0.0;

    Eigen::MatrixXd predict(const Eigen::MatrixXd& features) const;
    /// Argmax over outputs.
    std::vector<std::size_t> classify(const Eigen::MatrixXd& features) const;
};

/// Linear regression readout (one output per target column).
ReadoutLayer fit_regression_readout(const StateFeatures& features, const Eigen::MatrixXd& targets,
                                    double regularization);

/// One-vs-rest ridge classifier, with a 20-unit random hidden layer when
/// hidden_units > 0.
ReadoutLayer fit_classifier(const StateFeatures& features, std::span<const std::size_t> labels, std::size_t n_classes,
                            double regularization, std::size_t hidden_units, std::uint64_t seed);

/// The max(1, floor(fraction * N)) highest-betweenness neurons, ordered by
/// score descending then id ascending.
std::vector<NeuronId> select_readout_neurons(const NetworkGraph& graph, double fraction);

}  // namespace hetsnn
