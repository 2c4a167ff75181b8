#pragma once

// Memory capacity, spike statistics, separation rank, heterogeneity,
// synaptic-operation energy and forecast error metrics.

#include "hetsnn/dynamics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace hetsnn {

struct MemoryCapacityReport {
    /// per_delay[k] is C(k + 1).
    std::vector<double> per_delay;
    double total = 0.0;
    std::size_t tau_max = 100;
};

/// Rows of `features` are aligned with `input`. For each delay a ridge
/// readout (with intercept) is fitted on the first train_fraction of rows
/// t >= tau_max and scored on the remainder by squared correlation.
MemoryCapacityReport memory_capacity(const Eigen::MatrixXd& features, std::span<const double> input,
                                     std::size_t tau_max = 100, double regularization = 1e-4,
                                     double train_fraction = 0.7);

struct SpikeStats {
    std::vector<std::size_t> counts;
    /// Mean count per neuron.
    double s_tilde = 0.0;
    /// Mean firing rate in Hz.
    double nu_bar = 0.0;
    double window = 0.0;
};

/// Counts over the whole record. When `readout` is given, only spikes up to
/// the first spike of any readout neuron are counted (the whole record if
/// the readout stays silent).
SpikeStats spike_stats(const SpikeRecord& record, std::span<const NeuronId> readout = {});

double spike_efficiency(double capacity, const SpikeStats& stats);

struct SeparationReport {
    std::vector<double> singular_values;
    std::size_t effective_rank = 0;
    double threshold = 0.99;
};

SeparationReport effective_rank(const Eigen::MatrixXd& final_states, double threshold = 0.99);

struct HeterogeneityScore {
    double value = 0.0;
    /// Set when there are fewer draws than parameters.
    bool degenerate = false;
};

/// Determinant of the sample covariance of the rows.
HeterogeneityScore heterogeneity_score(const Eigen::MatrixXd& samples);

struct EnergyReport {
    double total_sops = 0.0;
    double energy = 0.0;
    /// Dense SOPs over these SOPs; 1 when no parent is given.
    double sop_ratio_vs_dense = 1.0;
};

/// Sum over neurons of spike count times out-degree in `graph`. Spikes of
/// neurons absent from the graph are ignored.
EnergyReport count_sops(const SpikeRecord& record, const NetworkGraph& graph, const NetworkGraph* dense_parent = nullptr,
                        double energy_per_sop = 1.0);

/// RMSE(t) = sqrt(mean_i ((forecast - truth) / sigma_i)^2) per row.
std::vector<double> nrmse(const Eigen::MatrixXd& forecast, const Eigen::MatrixXd& truth, std::span<const double> sigma);

/// Number of entries strictly below epsilon.
std::size_t vpt(std::span<const double> rmse, double epsilon = 0.1);

}  // namespace hetsnn
