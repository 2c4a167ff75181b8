#pragma once

// Iterative, task-agnostic Lyapunov noise pruning of a spiking model.

#include "hetsnn/bayesopt.hpp"
#include "hetsnn/covariance.hpp"
#include "hetsnn/lyapunov.hpp"
#include "hetsnn/sparsify.hpp"

#include <iosfwd>

namespace hetsnn {

struct PruneConfig {
    /// Density factor rho of the keep probabilities.
    double rho_density = 0.9;
    /// When set, rho is divided by the median edge score so that it acts
    /// as the keep probability of a median edge.
    bool rho_relative = true;
    double p_min = 1e-3;
    DiagonalMode diagonal_mode = DiagonalMode::retain;
    double excitability_gain = 1.0;
    NodeThreshold centrality;
    std::size_t m_delocalize = 10;
    /// |w| of added edges is drawn uniform in (0, delocalize_w_scale].
    double delocalize_w_scale = 2.0;
    /// Tolerance of the quadratic-form check reported per iteration.
    double epsilon_quadform = 0.2;
    std::size_t iterations = 10;
    double noise_sigma = 1.0;
    double shift_margin = 0.01;
    double harmonic_multiplier = 1.0;
    double epsilon_h = 1e-6;
    /// Rate model used for node exponents: W = gain * w, uniform drive.
    double coupling_gain = 0.05;
    double drive = 0.5;
    LyapunovOptions lyapunov;
    bool optimize_timescales = true;
    std::size_t timescale_budget = 10;
    /// Floor applied to resampled membrane time constants.
    double tau_m_min = 2.5;

    void validate() const;
};

struct LnpLogEntry {
    std::size_t iter = 0;
    std::size_t n_neurons = 0;
    std::size_t n_synapses = 0;
    double density = 0.0;
    double lambda_max = 0.0;
    double degree_var = 0.0;
    double shift_applied = 0.0;
    std::uint64_t seed = 0;
};

/// Writes one JSON object per line with a fixed key order.
void write_lnp_log(std::ostream& out, std::span<const LnpLogEntry> log);

struct LnpResult {
    Model final_model;
    /// Model after each iteration.
    std::vector<Model> models;
    std::vector<LnpLogEntry> log;
};

/// Per-iteration product of the covariance-weighted synapse step.
struct SynapsePruneStep {
    Model model;
    Eigen::MatrixXd a;
    Eigen::MatrixXd a_sparse;
    /// Node exponents of the input model, aligned with its nodes().
    std::vector<double> node_exponent;
    double shift_applied = 0.0;
    double rho_effective = 0.0;
};

/// Step 1: node exponents, Lyapunov matrix, covariance and sampling.
SynapsePruneStep lyapunov_prune_synapses(const Model& model, const PruneConfig& config, std::uint64_t seed);

struct TimescaleResult {
    Model model;
    GammaSpec tau_m_exc;
    GammaSpec tau_m_inh;
    double lambda_max = 0.0;
    BoResult search;
};

/// Bayesian search over the gamma laws of the excitatory and inhibitory
/// membrane time constants maximizing -|lambda_max(-D(tau) + L)|, where
/// offdiag holds the signed coupling of each edge. The neurons are then
/// redrawn from the best laws. Throws ConfigError for budget < 5.
TimescaleResult optimize_timescales(const Model& model, std::span<const double> offdiag, std::size_t budget,
                                    std::uint64_t seed, double tau_m_min = 2.5);

/// Runs config.iterations rounds of synapse sampling, centrality node
/// removal, delocalizing edge addition and timescale optimization.
LnpResult run_lnp(const Model& model, const PruneConfig& config, std::uint64_t seed);

/// Removes the neurons with the lowest rates (ties by id) one at a time
/// until at most target_synapses remain. rates is aligned with nodes().
Model activity_prune(const Model& model, std::span<const double> rates, std::size_t target_synapses);

}  // namespace hetsnn
