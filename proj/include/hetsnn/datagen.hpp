#pragma once

// Chaotic benchmark series and synthetic spike-pattern classification tasks.

#include "hetsnn/common.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace hetsnn {

enum class ChaoticSystem { lorenz63, lorenz96, rossler };

struct Lorenz63Params {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

struct Lorenz96Params {
    double forcing = 8.0;
    std::size_t k = 8;
    /// Adds J fast variables per slow one when set.
    bool two_scale = false;
    std::size_t j = 4;
    double h = 1.0;
    double c = 10.0;
    double b = 10.0;
};

struct RosslerParams {
    double a = 0.2;
    double b = 0.2;
    double c = 5.7;
};

struct ChaoticConfig {
    ChaoticSystem system = ChaoticSystem::lorenz63;
    Lorenz63Params lorenz63;
    Lorenz96Params lorenz96;
    RosslerParams rossler;
    double dt = 0.01;
    std::size_t n_steps = 3000;
    std::size_t washout = 500;
    /// Seeds the perturbation of the default initial condition.
    std::uint64_t seed = 0;
    /// Overrides the seeded initial condition.
    std::optional<Eigen::VectorXd> initial;

    void validate() const;
    std::size_t state_dim() const;
};

/// Rows are the states after each step past the washout; for a two-scale
/// Lorenz96 only the slow variables are kept.
struct TimeSeries {
    Eigen::MatrixXd values;
    double dt = 0.0;
};

Eigen::VectorXd lorenz63_rhs(const Eigen::VectorXd& s, const Lorenz63Params& p);
Eigen::VectorXd lorenz96_rhs(const Eigen::VectorXd& s, const Lorenz96Params& p);
Eigen::VectorXd rossler_rhs(const Eigen::VectorXd& s, const RosslerParams& p);

/// Default starting state for the configured system.
Eigen::VectorXd initial_state(const ChaoticConfig& config);

TimeSeries generate_lorenz63(const ChaoticConfig& config);
TimeSeries generate_lorenz96(const ChaoticConfig& config);
TimeSeries generate_rossler(const ChaoticConfig& config);
/// Dispatches on config.system.
TimeSeries generate_series(const ChaoticConfig& config);

struct NormalizedSeries {
    Eigen::MatrixXd values;
    Eigen::RowVectorXd mean;
    /// Population standard deviation per column.
    std::vector<double> sigma;

    Eigen::MatrixXd denormalize(const Eigen::MatrixXd& centered) const;
};

/// Subtracts the column means; throws InputError on fewer than 2 rows or a
/// constant column.
NormalizedSeries normalize_series(const Eigen::MatrixXd& series);

struct SyntheticClassTask {
    std::size_t n_classes = 4;
    std::size_t n_channels = 12;
    /// Samples per stimulus.
    std::size_t n_samples = 10;
    double noise = 0.1;
    std::size_t trials_per_class = 10;
    double train_fraction = 0.5;
    /// Per-class templates (n_samples x n_channels, values in [0, 1]);
    /// drawn uniformly from the seed when empty.
    std::vector<Eigen::MatrixXd> templates;

    void validate() const;
};

struct ClassificationData {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<Eigen::MatrixXd> templates;
};

/// Template plus Gaussian noise clipped to [0, 1], trials ordered by class.
/// The split takes the first floor(train_fraction * trials) trials of each
/// class for training.
ClassificationData make_classification_task(const SyntheticClassTask& spec, std::uint64_t seed);

}  // namespace hetsnn
