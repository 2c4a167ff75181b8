#pragma once

// End-to-end pipelines shared by the command line and the acceptance suite:
// model construction, STDP training, memory, forecasting and
// classification tasks, pruning and distribution search.

#include "hetsnn/datagen.hpp"
#include "hetsnn/encoding.hpp"
#include "hetsnn/lnp.hpp"
#include "hetsnn/metrics.hpp"
#include "hetsnn/readout.hpp"
#include "hetsnn/simulator.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace hetsnn {

enum class TaskKind { lorenz63, lorenz96, rossler, synth_class };
/// Accepts lorenz63, lorenz96, rossler and synth-class.
TaskKind parse_task(std::string_view name);
std::string_view task_name(TaskKind task);
bool is_forecast(TaskKind task);

enum class BoObjective { efficiency, capacity, spike_count };
BoObjective parse_bo_objective(std::string_view name);
std::string_view bo_objective_name(BoObjective objective);

enum class ForecastMode { closed_loop, teacher_forced };
enum class PruneMode { lnp, activity };

struct DynamicsSection {
    HeterogeneityProfile profile = HeterogeneityProfile::heterogeneous_default();
    /// False draws every neuron at the profile means.
    bool heterogeneous = true;
    SimulationOptions simulation;
};

struct PlasticitySection {
    StdpProfile profile = StdpProfile::heterogeneous_default();
    bool heterogeneous = true;
    /// Length of the STDP training stream, ms.
    double train_duration = 2000.0;
};

struct ReadoutSection {
    /// Share of neurons (by betweenness) feeding the readout.
    double fraction = 0.2;
    double regularization = 1e-3;
    std::size_t hidden_units = 0;
};

struct MetricsSection {
    std::size_t tau_max = 100;
    /// White-noise samples driven through the reservoir for capacity runs.
    std::size_t mc_samples = 3000;
    double mc_regularization = 1e-4;
    double mc_train_fraction = 0.7;
    /// Share of neurons read out for capacity runs.
    double mc_fraction = 1.0;
    double energy_per_sop = 1.0;
    double vpt_epsilon = 0.1;
    double rank_threshold = 0.99;
    /// Distinct stimuli in the separation-rank run.
    std::size_t rank_stimuli = 20;
};

struct LnpSection {
    PruneConfig config;
    PruneMode mode = PruneMode::lnp;
    /// Activity mode: final synapse count as a share of the initial count.
    double activity_keep = 0.5;
};

struct BoSection {
    BoConfig config;
    BoObjective objective = BoObjective::efficiency;
    /// STDP training length before each objective evaluation, ms.
    double train_duration = 500.0;
};

struct DataSection {
    ChaoticConfig chaotic;
    /// Keep every n-th integrator step.
    std::size_t subsample = 2;
    std::size_t warmup_samples = 100;
    std::size_t train_samples = 500;
    std::size_t test_samples = 100;
    ForecastMode forecast_mode = ForecastMode::closed_loop;
    SyntheticClassTask classes;
    double stimulus_ms = 100.0;
    double blank_ms = 100.0;
};

struct ExperimentConfig {
    TopologyConfig topology;
    DynamicsSection dynamics;
    PlasticitySection plasticity;
    RateEncoderConfig encoding;
    ReadoutSection readout;
    MetricsSection metrics;
    LnpSection lnp;
    BoSection bo;
    DataSection data;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";

    /// Throws ConfigError naming the section at fault; a missing seed is an error.
    void validate() const;
    std::uint64_t require_seed() const;
};

/// Profiles as configured, homogenized where heterogeneity is switched off.
HeterogeneityProfile neuron_profile(const ExperimentConfig& config);
StdpProfile stdp_profile(const ExperimentConfig& config);

Model build_model(const ExperimentConfig& config, std::uint64_t seed);
/// Same graph as build_model, parameters drawn from `set`.
Model build_model_from(const ExperimentConfig& config, const ParamDistributionSet& set, std::uint64_t seed);

/// Drives a simulator through signal rows (values in [0, 1]), each held for
/// one encoding window, and samples the filtered activity of `sampled`
/// (local indices) at the end of every row.
class ReservoirDriver {
public:
    ReservoirDriver(const Model& model, const ExperimentConfig& config, std::size_t channels, bool plastic,
                    std::uint64_t seed);

    Eigen::MatrixXd drive(const Eigen::MatrixXd& signal, std::span<const std::size_t> sampled);
    /// Single row; returns the sampled activity after it.
    Eigen::RowVectorXd drive_row(const Eigen::RowVectorXd& row, std::span<const std::size_t> sampled);
    void drive_silent(double duration_ms);
    /// Holds each row for window_ms instead of the encoder window.
    Eigen::RowVectorXd drive_stimulus(const Eigen::MatrixXd& rows, double window_ms,
                                      std::span<const std::size_t> sampled);

    Simulator& simulator() { return sim_; }
    const RateEncoderConfig& encoder() const { return encoder_; }

private:
    Simulator sim_;
    RateEncoderConfig encoder_;
    std::uint64_t seed_;
    std::uint64_t rows_ = 0;
    // Previous row, for temporal-difference encoding.
    Eigen::RowVectorXd prev_;
};

/// Local indices of the given ids.
std::vector<std::size_t> local_indices(const NetworkGraph& graph, std::span<const NeuronId> ids);

/// Training signal for a task, values in [0, 1], at least `rows` rows.
Eigen::MatrixXd training_signal(const ExperimentConfig& config, TaskKind task, std::size_t rows, std::uint64_t seed);
/// Uniform white noise in [0, 1].
Eigen::VectorXd white_noise(std::size_t n, std::uint64_t seed);

struct TrainResult {
    Model trained;
    SpikeRecord record;
    SpikeStats stats;
};

/// Runs STDP over `duration` ms of the task's training stream.
TrainResult train_stdp(const Model& model, const ExperimentConfig& config, TaskKind task, double duration,
                       std::uint64_t seed);
/// Same, over white noise (capacity runs and distribution search).
TrainResult train_stdp_noise(const Model& model, const ExperimentConfig& config, double duration, std::uint64_t seed);

struct MemoryResult {
    MemoryCapacityReport capacity;
    SpikeStats stats;
    double efficiency = 0.0;
    SpikeRecord record;
};

MemoryResult run_memory_task(const Model& model, const ExperimentConfig& config, std::uint64_t seed);

struct ForecastResult {
    std::vector<double> nrmse;
    double nrmse_mean = 0.0;
    std::size_t vpt = 0;
    Eigen::MatrixXd forecast;
    Eigen::MatrixXd truth;
    LinearReadout readout;
    SpikeRecord record;
};

struct ForecastData {
    NormalizedSeries series;
    /// Affine map from centered values to encoder input.
    Eigen::RowVectorXd lo;
    Eigen::RowVectorXd hi;

    Eigen::MatrixXd to_unit(const Eigen::MatrixXd& centered) const;
};

ForecastData forecast_data(const ExperimentConfig& config, TaskKind task, std::uint64_t seed);
ForecastResult run_forecast(const Model& model, const ExperimentConfig& config, TaskKind task, std::uint64_t seed);

struct ClassificationResult {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<std::size_t> predictions;
    std::vector<std::size_t> truth;
    ReadoutLayer classifier;
    SpikeRecord record;
};

ClassificationResult run_classification(const Model& model, const ExperimentConfig& config, std::uint64_t seed);

/// Final-state matrix over `n_stimuli` distinct noiseless stimuli, all neurons.
Eigen::MatrixXd stimulus_final_states(const Model& model, const ExperimentConfig& config, std::size_t n_stimuli,
                                      std::uint64_t seed);
SeparationReport separation_rank(const Model& model, const ExperimentConfig& config, std::uint64_t seed);

struct PruneOutcome {
    Model final_model;
    std::vector<Model> models;
    std::vector<LnpLogEntry> log;
};

/// Lyapunov noise pruning.
PruneOutcome prune_lnp(const Model& model, const ExperimentConfig& config, std::uint64_t seed);
/// Activity pruning to `target_synapses`, spread over the configured
/// number of iterations; rates come from the task's training stream.
PruneOutcome prune_activity(const Model& model, const ExperimentConfig& config, TaskKind task,
                            std::size_t target_synapses, std::uint64_t seed);

struct BoOutcome {
    ParamDistributionSet best;
    BoResult raw;
    /// Capacity, spike count and efficiency of every evaluation, aligned with the trace.
    std::vector<MemoryResult> evaluations;
};

/// Scores a distribution set by training and running the capacity task.
MemoryResult evaluate_distribution(const ExperimentConfig& config, const ParamDistributionSet& set,
                                   std::uint64_t seed);
double objective_value(BoObjective objective, const MemoryResult& result);
BoOutcome run_distribution_search(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace hetsnn
