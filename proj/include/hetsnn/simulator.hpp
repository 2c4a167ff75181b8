#pragma once

// Network model bundle and the time-stepped LIF + STDP simulator.

#include "hetsnn/dynamics.hpp"
#include "hetsnn/kernels.hpp"
#include "hetsnn/plasticity.hpp"

#include <span>
#include <utility>
#include <vector>

namespace hetsnn {

/// Graph plus the per-neuron and per-synapse parameters sampled for it.
struct Model {
    NetworkGraph graph;
    /// Aligned with graph.nodes().
    std::vector<NeuronParams> neurons;
    SynapseParamTable stdp;

    /// Throws ConfigError when the parameter tables are misaligned.
    void validate() const;
    /// Drops neurons and their synapses, keeping parameters aligned.
    Model without_nodes(std::span<const NeuronId> removed) const;
    /// Replaces the recurrent edge set; parameters of surviving edges are
    /// kept and new edges get `fresh`.
    Model with_edges(std::vector<Edge> edges, const StdpParams& fresh) const;
};

Model make_model(const NetworkGraph& graph, const HeterogeneityProfile& neurons, const StdpProfile& stdp,
                 std::uint64_t seed);

struct SimulationOptions {
    double dt = 0.25;
    /// Decay constant of the current-based synapses.
    double tau_syn = 5.0;
    /// v is clamped at v_reset - slack.
    double v_floor_slack = 20.0;
    bool plastic = false;
    /// Start at rest instead of uniform in [v_reset, v_threshold).
    bool start_at_rest = true;
    /// Time constant of the online activity filter used by readouts.
    double filter_tau = 20.0;
    bool parallel = true;

    void validate() const;
};

class Simulator {
public:
    /// Throws ConfigError if dt exceeds min(tau_m) / 10.
    Simulator(Model model, SimulationOptions options);

    /// Fresh initial state (and empty record) derived from seed.
    void reset(std::uint64_t seed);
    NetworkState state() const;
    void set_state(const NetworkState& state);

    /// One dt: encoder spikes are delivered, membranes integrated, STDP
    /// applied when plastic, then recurrent spikes scattered. Returns the
    /// neurons that fired, stamped at the end of the step.
    std::vector<NeuronId> step(std::span<const double> i_ext, std::span<const std::uint32_t> active_encoders = {});
    /// Runs every step of `input` (whose dt must match) from the current state.
    void advance(const SpikeTrains& input, std::span<const double> bias = {});
    /// Runs n steps with no encoder input.
    void advance_silent(std::size_t n_steps, std::span<const double> bias = {});

    /// Spikes since the last reset; duration is the elapsed time.
    SpikeRecord record() const;
    /// Exponentially filtered spike trains at the current time, aligned with nodes().
    std::span<const double> filtered_activity() const { return filtered_; }
    /// The model with the current (possibly plastic) weights written back.
    Model trained_model() const;
    const Model& model() const { return model_; }
    const SimulationOptions& options() const { return options_; }
    double now() const { return t_now_; }

private:
    void deliver_inputs(std::span<const std::uint32_t> active_encoders);

    Model model_;
    SimulationOptions options_;
    kernels::LifArrays lif_;
    kernels::SynapseArrays recurrent_;
    kernels::SynapseArrays input_;
    std::vector<double> presyn_sign_;
    // Synapse indices grouped by presynaptic neuron / encoder.
    kernels::Csr rec_out_;
    kernels::Csr inp_out_;
    std::vector<std::uint8_t> fired_;
    std::vector<std::uint8_t> enc_fired_;
    std::vector<double> filtered_;
    std::vector<Spike> spikes_;
    double syn_decay_ = 0.0;
    double filter_decay_ = 0.0;
    double t_now_ = 0.0;
};

struct SimulationResult {
    SpikeRecord record;
    NetworkState final_state;
    Model trained;
};

SimulationResult simulate(const Model& model, const SpikeTrains& input, double duration,
                          const SimulationOptions& options, std::uint64_t seed);

/// Single-step form: advances `state` by options.dt and returns the new
/// state plus the neurons that fired.
std::pair<NetworkState, std::vector<NeuronId>> step(const NetworkState& state, const Model& model,
                                                    std::span<const double> input_current,
                                                    const SimulationOptions& options);

}  // namespace hetsnn
