#pragma once

// Trace-based STDP with per-synapse heterogeneous parameters.

#include "hetsnn/distributions.hpp"
#include "hetsnn/topology.hpp"

#include <span>
#include <vector>

namespace hetsnn {

struct StdpParams {
    double a_plus_gain = 0.01;
    double a_minus_gain = 0.012;
    double trace_incr_plus = 1.0;
    double trace_incr_minus = 1.0;
    double tau_plus = 20.0;
    double tau_minus = 20.0;
    /// Bounds on |w|.
    double w_min = 0.0;
    double w_max = 4.0;

    void validate() const;
};

struct StdpProfile {
    GammaSpec a_plus_gain = GammaSpec::point_mass(0.01);
    GammaSpec a_minus_gain = GammaSpec::point_mass(0.012);
    GammaSpec tau_plus = GammaSpec::point_mass(20.0);
    GammaSpec tau_minus = GammaSpec::point_mass(20.0);
    double trace_incr_plus = 1.0;
    double trace_incr_minus = 1.0;
    double w_min = 0.0;
    double w_max = 4.0;

    void validate() const;
    static StdpProfile heterogeneous_default();
    StdpProfile homogenized() const;
};

/// Pre and post indices of a synapse. For input synapses pre is the encoder.
struct SynapseRef {
    std::uint32_t pre = 0;
    std::uint32_t post = 0;
};

struct TraceState {
    std::vector<double> t_pre;
    std::vector<double> t_post;

    static TraceState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
};

/// T <- T * exp(-dt / tau) for every trace.
TraceState decay_traces(TraceState traces, std::span<const StdpParams> params, double dt);
/// Adds a+ to T_pre on pre spikes and a- to T_post on post spikes.
TraceState bump_traces(TraceState traces, std::span<const SynapseRef> synapses, std::span<const std::uint8_t> pre_fired,
                       std::span<const std::uint8_t> post_fired, std::span<const StdpParams> params);
TraceState decay_and_bump_traces(TraceState traces, std::span<const SynapseRef> synapses,
                                 std::span<const std::uint8_t> pre_fired, std::span<const std::uint8_t> post_fired,
                                 std::span<const StdpParams> params, double dt);

/// Weight magnitudes after one update: +A+ T_pre on each post spike,
/// -A- T_post on each pre spike, clamped to [w_min, w_max]. Traces must
/// already be decayed (but not bumped) for the current step.
std::vector<double> apply_stdp(std::span<const double> magnitudes, const TraceState& traces,
                               std::span<const SynapseRef> synapses, std::span<const std::uint8_t> pre_fired,
                               std::span<const std::uint8_t> post_fired, std::span<const StdpParams> params);

struct SynapseParamTable {
    /// Aligned with graph.edges().
    std::vector<StdpParams> recurrent;
    /// Aligned with graph.input_edges().
    std::vector<StdpParams> input;
};

SynapseParamTable sample_stdp_params(const StdpProfile& profile, const NetworkGraph& graph, std::uint64_t seed);

}  // namespace hetsnn
