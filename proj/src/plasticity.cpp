#include "hetsnn/plasticity.hpp"

#include <algorithm>
#include <cmath>

namespace hetsnn {

void StdpParams::validate() const {
    if (!(tau_plus > 0.0) || !(tau_minus > 0.0)) throw ConfigError("plasticity: time constants must be positive");
    if (!(w_min <= w_max)) throw ConfigError("plasticity: w_min must not exceed w_max");
    if (a_plus_gain < 0.0 || a_minus_gain < 0.0) throw ConfigError("plasticity: gains must be non-negative");
}

void StdpProfile::validate() const {
    if (!(tau_plus.mean() > 0.0) || !(tau_minus.mean() > 0.0)) {
        throw ConfigError("plasticity: time-constant distributions must have positive mean");
    }
    if (a_plus_gain.mean() < 0.0 || a_minus_gain.mean() < 0.0) throw ConfigError("plasticity: gains must be non-negative");
    if (!(w_min <= w_max)) throw ConfigError("plasticity: w_min must not exceed w_max");
}

StdpProfile StdpProfile::heterogeneous_default() {
    StdpProfile p;
    const auto d = ParamDistributionSet::bio_defaults();
    p.a_plus_gain = d[ParamDistributionSet::a_plus];
    p.a_minus_gain = d[ParamDistributionSet::a_minus];
    p.tau_plus = d[ParamDistributionSet::tau_plus];
    p.tau_minus = d[ParamDistributionSet::tau_minus];
    return p;
}

StdpProfile StdpProfile::homogenized() const {
    StdpProfile p = *this;
    p.a_plus_gain = a_plus_gain.homogenized();
    p.a_minus_gain = a_minus_gain.homogenized();
    p.tau_plus = tau_plus.homogenized();
    p.tau_minus = tau_minus.homogenized();
    return p;
}

TraceState decay_traces(TraceState traces, std::span<const StdpParams> params, double dt) {
    if (!(dt > 0.0)) throw ConfigError("plasticity: dt must be positive");
    for (std::size_t k = 0; k < params.size(); ++k) {
        traces.t_pre[k] *= std::exp(-dt / params[k].tau_plus);
        traces.t_post[k] *= std::exp(-dt / params[k].tau_minus);
    }
    return traces;
}

TraceState bump_traces(TraceState traces, std::span<const SynapseRef> synapses, std::span<const std::uint8_t> pre_fired,
                       std::span<const std::uint8_t> post_fired, std::span<const StdpParams> params) {
    for (std::size_t k = 0; k < synapses.size(); ++k) {
        if (pre_fired[synapses[k].pre]) traces.t_pre[k] += params[k].trace_incr_plus;
        if (post_fired[synapses[k].post]) traces.t_post[k] += params[k].trace_incr_minus;
    }
    return traces;
}

TraceState decay_and_bump_traces(TraceState traces, std::span<const SynapseRef> synapses,
                                 std::span<const std::uint8_t> pre_fired, std::span<const std::uint8_t> post_fired,
                                 std::span<const StdpParams> params, double dt) {
    return bump_traces(decay_traces(std::move(traces), params, dt), synapses, pre_fired, post_fired, params);
}

std::vector<double> apply_stdp(std::span<const double> magnitudes, const TraceState& traces,
                               std::span<const SynapseRef> synapses, std::span<const std::uint8_t> pre_fired,
                               std::span<const std::uint8_t> post_fired, std::span<const StdpParams> params) {
    std::vector<double> out(magnitudes.begin(), magnitudes.end());
    for (std::size_t k = 0; k < synapses.size(); ++k) {
        const bool pre = pre_fired[synapses[k].pre] != 0;
        const bool post = post_fired[synapses[k].post] != 0;
        if (!pre && !post) continue;
        double w = out[k];
        if (post) w += params[k].a_plus_gain * traces.t_pre[k];
        if (pre) w -= params[k].a_minus_gain * traces.t_post[k];
        out[k] = std::clamp(w, params[k].w_min, params[k].w_max);
    }
    return out;
}

namespace {

StdpParams draw(const StdpProfile& profile, Rng& rng) {
    StdpParams p;
    p.a_plus_gain = profile.a_plus_gain.sample(rng);
    p.a_minus_gain = profile.a_minus_gain.sample(rng);
    p.tau_plus = std::max(profile.tau_plus.sample(rng), 1e-3);
    p.tau_minus = std::max(profile.tau_minus.sample(rng), 1e-3);
    p.trace_incr_plus = profile.trace_incr_plus;
    p.trace_incr_minus = profile.trace_incr_minus;
    p.w_min = profile.w_min;
    p.w_max = profile.w_max;
    return p;
}

}  // namespace

SynapseParamTable sample_stdp_params(const StdpProfile& profile, const NetworkGraph& graph, std::uint64_t seed) {
    profile.validate();
    Rng rng = make_rng(seed, 21);
    SynapseParamTable t;
    t.recurrent.reserve(graph.edges().size());
    for (std::size_t e = 0; e < graph.edges().size(); ++e) t.recurrent.push_back(draw(profile, rng));
    t.input.reserve(graph.input_edges().size());
    for (std::size_t e = 0; e < graph.input_edges().size(); ++e) t.input.push_back(draw(profile, rng));
    return t;
}

}  // namespace hetsnn
