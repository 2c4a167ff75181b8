#include "hetsnn/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace hetsnn {

void NeuronParams::validate() const {
    if (!(tau_m > 0.0)) throw ConfigError("dynamics: tau_m must be positive");
    if (!(v_reset < v_threshold)) throw ConfigError("dynamics: v_reset must be below v_threshold");
    if (!(refractory >= 0.0)) throw ConfigError("dynamics: refractory period must be non-negative");
}

void HeterogeneityProfile::validate() const {
    constants.validate();
    for (const auto* pop : {&excitatory, &inhibitory}) {
        if (!(pop->tau_m.mean() > 0.0)) throw ConfigError("dynamics: tau_m distribution must have positive mean");
        if (pop->v_threshold && !(pop->v_threshold->mean() > constants.v_reset)) {
            throw ConfigError("dynamics: threshold distribution must sit above v_reset");
        }
    }
    if (!(tau_m_min > 0.0)) throw ConfigError("dynamics: tau_m_min must be positive");
    if (bio_inspired && excitatory.tau_m.mean() < inhibitory.tau_m.mean()) {
        throw ConfigError("dynamics: bio-inspired profile needs excitatory tau_m mean >= inhibitory");
    }
}

HeterogeneityProfile HeterogeneityProfile::heterogeneous_default() {
    HeterogeneityProfile p;
    p.excitatory.tau_m = GammaSpec::gamma(4.0, 5.0);
    p.inhibitory.tau_m = GammaSpec::gamma(4.0, 2.5);
    return p;
}

HeterogeneityProfile HeterogeneityProfile::homogenized() const {
    HeterogeneityProfile p = *this;
    for (auto* pop : {&p.excitatory, &p.inhibitory}) {
        pop->tau_m = pop->tau_m.homogenized();
        if (pop->v_threshold) pop->v_threshold = pop->v_threshold->homogenized();
    }
    return p;
}

std::vector<NeuronParams> sample_params(const HeterogeneityProfile& profile, const NetworkGraph& graph,
                                        std::uint64_t seed) {
    profile.validate();
    Rng rng = make_rng(seed, 11);
    std::vector<NeuronParams> out;
    out.reserve(graph.size());
    // Threshold draws below v_reset would break the reset invariant.
    const double min_threshold = profile.constants.v_reset + 1e-3;
    for (const Node& node : graph.nodes()) {
        const PopulationProfile& pop =
            node.sign == NeuronSign::excitatory ? profile.excitatory : profile.inhibitory;
        NeuronParams p = profile.constants;
        p.tau_m = std::max(pop.tau_m.sample(rng), profile.tau_m_min);
        if (pop.v_threshold) p.v_threshold = std::max(pop.v_threshold->sample(rng), min_threshold);
        out.push_back(p);
    }
    return out;
}

SpikeRecord SpikeRecord::from_spikes(std::vector<Spike> spikes, double duration, std::span<const NeuronId> ids) {
    SpikeRecord r;
    std::sort(spikes.begin(), spikes.end(), [](const Spike& a, const Spike& b) {
        return a.time < b.time || (a.time == b.time && a.neuron < b.neuron);
    });
    for (NeuronId id : ids) r.counts[id] = 0;
    for (const Spike& s : spikes) {
        if (!(s.time >= 0.0 && s.time <= duration)) throw InputError("spike time outside the record window");
        ++r.counts[s.neuron];
    }
    r.spikes = std::move(spikes);
    r.duration = duration;
    return r;
}

std::size_t SpikeTrains::total() const {
    std::size_t n = 0;
    for (const auto& step : active) n += step.size();
    return n;
}

std::vector<std::size_t> SpikeTrains::counts() const {
    std::vector<std::size_t> c(n_channels, 0);
    for (const auto& step : active) {
        for (auto ch : step) ++c.at(ch);
    }
    return c;
}

std::map<NeuronId, double> firing_rates(const SpikeRecord& record, double window, double smoothing_tau) {
    if (!(window > 0.0)) throw InputError("firing rate window must be positive");
    std::map<NeuronId, double> rates;
    for (const auto& [id, count] : record.counts) rates[id] = 0.0;
    if (smoothing_tau > 0.0) {
        for (const Spike& s : record.spikes) {
            if (s.time <= window) rates[s.neuron] += std::exp(-(window - s.time) / smoothing_tau);
        }
        for (auto& [id, r] : rates) r *= 1000.0 / smoothing_tau;
        return rates;
    }
    for (const auto& [id, count] : record.counts) rates[id] = 1000.0 * static_cast<double>(count) / window;
    return rates;
}

std::optional<double> analytic_first_spike_time(const NeuronParams& p, double current) {
    const double v_inf = p.v_rest + p.r_m * current;
    if (!(v_inf > p.v_threshold)) return std::nullopt;
    return p.tau_m * std::log((v_inf - p.v_reset) / (v_inf - p.v_threshold));
}

}  // namespace hetsnn
