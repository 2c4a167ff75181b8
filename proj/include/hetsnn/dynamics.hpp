#pragma once

// Heterogeneous leaky integrate-and-fire neurons.

#include "hetsnn/distributions.hpp"
#include "hetsnn/topology.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hetsnn {

/// Units: ms and mV; r_m scales the summed input current into mV.
struct NeuronParams {
    double tau_m = 20.0;
    double r_m = 10.0;
    double v_rest = -65.0;
    double v_threshold = -50.0;
    double v_reset = -65.0;
    double refractory = 2.0;

    void validate() const;
};

struct PopulationProfile {
    GammaSpec tau_m = GammaSpec::point_mass(20.0);
    /// Drawn per neuron when set, otherwise the constant threshold is used.
    std::optional<GammaSpec> v_threshold;
};

/// Per-population gamma specs for the membrane parameters.
struct HeterogeneityProfile {
    PopulationProfile excitatory;
    PopulationProfile inhibitory;
    /// Constant fields (and fallback threshold).
    NeuronParams constants;
    /// Require excitatory mean tau_m >= inhibitory mean tau_m.
    bool bio_inspired = true;
    /// Draws below this floor are raised to it so the Euler step guard
    /// holds for the default dt.
    double tau_m_min = 2.5;

    void validate() const;
    /// Gamma(4, 5) / Gamma(4, 2.5) membrane time constants.
    static HeterogeneityProfile heterogeneous_default();
    /// Point masses at the same means as heterogeneous_default().
    HeterogeneityProfile homogenized() const;
};

/// Parameters aligned with graph.nodes().
std::vector<NeuronParams> sample_params(const HeterogeneityProfile& profile, const NetworkGraph& graph,
                                        std::uint64_t seed);

struct NetworkState {
    std::vector<double> v;
    std::vector<double> refractory_until;
    /// Exponentially decaying synaptic current per neuron.
    std::vector<double> i_syn;
    double t_now = 0.0;
};

struct Spike {
    NeuronId neuron;
    double time = 0.0;

    bool operator==(const Spike&) const = default;
};

struct SpikeRecord {
    /// Sorted by time, then neuron id.
    std::vector<Spike> spikes;
    double duration = 0.0;
    /// Spike counts per neuron id.
    std::map<NeuronId, std::size_t> counts;

    /// Builds counts from spikes; neurons listed in ids start at zero.
    static SpikeRecord from_spikes(std::vector<Spike> spikes, double duration, std::span<const NeuronId> ids);
    std::size_t total() const { return spikes.size(); }

    bool operator==(const SpikeRecord&) const = default;
};

/// Input spike trains on a fixed step grid: for each step, the sorted
/// indices of the channels (encoders) that fire in it.
struct SpikeTrains {
    std::uint32_t n_channels = 0;
    double dt = 1.0;
    std::vector<std::vector<std::uint32_t>> active;

    std::size_t n_steps() const { return active.size(); }
    double duration() const { return dt * static_cast<double>(active.size()); }
    std::size_t total() const;
    /// Per-channel spike counts.
    std::vector<std::size_t> counts() const;
};

/// Counts per window, in Hz when window is in ms. With smoothing_tau > 0
/// the rate is instead an exponentially weighted count ending at `window`.
std::map<NeuronId, double> firing_rates(const SpikeRecord& record, double window, double smoothing_tau = 0.0);

/// Analytic first-spike time from v_reset under constant drive, or nullopt
/// when the asymptote a + R I does not exceed threshold.
std::optional<double> analytic_first_spike_time(const NeuronParams& p, double current);

}  // namespace hetsnn
