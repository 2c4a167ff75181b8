#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for equivalence tests and the
// benchmark. Both versions must produce bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

namespace hetsnn::kernels {

/// Compressed adjacency lists over local indices.
struct Csr {
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> targets;

    std::size_t size() const { return offsets.size() - 1; }
    std::span<const std::size_t> row(std::size_t i) const {
        return {targets.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
};

/// Brandes accumulation, unweighted directed, raw pair counts.
std::vector<double> betweenness_serial(const Csr& out);
std::vector<double> betweenness_parallel(const Csr& out);

/// Structure-of-arrays state of a LIF population.
struct LifArrays {
    std::vector<double> v;
    std::vector<double> i_syn;
    std::vector<double> refractory_until;
    std::vector<double> tau_m;
    std::vector<double> r_m;
    std::vector<double> v_rest;
    std::vector<double> v_threshold;
    std::vector<double> v_reset;
    std::vector<double> refractory;
    std::vector<double> v_floor;

    std::size_t size() const { return v.size(); }
    void resize(std::size_t n);
};

/// One forward-Euler step over [t_now, t_now + dt]. Sets fired[i] = 1 for
/// neurons that crossed threshold; those are reset and made refractory
/// until t_now + dt + refractory.
void lif_integrate_serial(LifArrays& s, std::span<const double> i_ext, double t_now, double dt,
                          std::span<std::uint8_t> fired);
void lif_integrate_parallel(LifArrays& s, std::span<const double> i_ext, double t_now, double dt,
                            std::span<std::uint8_t> fired);

/// Structure-of-arrays plastic synapse table with per-synapse traces.
struct SynapseArrays {
    std::vector<std::uint32_t> pre;
    std::vector<std::uint32_t> post;
    std::vector<double> magnitude;
    std::vector<double> t_pre;
    std::vector<double> t_post;
    std::vector<double> decay_plus;   // exp(-dt / tau_plus)
    std::vector<double> decay_minus;  // exp(-dt / tau_minus)
    std::vector<double> gain_plus;
    std::vector<double> gain_minus;
    std::vector<double> incr_plus;
    std::vector<double> incr_minus;
    std::vector<double> w_min;
    std::vector<double> w_max;

    std::size_t size() const { return pre.size(); }
    void resize(std::size_t n);
};

/// One plasticity step: decay traces, potentiate on post spikes and depress
/// on pre spikes, clamp magnitudes, then bump traces.
void stdp_step_serial(SynapseArrays& s, std::span<const std::uint8_t> pre_fired,
                      std::span<const std::uint8_t> post_fired);
void stdp_step_parallel(SynapseArrays& s, std::span<const std::uint8_t> pre_fired,
                        std::span<const std::uint8_t> post_fired);

}  // namespace hetsnn::kernels
