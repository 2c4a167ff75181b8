#include "hetsnn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetsnn {

void Model::validate() const {
    if (neurons.size() != graph.size()) throw ConfigError("model: neuron parameters misaligned with graph");
    if (stdp.recurrent.size() != graph.edges().size() || stdp.input.size() != graph.input_edges().size()) {
        throw ConfigError("model: synapse parameters misaligned with graph");
    }
}

Model Model::without_nodes(std::span<const NeuronId> removed) const {
    Model out;
    out.graph = graph.without_nodes(removed);
    for (const Node& n : out.graph.nodes()) out.neurons.push_back(neurons[graph.index(n.id)]);
    for (const Edge& e : out.graph.edges()) out.stdp.recurrent.push_back(stdp.recurrent[*graph.edge_index(e.src, e.dst)]);
    // Input edges are filtered in order, so a merge walk realigns them.
    std::size_t k = 0;
    for (const InputEdge& e : out.graph.input_edges()) {
        while (graph.input_edges()[k].enc != e.enc || graph.input_edges()[k].dst != e.dst) ++k;
        out.stdp.input.push_back(stdp.input[k]);
    }
    return out;
}

Model Model::with_edges(std::vector<Edge> edges, const StdpParams& fresh) const {
    Model out;
    out.graph = graph.with_edges(std::move(edges));
    out.neurons = neurons;
    out.stdp.input = stdp.input;
    for (const Edge& e : out.graph.edges()) {
        const auto old = graph.edge_index(e.src, e.dst);
        out.stdp.recurrent.push_back(old ? stdp.recurrent[*old] : fresh);
    }
    return out;
}

Model make_model(const NetworkGraph& graph, const HeterogeneityProfile& neurons, const StdpProfile& stdp,
                 std::uint64_t seed) {
    Model m;
    m.graph = graph;
    m.neurons = sample_params(neurons, graph, seed);
    m.stdp = sample_stdp_params(stdp, graph, seed);
    return m;
}

void SimulationOptions::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dynamics: dt must be positive");
    if (!(tau_syn > 0.0)) throw ConfigError("dynamics: tau_syn must be positive");
    if (!(filter_tau > 0.0)) throw ConfigError("readout: filter_tau must be positive");
    if (v_floor_slack < 0.0) throw ConfigError("dynamics: v_floor_slack must be non-negative");
}

namespace {

void fill_synapses(kernels::SynapseArrays& s, std::span<const StdpParams> params, double dt) {
    for (std::size_t k = 0; k < params.size(); ++k) {
        const StdpParams& p = params[k];
        s.decay_plus[k] = std::exp(-dt / p.tau_plus);
        s.decay_minus[k] = std::exp(-dt / p.tau_minus);
        s.gain_plus[k] = p.a_plus_gain;
        s.gain_minus[k] = p.a_minus_gain;
        s.incr_plus[k] = p.trace_incr_plus;
        s.incr_minus[k] = p.trace_incr_minus;
        s.w_min[k] = p.w_min;
        s.w_max[k] = p.w_max;
    }
}

kernels::Csr group_by_pre(std::span<const std::uint32_t> pre, std::size_t n_pre) {
    kernels::Csr csr;
    csr.offsets.assign(n_pre + 1, 0);
    for (auto p : pre) ++csr.offsets[p + 1];
    for (std::size_t i = 0; i < n_pre; ++i) csr.offsets[i + 1] += csr.offsets[i];
    csr.targets.resize(pre.size());
    std::vector<std::size_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
    for (std::size_t k = 0; k < pre.size(); ++k) csr.targets[fill[pre[k]]++] = k;
    return csr;
}

constexpr double kNeverRefractory = -std::numeric_limits<double>::infinity();

}  // namespace

Simulator::Simulator(Model model, SimulationOptions options) : model_(std::move(model)), options_(options) {
    options_.validate();
    model_.validate();
    const std::size_t n = model_.graph.size();
    double min_tau = std::numeric_limits<double>::infinity();
    for (const NeuronParams& p : model_.neurons) {
        p.validate();
        min_tau = std::min(min_tau, p.tau_m);
    }
    if (n > 0 && options_.dt > min_tau / 10.0) {
        throw ConfigError("dynamics: dt " + std::to_string(options_.dt) + " exceeds min(tau_m)/10 = " +
                          std::to_string(min_tau / 10.0));
    }

    lif_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const NeuronParams& p = model_.neurons[i];
        lif_.tau_m[i] = p.tau_m;
        lif_.r_m[i] = p.r_m;
        lif_.v_rest[i] = p.v_rest;
        lif_.v_threshold[i] = p.v_threshold;
        lif_.v_reset[i] = p.v_reset;
        lif_.refractory[i] = p.refractory;
        lif_.v_floor[i] = p.v_reset - options_.v_floor_slack;
    }

    const auto& g = model_.graph;
    const auto idx = g.edge_indices();
    recurrent_.resize(idx.size());
    for (std::size_t e = 0; e < idx.size(); ++e) {
        recurrent_.pre[e] = static_cast<std::uint32_t>(idx[e].first);
        recurrent_.post[e] = static_cast<std::uint32_t>(idx[e].second);
        recurrent_.magnitude[e] = std::abs(g.edges()[e].w);
    }
    fill_synapses(recurrent_, model_.stdp.recurrent, options_.dt);
    input_.resize(g.input_edges().size());
    for (std::size_t e = 0; e < g.input_edges().size(); ++e) {
        input_.pre[e] = g.input_edges()[e].enc;
        input_.post[e] = static_cast<std::uint32_t>(g.index(g.input_edges()[e].dst));
        input_.magnitude[e] = std::abs(g.input_edges()[e].w);
    }
    fill_synapses(input_, model_.stdp.input, options_.dt);

    presyn_sign_.resize(n);
    for (std::size_t i = 0; i < n; ++i) presyn_sign_[i] = sign_factor(g.nodes()[i].sign);
    rec_out_ = group_by_pre(recurrent_.pre, n);
    inp_out_ = group_by_pre(input_.pre, g.n_encoders());
    fired_.assign(n, 0);
    enc_fired_.assign(g.n_encoders(), 0);
    filtered_.assign(n, 0.0);
    syn_decay_ = std::exp(-options_.dt / options_.tau_syn);
    filter_decay_ = std::exp(-options_.dt / options_.filter_tau);
    reset(0);
}

void Simulator::reset(std::uint64_t seed) {
    const std::size_t n = lif_.size();
    Rng rng = make_rng(seed, 31);
    for (std::size_t i = 0; i < n; ++i) {
        lif_.v[i] = options_.start_at_rest
                        ? lif_.v_rest[i]
                        : lif_.v_reset[i] + (lif_.v_threshold[i] - lif_.v_reset[i]) * uniform01(rng);
        lif_.i_syn[i] = 0.0;
        lif_.refractory_until[i] = kNeverRefractory;
    }
    std::fill(recurrent_.t_pre.begin(), recurrent_.t_pre.end(), 0.0);
    std::fill(recurrent_.t_post.begin(), recurrent_.t_post.end(), 0.0);
    std::fill(input_.t_pre.begin(), input_.t_pre.end(), 0.0);
    std::fill(input_.t_post.begin(), input_.t_post.end(), 0.0);
    std::fill(filtered_.begin(), filtered_.end(), 0.0);
    spikes_.clear();
    t_now_ = 0.0;
}

NetworkState Simulator::state() const {
    return {lif_.v, lif_.refractory_until, lif_.i_syn, t_now_};
}

void Simulator::set_state(const NetworkState& state) {
    if (state.v.size() != lif_.size() || state.refractory_until.size() != lif_.size() ||
        state.i_syn.size() != lif_.size()) {
        throw InputError("network state size does not match the model");
    }
    lif_.v = state.v;
    lif_.refractory_until = state.refractory_until;
    lif_.i_syn = state.i_syn;
    t_now_ = state.t_now;
}

void Simulator::deliver_inputs(std::span<const std::uint32_t> active_encoders) {
    std::fill(enc_fired_.begin(), enc_fired_.end(), 0);
    for (std::uint32_t enc : active_encoders) {
        if (enc >= enc_fired_.size()) throw InputError("encoder index out of range");
        enc_fired_[enc] = 1;
        for (std::size_t s : inp_out_.row(enc)) lif_.i_syn[input_.post[s]] += input_.magnitude[s];
    }
}

std::vector<NeuronId> Simulator::step(std::span<const double> i_ext, std::span<const std::uint32_t> active_encoders) {
    if (!i_ext.empty() && i_ext.size() != lif_.size()) throw InputError("external current size mismatch");
    deliver_inputs(active_encoders);
    const double dt = options_.dt;
    if (options_.parallel) {
        kernels::lif_integrate_parallel(lif_, i_ext, t_now_, dt, fired_);
    } else {
        kernels::lif_integrate_serial(lif_, i_ext, t_now_, dt, fired_);
    }
    if (options_.plastic) {
        if (options_.parallel) {
            kernels::stdp_step_parallel(recurrent_, fired_, fired_);
            kernels::stdp_step_parallel(input_, enc_fired_, fired_);
        } else {
            kernels::stdp_step_serial(recurrent_, fired_, fired_);
            kernels::stdp_step_serial(input_, enc_fired_, fired_);
        }
    }
    const std::size_t n = lif_.size();
    for (std::size_t i = 0; i < n; ++i) {
        lif_.i_syn[i] *= syn_decay_;
        filtered_[i] *= filter_decay_;
    }
    const double t_end = t_now_ + dt;
    std::vector<NeuronId> out;
    const auto nodes = model_.graph.nodes();
    for (std::size_t i = 0; i < n; ++i) {
        if (!fired_[i]) continue;
        filtered_[i] += 1.0;
        out.push_back(nodes[i].id);
        spikes_.push_back({nodes[i].id, t_end});
        const double sgn = presyn_sign_[i];
        for (std::size_t s : rec_out_.row(i)) lif_.i_syn[recurrent_.post[s]] += sgn * recurrent_.magnitude[s];
    }
    t_now_ = t_end;
    return out;
}

void Simulator::advance(const SpikeTrains& input, std::span<const double> bias) {
    if (std::abs(input.dt - options_.dt) > 1e-12) throw InputError("input spike trains use a different dt");
    for (const auto& active : input.active) step(bias, active);
}

void Simulator::advance_silent(std::size_t n_steps, std::span<const double> bias) {
    for (std::size_t k = 0; k < n_steps; ++k) step(bias, {});
}

SpikeRecord Simulator::record() const {
    std::vector<NeuronId> ids;
    for (const Node& n : model_.graph.nodes()) ids.push_back(n.id);
    return SpikeRecord::from_spikes(spikes_, t_now_, ids);
}

Model Simulator::trained_model() const {
    Model m = model_;
    const auto& g = model_.graph;
    std::vector<double> w(g.edges().size());
    for (std::size_t e = 0; e < w.size(); ++e) w[e] = presyn_sign_[recurrent_.pre[e]] * recurrent_.magnitude[e];
    m.graph = g.with_weights(w, input_.magnitude);
    return m;
}

SimulationResult simulate(const Model& model, const SpikeTrains& input, double duration,
                          const SimulationOptions& options, std::uint64_t seed) {
    if (!(duration > 0.0)) throw InputError("simulation duration must be positive");
    Simulator sim(model, options);
    sim.reset(seed);
    const auto n_steps = static_cast<std::size_t>(std::llround(duration / options.dt));
    if (input.n_channels > 0 && std::abs(input.dt - options.dt) > 1e-12) {
        throw InputError("input spike trains use a different dt");
    }
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (k < input.active.size()) {
            sim.step({}, input.active[k]);
        } else {
            sim.step({}, {});
        }
    }
    return {sim.record(), sim.state(), sim.trained_model()};
}

std::pair<NetworkState, std::vector<NeuronId>> step(const NetworkState& state, const Model& model,
                                                    std::span<const double> input_current,
                                                    const SimulationOptions& options) {
    Simulator sim(model, options);
    sim.set_state(state);
    auto fired = sim.step(input_current, {});
    return {sim.state(), std::move(fired)};
}

}  // namespace hetsnn
