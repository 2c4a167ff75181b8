#include "hetsnn/runner.hpp"

#include "hetsnn/snapshot.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#ifndef HETSNN_VERSION
#define HETSNN_VERSION "0.1.0"
#endif

namespace hetsnn {

namespace {

using ordered_json = nlohmann::ordered_json;
using Setter = std::function<void(const std::string&)>;
using Table = std::map<std::string, std::map<std::string, Setter>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

double to_double(const std::string& s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
        throw ConfigError("expected a finite number, got '" + t + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
        throw ConfigError("expected a non-negative integer, got '" + t + "'");
    }
    return v;
}

bool to_bool(const std::string& s) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("expected true or false, got '" + t + "'");
}

/// "k theta" for a gamma law, a single number for a point mass.
GammaSpec to_gamma(const std::string& s) {
    const auto w = words(s);
    if (w.size() == 1) return GammaSpec::point_mass(to_double(w[0]));
    if (w.size() == 2) return GammaSpec::gamma(to_double(w[0]), to_double(w[1]));
    throw ConfigError("expected 'shape scale' or a single value, got '" + trim(s) + "'");
}

Setter num(double& d) {
    return [&d](const std::string& v) { d = to_double(v); };
}
Setter count(std::size_t& c) {
    return [&c](const std::string& v) { c = static_cast<std::size_t>(to_u64(v)); };
}
Setter flag(bool& b) {
    return [&b](const std::string& v) { b = to_bool(v); };
}
Setter gamma(GammaSpec& g) {
    return [&g](const std::string& v) { g = to_gamma(v); };
}

template <class E>
Setter choice(E& target, std::map<std::string, E> options) {
    return [&target, options](const std::string& v) {
        const auto it = options.find(trim(v));
        if (it == options.end()) {
            std::string allowed;
            for (const auto& [k, _] : options) allowed += (allowed.empty() ? "" : ", ") + k;
            throw ConfigError("expected one of {" + allowed + "}, got '" + trim(v) + "'");
        }
        target = it->second;
    };
}

Table bindings(ExperimentConfig& c) {
    Table t;
    t["experiment"] = {
        {"seed", [&c](const std::string& v) { c.seed = to_u64(v); }},
        {"out", [&c](const std::string& v) { c.out_dir = trim(v); }},
    };
    auto& topo = c.topology;
    t["topology"] = {
        {"n_total", count(topo.n_total)},
        {"ei_ratio",
         [&topo](const std::string& v) {
             const auto w = words(v);
             if (w.size() != 2) throw ConfigError("expected 'excitatory inhibitory' parts");
             topo.ei_ratio = {static_cast<std::size_t>(to_u64(w[0])), static_cast<std::size_t>(to_u64(w[1]))};
         }},
        {"amplitude_c", num(topo.amplitude_c)},
        {"lambda_scale", num(topo.lambda_scale)},
        {"input_fraction", num(topo.input_fraction)},
        {"input_connect_prob", num(topo.input_connect_prob)},
        {"n_encoders", count(topo.n_encoders)},
        {"lattice",
         [&topo](const std::string& v) {
             const auto w = words(v);
             if (w.size() != 3) throw ConfigError("expected three lattice extents");
             for (std::size_t k = 0; k < 3; ++k) topo.lattice_shape[k] = static_cast<std::size_t>(to_u64(w[k]));
         }},
        {"w_scale", num(topo.w_scale)},
        {"input_w_scale", num(topo.input_w_scale)},
    };
    auto& dyn = c.dynamics;
    auto& sim = dyn.simulation;
    auto& np = dyn.profile.constants;
    t["dynamics"] = {
        {"heterogeneous", flag(dyn.heterogeneous)},
        {"tau_m_exc", gamma(dyn.profile.excitatory.tau_m)},
        {"tau_m_inh", gamma(dyn.profile.inhibitory.tau_m)},
        {"tau_m_min", num(dyn.profile.tau_m_min)},
        {"bio_inspired", flag(dyn.profile.bio_inspired)},
        {"r_m", num(np.r_m)},
        {"v_rest", num(np.v_rest)},
        {"v_threshold", num(np.v_threshold)},
        {"v_reset", num(np.v_reset)},
        {"refractory", num(np.refractory)},
        {"dt", num(sim.dt)},
        {"tau_syn", num(sim.tau_syn)},
        {"v_floor_slack", num(sim.v_floor_slack)},
        {"start_at_rest", flag(sim.start_at_rest)},
        {"filter_tau", num(sim.filter_tau)},
        {"parallel", flag(sim.parallel)},
    };
    auto& pl = c.plasticity;
    t["plasticity"] = {
        {"heterogeneous", flag(pl.heterogeneous)},
        {"a_plus", gamma(pl.profile.a_plus_gain)},
        {"a_minus", gamma(pl.profile.a_minus_gain)},
        {"tau_plus", gamma(pl.profile.tau_plus)},
        {"tau_minus", gamma(pl.profile.tau_minus)},
        {"trace_incr_plus", num(pl.profile.trace_incr_plus)},
        {"trace_incr_minus", num(pl.profile.trace_incr_minus)},
        {"w_min", num(pl.profile.w_min)},
        {"w_max", num(pl.profile.w_max)},
        {"train_duration", num(pl.train_duration)},
    };
    t["encoding"] = {
        {"max_rate", num(c.encoding.max_rate)},
        {"window", num(c.encoding.window)},
        {"mode", choice(c.encoding.mode, std::map<std::string, EncodingMode>{
                                             {"poisson", EncodingMode::poisson_rate},
                                             {"temporal_difference", EncodingMode::temporal_difference}})},
    };
    t["readout"] = {
        {"fraction", num(c.readout.fraction)},
        {"regularization", num(c.readout.regularization)},
        {"hidden_units", count(c.readout.hidden_units)},
    };
    auto& m = c.metrics;
    t["metrics"] = {
        {"tau_max", count(m.tau_max)},
        {"mc_samples", count(m.mc_samples)},
        {"mc_regularization", num(m.mc_regularization)},
        {"mc_train_fraction", num(m.mc_train_fraction)},
        {"mc_fraction", num(m.mc_fraction)},
        {"energy_per_sop", num(m.energy_per_sop)},
        {"vpt_epsilon", num(m.vpt_epsilon)},
        {"rank_threshold", num(m.rank_threshold)},
        {"rank_stimuli", count(m.rank_stimuli)},
    };
    auto& p = c.lnp.config;
    t["lnp"] = {
        {"mode", choice(c.lnp.mode, std::map<std::string, PruneMode>{{"lnp", PruneMode::lnp},
                                                                      {"activity", PruneMode::activity}})},
        {"activity_keep", num(c.lnp.activity_keep)},
        {"rho_density", num(p.rho_density)},
        {"rho_relative", flag(p.rho_relative)},
        {"p_min", num(p.p_min)},
        {"diagonal_mode", choice(p.diagonal_mode, std::map<std::string, DiagonalMode>{
                                                      {"retain", DiagonalMode::retain},
                                                      {"perturb", DiagonalMode::perturb}})},
        {"excitability_gain", num(p.excitability_gain)},
        {"centrality", choice(p.centrality.kind, std::map<std::string, NodeThreshold::Kind>{
                                                     {"absolute", NodeThreshold::Kind::absolute},
                                                     {"quantile", NodeThreshold::Kind::quantile}})},
        {"centrality_value", num(p.centrality.value)},
        {"m_delocalize", count(p.m_delocalize)},
        {"delocalize_w_scale", num(p.delocalize_w_scale)},
        {"epsilon_quadform", num(p.epsilon_quadform)},
        {"iterations", count(p.iterations)},
        {"noise_sigma", num(p.noise_sigma)},
        {"shift_margin", num(p.shift_margin)},
        {"harmonic_multiplier", num(p.harmonic_multiplier)},
        {"epsilon_h", num(p.epsilon_h)},
        {"coupling_gain", num(p.coupling_gain)},
        {"drive", num(p.drive)},
        {"lyapunov_horizon", num(p.lyapunov.horizon)},
        {"lyapunov_step", num(p.lyapunov.step)},
        {"lyapunov_renorm_interval", num(p.lyapunov.renorm_interval)},
        {"lyapunov_washout", num(p.lyapunov.washout)},
        {"lyapunov_perturbations", count(p.lyapunov.n_perturbations)},
        {"lyapunov_delta0", num(p.lyapunov.delta0)},
        {"optimize_timescales", flag(p.optimize_timescales)},
        {"timescale_budget", count(p.timescale_budget)},
        {"tau_m_min", num(p.tau_m_min)},
    };
    auto& bo = c.bo;
    t["bo"] = {
        {"objective", [&bo](const std::string& v) { bo.objective = parse_bo_objective(trim(v)); }},
        {"budget", count(bo.config.budget)},
        {"n_init", count(bo.config.n_init)},
        {"n_candidates", count(bo.config.n_candidates)},
        {"variance", num(bo.config.hyper.variance)},
        {"length_scale", num(bo.config.hyper.length_scale)},
        {"smoothness", num(bo.config.hyper.smoothness)},
        {"jitter", num(bo.config.jitter)},
        {"local_fraction", num(bo.config.local_fraction)},
        {"local_scale", num(bo.config.local_scale)},
        {"train_duration", num(bo.train_duration)},
    };
    auto& d = c.data;
    auto& cc = d.chaotic;
    auto& cl = d.classes;
    t["data"] = {
        {"dt", num(cc.dt)},
        {"n_steps", count(cc.n_steps)},
        {"washout", count(cc.washout)},
        {"subsample", count(d.subsample)},
        {"warmup_samples", count(d.warmup_samples)},
        {"train_samples", count(d.train_samples)},
        {"test_samples", count(d.test_samples)},
        {"forecast_mode", choice(d.forecast_mode, std::map<std::string, ForecastMode>{
                                                      {"closed_loop", ForecastMode::closed_loop},
                                                      {"teacher_forced", ForecastMode::teacher_forced}})},
        {"lorenz63_sigma", num(cc.lorenz63.sigma)},
        {"lorenz63_rho", num(cc.lorenz63.rho)},
        {"lorenz63_beta", num(cc.lorenz63.beta)},
        {"lorenz96_forcing", num(cc.lorenz96.forcing)},
        {"lorenz96_k", count(cc.lorenz96.k)},
        {"lorenz96_two_scale", flag(cc.lorenz96.two_scale)},
        {"lorenz96_j", count(cc.lorenz96.j)},
        {"lorenz96_h", num(cc.lorenz96.h)},
        {"lorenz96_c", num(cc.lorenz96.c)},
        {"lorenz96_b", num(cc.lorenz96.b)},
        {"rossler_a", num(cc.rossler.a)},
        {"rossler_b", num(cc.rossler.b)},
        {"rossler_c", num(cc.rossler.c)},
        {"n_classes", count(cl.n_classes)},
        {"n_channels", count(cl.n_channels)},
        {"n_samples", count(cl.n_samples)},
        {"noise", num(cl.noise)},
        {"trials_per_class", count(cl.trials_per_class)},
        {"train_fraction", num(cl.train_fraction)},
        {"stimulus_ms", num(d.stimulus_ms)},
        {"blank_ms", num(d.blank_ms)},
    };
    return t;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json model_summary(const Model& m) {
    ordered_json j;
    j["n_neurons"] = m.graph.size();
    j["n_synapses"] = m.graph.edges().size();
    j["n_input_synapses"] = m.graph.input_edges().size();
    j["density"] = m.graph.density();
    return j;
}

ordered_json heterogeneity_summary(const Model& m) {
    ordered_json j;
    Eigen::MatrixXd tau(static_cast<Eigen::Index>(m.neurons.size()), 1);
    for (std::size_t i = 0; i < m.neurons.size(); ++i) tau(static_cast<Eigen::Index>(i), 0) = m.neurons[i].tau_m;
    if (tau.rows() >= 2) {
        const auto h = heterogeneity_score(tau);
        j["tau_m"] = {{"value", h.value}, {"degenerate", h.degenerate}};
    }
    const auto& syn = m.stdp.recurrent;
    if (syn.size() >= 2) {
        Eigen::MatrixXd s(static_cast<Eigen::Index>(syn.size()), 4);
        for (std::size_t e = 0; e < syn.size(); ++e) {
            s.row(static_cast<Eigen::Index>(e)) << syn[e].a_plus_gain, syn[e].a_minus_gain, syn[e].tau_plus,
                syn[e].tau_minus;
        }
        const auto h = heterogeneity_score(s);
        j["stdp"] = {{"value", h.value}, {"degenerate", h.degenerate}};
    }
    return j;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

ordered_json vector_json(const Eigen::RowVectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void require_nonempty(const Model& m) {
    if (m.graph.empty()) throw InputError("snapshot has no neurons");
}

std::string manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["started"] = m.started;
    j["finished"] = m.finished;
    ordered_json s;
    for (const auto& [name, value] : m.seeds) s[name] = value;
    j["seeds"] = s;
    j["files"] = m.files;
    return dump(j);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config: " + std::string(e.message()) + " (line " + std::to_string(e.line()) + ")");
    }
    ExperimentConfig config;
    const Table table = bindings(config);
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' must appear under a [section]");
        const auto sec = table.find(section);
        if (sec == table.end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            const auto it = sec->second.find(key);
            if (it == sec->second.end()) throw ConfigError("config: [" + section + "] unknown key '" + key + "'");
            try {
                it->second(value.data());
            } catch (const ConfigError& e) {
                throw ConfigError("config: [" + section + "] " + key + ": " + e.what());
            }
        }
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string config_hash(const std::string& config_text, std::uint64_t seed) {
    boost::crc_32_type crc;
    const std::string payload = config_text + "\nseed=" + std::to_string(seed);
    crc.process_bytes(payload.data(), payload.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
    return buf;
}

std::vector<std::string> cmd_build(const ExperimentConfig& config, const std::filesystem::path& out) {
    const std::uint64_t seed = config.require_seed();
    const Model model = build_model(config, seed);
    save_model(model, out / "snapshot.json");
    ordered_json summary = model_summary(model);
    summary["seed"] = seed;
    summary["heterogeneity"] = heterogeneity_summary(model);
    write_text_file(out / "build_summary.json", dump(summary));
    std::cout << "neurons " << model.graph.size() << ", synapses " << model.graph.edges().size() << ", density "
              << model.graph.density() << "\n";
    return {"snapshot.json", "build_summary.json"};
}

std::vector<std::string> cmd_train(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                   const std::filesystem::path& out) {
    require_nonempty(snapshot);
    const std::uint64_t seed = mix_seed(config.require_seed(), 301);
    const TrainResult tr = train_stdp(snapshot, config, task, config.plasticity.train_duration, seed);
    save_model(tr.trained, out / "trained.json");

    std::ostringstream csv;
    csv << "neuron_id,spike_count\n";
    for (const auto& [id, n] : tr.record.counts) csv << id.value << "," << n << "\n";
    write_text_file(out / "spike_counts.csv", csv.str());

    ordered_json stats;
    stats["task"] = task_name(task);
    stats["duration_ms"] = tr.record.duration;
    stats["total_spikes"] = tr.record.total();
    stats["s_tilde"] = tr.stats.s_tilde;
    stats["nu_bar_hz"] = tr.stats.nu_bar;
    write_text_file(out / "train_stats.json", dump(stats));

    ordered_json readout;
    readout["task"] = task_name(task);
    if (is_forecast(task)) {
        const ForecastResult fr = run_forecast(tr.trained, config, task, seed);
        const auto ids = select_readout_neurons(tr.trained.graph, config.readout.fraction);
        readout["kind"] = "linear";
        ordered_json neurons = ordered_json::array();
        if (config.readout.fraction >= 1.0) {
            for (const Node& n : tr.trained.graph.nodes()) neurons.push_back(n.id.value);
        } else {
            for (NeuronId id : ids) neurons.push_back(id.value);
        }
        readout["neurons"] = neurons;
        readout["weights"] = matrix_json(fr.readout.weights);
        readout["bias"] = vector_json(fr.readout.bias);
    } else {
        const ClassificationResult cr = run_classification(tr.trained, config, seed);
        readout["kind"] = "classifier";
        ordered_json neurons = ordered_json::array();
        for (NeuronId id : cr.classifier.sampled_neurons) neurons.push_back(id.value);
        readout["neurons"] = neurons;
        readout["layer_sizes"] = cr.classifier.layer_sizes;
        ordered_json layers = ordered_json::array();
        for (std::size_t l = 0; l < cr.classifier.weights.size(); ++l) {
            layers.push_back({{"weights", matrix_json(cr.classifier.weights[l])},
                              {"bias", vector_json(cr.classifier.biases[l])}});
        }
        readout["layers"] = layers;
    }
    write_text_file(out / "readout.json", dump(readout));
    return {"trained.json", "spike_counts.csv", "train_stats.json", "readout.json"};
}

std::vector<std::string> cmd_prune(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                   const std::filesystem::path& out) {
    require_nonempty(snapshot);
    const std::uint64_t seed = mix_seed(config.require_seed(), 302);
    PruneOutcome po;
    if (config.lnp.mode == PruneMode::lnp) {
        po = prune_lnp(snapshot, config, seed);
    } else {
        const auto target = static_cast<std::size_t>(
            std::llround(config.lnp.activity_keep * static_cast<double>(snapshot.graph.edges().size())));
        po = prune_activity(snapshot, config, task, target, seed);
    }
    std::vector<std::string> files;
    for (std::size_t k = 0; k < po.models.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "prune/iter_%03zu.json", k + 1);
        save_model(po.models[k], out / name);
        files.emplace_back(name);
    }
    save_model(po.final_model, out / "pruned.json");
    std::ostringstream log;
    write_lnp_log(log, po.log);
    write_text_file(out / "lnp_log.jsonl", log.str());
    files.emplace_back("pruned.json");
    files.emplace_back("lnp_log.jsonl");
    return files;
}

std::string evaluation_report(const ExperimentConfig& config, const Model& model, TaskKind task) {
    require_nonempty(model);
    const std::uint64_t seed = mix_seed(config.require_seed(), 303);
    ordered_json r;
    r["task"] = task_name(task);
    r["seed"] = config.require_seed();
    r["model"] = model_summary(model);
    SpikeRecord record;
    if (is_forecast(task)) {
        const ForecastResult fr = run_forecast(model, config, task, seed);
        ordered_json p;
        p["mode"] = config.data.forecast_mode == ForecastMode::closed_loop ? "closed_loop" : "teacher_forced";
        p["horizon"] = fr.nrmse.size();
        p["nrmse_mean"] = fr.nrmse_mean;
        p["vpt"] = fr.vpt;
        p["vpt_epsilon"] = config.metrics.vpt_epsilon;
        p["nrmse"] = fr.nrmse;
        r["prediction"] = p;
        record = fr.record;
    } else {
        const ClassificationResult cr = run_classification(model, config, seed);
        ordered_json c;
        c["accuracy"] = cr.accuracy;
        c["n_test"] = cr.truth.size();
        c["confusion"] = cr.confusion;
        r["classification"] = c;
        record = cr.record;
    }
    const SpikeStats stats = spike_stats(record);
    r["spikes"] = {{"total", record.total()}, {"s_tilde", stats.s_tilde}, {"nu_bar_hz", stats.nu_bar}};
    const EnergyReport energy = count_sops(record, model.graph, nullptr, config.metrics.energy_per_sop);
    r["energy"] = {{"total_sops", energy.total_sops}, {"energy", energy.energy}};
    const MemoryResult mem = run_memory_task(model, config, seed);
    r["memory"] = {{"capacity", mem.capacity.total},
                   {"tau_max", mem.capacity.tau_max},
                   {"s_tilde", mem.stats.s_tilde},
                   {"efficiency", mem.efficiency}};
    const SeparationReport sep = separation_rank(model, config, seed);
    r["separation"] = {{"effective_rank", sep.effective_rank},
                       {"stimuli", config.metrics.rank_stimuli},
                       {"threshold", sep.threshold}};
    return dump(r);
}

std::vector<std::string> cmd_evaluate(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                      const std::filesystem::path& out) {
    write_text_file(out / "report.json", evaluation_report(config, snapshot, task));
    return {"report.json"};
}

std::vector<std::string> cmd_bo(const ExperimentConfig& config, const std::filesystem::path& out) {
    const std::uint64_t seed = config.require_seed();
    const BoOutcome bo = run_distribution_search(config, seed);

    ordered_json best;
    best["objective"] = bo_objective_name(config.bo.objective);
    best["best_value"] = bo.raw.best_value;
    ordered_json marginals;
    for (std::size_t i = 0; i < ParamDistributionSet::count; ++i) {
        marginals[std::string(ParamDistributionSet::name(i))] = {{"shape", bo.best[i].shape()},
                                                                 {"scale", bo.best[i].scale()}};
    }
    best["marginals"] = marginals;
    write_text_file(out / "best_distribution.json", dump(best));

    std::ostringstream csv;
    csv << "iter,ok,value,best_so_far,capacity,s_tilde,efficiency";
    for (std::size_t i = 0; i < ParamDistributionSet::count; ++i) {
        const std::string n(ParamDistributionSet::name(i));
        csv << "," << n << "_shape," << n << "_scale";
    }
    csv << "\n";
    auto field = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    for (std::size_t k = 0; k < bo.raw.trace.size(); ++k) {
        const BoTraceEntry& e = bo.raw.trace[k];
        const MemoryResult& m = bo.evaluations.at(k);
        csv << e.iter << "," << (e.ok ? 1 : 0) << "," << field(e.value) << "," << field(e.best_so_far) << ","
            << field(m.capacity.total) << "," << field(m.stats.s_tilde) << "," << field(m.efficiency);
        for (double x : e.x) csv << "," << format_double(x);
        csv << "\n";
    }
    write_text_file(out / "bo_trace.csv", csv.str());
    return {"best_distribution.json", "bo_trace.csv"};
}

int run_command(const CommandArgs& args) {
    try {
        const std::string text = read_text_file(args.config);
        ExperimentConfig config = parse_config(text);
        if (args.seed) config.seed = args.seed;
        config.validate();
        const std::uint64_t seed = config.require_seed();
        const std::filesystem::path out = args.out ? *args.out : std::filesystem::path(config.out_dir);
        const std::string started = utc_now();

        auto need_snapshot = [&]() {
            if (!args.snapshot) throw ConfigError("--snapshot is required for " + args.command);
            return load_model(*args.snapshot);
        };
        auto need_task = [&]() {
            if (!args.task) throw ConfigError("--task is required for " + args.command);
            return parse_task(*args.task);
        };

        RunManifest manifest;
        std::vector<std::pair<std::string, std::uint64_t>> seeds{{"global", seed}};
        if (args.command == "build") {
            manifest.files = cmd_build(config, out);
        } else if (args.command == "train") {
            const Model m = need_snapshot();
            manifest.files = cmd_train(config, m, need_task(), out);
            seeds.emplace_back("train", mix_seed(seed, 301));
        } else if (args.command == "prune") {
            const Model m = need_snapshot();
            const TaskKind task = args.task ? parse_task(*args.task) : TaskKind::lorenz63;
            manifest.files = cmd_prune(config, m, task, out);
            seeds.emplace_back("prune", mix_seed(seed, 302));
        } else if (args.command == "evaluate") {
            const Model m = need_snapshot();
            manifest.files = cmd_evaluate(config, m, need_task(), out);
            seeds.emplace_back("evaluate", mix_seed(seed, 303));
        } else if (args.command == "bo") {
            manifest.files = cmd_bo(config, out);
        } else {
            throw ConfigError("unknown command '" + args.command + "'");
        }

        manifest.command = args.command;
        manifest.config_hash = config_hash(text, seed);
        manifest.version = HETSNN_VERSION;
        manifest.started = started;
        manifest.finished = utc_now();
        manifest.seeds = seeds;
        const std::string name = "manifest_" + args.command + ".json";
        manifest.files.push_back(name);
        write_text_file(out / name, manifest_json(manifest));
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace hetsnn
