#include "hetsnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hetsnn {

TaskKind parse_task(std::string_view name) {
    if (name == "lorenz63") return TaskKind::lorenz63;
    if (name == "lorenz96") return TaskKind::lorenz96;
    if (name == "rossler") return TaskKind::rossler;
    if (name == "synth-class") return TaskKind::synth_class;
    throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string_view task_name(TaskKind task) {
    switch (task) {
        case TaskKind::lorenz63: return "lorenz63";
        case TaskKind::lorenz96: return "lorenz96";
        case TaskKind::rossler: return "rossler";
        case TaskKind::synth_class: return "synth-class";
    }
    return "";
}

bool is_forecast(TaskKind task) { return task != TaskKind::synth_class; }

BoObjective parse_bo_objective(std::string_view name) {
    if (name == "efficiency") return BoObjective::efficiency;
    if (name == "capacity") return BoObjective::capacity;
    if (name == "spike_count") return BoObjective::spike_count;
    throw ConfigError("bo: unknown objective '" + std::string(name) + "'");
}

std::string_view bo_objective_name(BoObjective objective) {
    switch (objective) {
        case BoObjective::efficiency: return "efficiency";
        case BoObjective::capacity: return "capacity";
        case BoObjective::spike_count: return "spike_count";
    }
    return "";
}

void ExperimentConfig::validate() const {
    topology.validate();
    dynamics.profile.validate();
    dynamics.simulation.validate();
    plasticity.profile.validate();
    if (!(plasticity.train_duration >= 0.0)) throw ConfigError("plasticity: train_duration must be non-negative");
    encoding.validate();
    if (!(readout.fraction > 0.0 && readout.fraction <= 1.0)) throw ConfigError("readout: fraction must be in (0, 1]");
    if (readout.regularization < 0.0) throw ConfigError("readout: regularization must be non-negative");
    if (metrics.tau_max == 0) throw ConfigError("metrics: tau_max must be positive");
    if (metrics.mc_samples <= metrics.tau_max) throw ConfigError("metrics: mc_samples must exceed tau_max");
    if (!(metrics.mc_fraction > 0.0 && metrics.mc_fraction <= 1.0)) {
        throw ConfigError("metrics: mc_fraction must be in (0, 1]");
    }
    if (!(metrics.mc_train_fraction > 0.0 && metrics.mc_train_fraction < 1.0)) {
        throw ConfigError("metrics: mc_train_fraction must be in (0, 1)");
    }
    if (!(metrics.rank_threshold > 0.0 && metrics.rank_threshold <= 1.0)) {
        throw ConfigError("metrics: rank_threshold must be in (0, 1]");
    }
    if (metrics.rank_stimuli < 2) throw ConfigError("metrics: rank_stimuli must be at least 2");
    if (!(metrics.vpt_epsilon > 0.0)) throw ConfigError("metrics: vpt_epsilon must be positive");
    lnp.config.validate();
    if (!(lnp.activity_keep > 0.0 && lnp.activity_keep <= 1.0)) {
        throw ConfigError("lnp: activity_keep must be in (0, 1]");
    }
    bo.config.validate();
    if (!(bo.train_duration >= 0.0)) throw ConfigError("bo: train_duration must be non-negative");
    data.chaotic.validate();
    data.classes.validate();
    if (data.subsample == 0) throw ConfigError("data: subsample must be positive");
    if (data.train_samples < 2 || data.test_samples == 0) {
        throw ConfigError("data: train_samples must be at least 2 and test_samples positive");
    }
    if (!(data.stimulus_ms > 0.0) || data.blank_ms < 0.0) {
        throw ConfigError("data: stimulus_ms must be positive and blank_ms non-negative");
    }
}

std::uint64_t ExperimentConfig::require_seed() const {
    if (!seed) throw ConfigError("experiment: seed is required");
    return *seed;
}

HeterogeneityProfile neuron_profile(const ExperimentConfig& config) {
    return config.dynamics.heterogeneous ? config.dynamics.profile : config.dynamics.profile.homogenized();
}

StdpProfile stdp_profile(const ExperimentConfig& config) {
    return config.plasticity.heterogeneous ? config.plasticity.profile : config.plasticity.profile.homogenized();
}

Model build_model(const ExperimentConfig& config, std::uint64_t seed) {
    const NetworkGraph graph = build_recurrent_graph(config.topology, seed);
    return make_model(graph, neuron_profile(config), stdp_profile(config), seed);
}

Model build_model_from(const ExperimentConfig& config, const ParamDistributionSet& set, std::uint64_t seed) {
    HeterogeneityProfile neurons = config.dynamics.profile;
    neurons.excitatory.tau_m = set[ParamDistributionSet::tau_m_exc];
    neurons.inhibitory.tau_m = set[ParamDistributionSet::tau_m_inh];
    // The search is free to invert the E/I ordering.
    neurons.bio_inspired = false;
    StdpProfile stdp = config.plasticity.profile;
    stdp.a_plus_gain = set[ParamDistributionSet::a_plus];
    stdp.a_minus_gain = set[ParamDistributionSet::a_minus];
    stdp.tau_plus = set[ParamDistributionSet::tau_plus];
    stdp.tau_minus = set[ParamDistributionSet::tau_minus];
    const NetworkGraph graph = build_recurrent_graph(config.topology, seed);
    return make_model(graph, neurons, stdp, seed);
}

namespace {

RateEncoderConfig encoder_for(const ExperimentConfig& config, std::uint32_t n_encoders, std::size_t channels) {
    RateEncoderConfig enc = config.encoding;
    const std::size_t cols = enc.mode == EncodingMode::temporal_difference ? 2 * channels : channels;
    if (cols == 0 || n_encoders < cols) {
        throw ConfigError("encoding: " + std::to_string(n_encoders) + " encoders cannot serve " +
                          std::to_string(cols) + " input columns");
    }
    enc.encoders_per_channel = n_encoders / cols;
    return enc;
}

SimulationOptions sim_options(const ExperimentConfig& config, bool plastic) {
    SimulationOptions o = config.dynamics.simulation;
    o.plastic = plastic;
    return o;
}

std::size_t rows_for(double duration_ms, double window_ms) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration_ms / window_ms - 1e-9)));
}

}  // namespace

ReservoirDriver::ReservoirDriver(const Model& model, const ExperimentConfig& config, std::size_t channels,
                                 bool plastic, std::uint64_t seed)
    : sim_(model, sim_options(config, plastic)),
      encoder_(encoder_for(config, model.graph.n_encoders(), channels)),
      seed_(seed) {
    sim_.reset(seed);
}

Eigen::RowVectorXd ReservoirDriver::drive_stimulus(const Eigen::MatrixXd& rows, double window_ms,
                                                   std::span<const std::size_t> sampled) {
    RateEncoderConfig enc = encoder_;
    enc.window = window_ms;
    const double dt = sim_.options().dt;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::MatrixXd row = rows.row(r);
        if (enc.mode == EncodingMode::temporal_difference) {
            Eigen::MatrixXd pair(2, rows.cols());
            pair.row(0) = prev_.size() == rows.cols() ? Eigen::RowVectorXd(prev_) : Eigen::RowVectorXd(rows.row(r));
            pair.row(1) = rows.row(r);
            row = temporal_difference(pair).row(1);
            prev_ = rows.row(r);
        }
        RateEncoderConfig poisson = enc;
        poisson.mode = EncodingMode::poisson_rate;
        sim_.advance(rate_encode(row, poisson, dt, mix_seed(seed_, 1'000'000 + rows_++)));
    }
    const auto act = sim_.filtered_activity();
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(sampled.size()));
    for (std::size_t k = 0; k < sampled.size(); ++k) out(static_cast<Eigen::Index>(k)) = act[sampled[k]];
    return out;
}

Eigen::RowVectorXd ReservoirDriver::drive_row(const Eigen::RowVectorXd& row, std::span<const std::size_t> sampled) {
    return drive_stimulus(row, encoder_.window, sampled);
}

Eigen::MatrixXd ReservoirDriver::drive(const Eigen::MatrixXd& signal, std::span<const std::size_t> sampled) {
    Eigen::MatrixXd out(signal.rows(), static_cast<Eigen::Index>(sampled.size()));
    for (Eigen::Index r = 0; r < signal.rows(); ++r) out.row(r) = drive_row(signal.row(r), sampled);
    return out;
}

void ReservoirDriver::drive_silent(double duration_ms) {
    const auto steps = static_cast<std::size_t>(std::llround(duration_ms / sim_.options().dt));
    sim_.advance_silent(steps);
    prev_.resize(0);
}

std::vector<std::size_t> local_indices(const NetworkGraph& graph, std::span<const NeuronId> ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (NeuronId id : ids) out.push_back(graph.index(id));
    return out;
}

Eigen::VectorXd white_noise(std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed, 141);
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = uniform01(rng);
    return u;
}

namespace {

std::vector<std::size_t> all_indices(const NetworkGraph& graph) {
    std::vector<std::size_t> idx(graph.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::vector<std::size_t> readout_indices(const NetworkGraph& graph, double fraction) {
    if (fraction >= 1.0) return all_indices(graph);
    const auto ids = select_readout_neurons(graph, fraction);
    return local_indices(graph, ids);
}

ChaoticSystem system_for(TaskKind task) {
    switch (task) {
        case TaskKind::lorenz63: return ChaoticSystem::lorenz63;
        case TaskKind::lorenz96: return ChaoticSystem::lorenz96;
        case TaskKind::rossler: return ChaoticSystem::rossler;
        case TaskKind::synth_class: break;
    }
    throw ConfigError("task " + std::string(task_name(task)) + " has no chaotic series");
}

SyntheticClassTask class_spec(const ExperimentConfig& config) { return config.data.classes; }

/// Trials of the classification task laid out as one long [0, 1] stream:
/// each stimulus followed by blank rows.
Eigen::MatrixXd class_stream(const ExperimentConfig& config, std::uint64_t seed) {
    const ClassificationData data = make_classification_task(class_spec(config), seed);
    const double window = config.data.stimulus_ms / static_cast<double>(config.data.classes.n_samples);
    const std::size_t blank = static_cast<std::size_t>(std::llround(config.data.blank_ms / window));
    const auto ch = static_cast<Eigen::Index>(config.data.classes.n_channels);
    std::vector<Eigen::RowVectorXd> rows;
    for (std::size_t t : data.train) {
        for (Eigen::Index r = 0; r < data.inputs[t].rows(); ++r) rows.emplace_back(data.inputs[t].row(r));
        for (std::size_t b = 0; b < blank; ++b) rows.emplace_back(Eigen::RowVectorXd::Zero(ch));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), ch);
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows[r];
    return out;
}

}  // namespace

Eigen::MatrixXd ForecastData::to_unit(const Eigen::MatrixXd& centered) const {
    Eigen::MatrixXd u(centered.rows(), centered.cols());
    for (Eigen::Index r = 0; r < centered.rows(); ++r) {
        for (Eigen::Index c = 0; c < centered.cols(); ++c) {
            u(r, c) = std::clamp((centered(r, c) - lo(c)) / (hi(c) - lo(c)), 0.0, 1.0);
        }
    }
    return u;
}

ForecastData forecast_data(const ExperimentConfig& config, TaskKind task, std::uint64_t seed) {
    const DataSection& d = config.data;
    ChaoticConfig cc = d.chaotic;
    cc.system = system_for(task);
    cc.seed = mix_seed(seed, 121);
    const std::size_t rows = d.warmup_samples + d.train_samples + d.test_samples + 1;
    cc.n_steps = std::max(cc.n_steps, cc.washout + d.subsample * rows);
    const TimeSeries ts = generate_series(cc);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows), ts.values.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = ts.values.row(static_cast<Eigen::Index>(r * d.subsample));
    }
    ForecastData out;
    out.series = normalize_series(sub);
    // Encoder range from the portion seen before the forecast, with margin.
    const Eigen::Index seen = static_cast<Eigen::Index>(d.warmup_samples + d.train_samples + 1);
    const Eigen::MatrixXd head = out.series.values.topRows(seen);
    const Eigen::RowVectorXd mn = head.colwise().minCoeff();
    const Eigen::RowVectorXd mx = head.colwise().maxCoeff();
    const Eigen::RowVectorXd margin = 0.1 * (mx - mn);
    out.lo = mn - margin;
    out.hi = mx + margin;
    return out;
}

Eigen::MatrixXd training_signal(const ExperimentConfig& config, TaskKind task, std::size_t rows, std::uint64_t seed) {
    if (task == TaskKind::synth_class) {
        const Eigen::MatrixXd one = class_stream(config, seed);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), one.cols());
        for (std::size_t r = 0; r < rows; ++r) {
            out.row(static_cast<Eigen::Index>(r)) = one.row(static_cast<Eigen::Index>(r % one.rows()));
        }
        return out;
    }
    const ForecastData fd = forecast_data(config, task, seed);
    const Eigen::Index avail = static_cast<Eigen::Index>(config.data.warmup_samples + config.data.train_samples);
    const Eigen::MatrixXd unit = fd.to_unit(fd.series.values.topRows(avail));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), unit.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        out.row(static_cast<Eigen::Index>(r)) = unit.row(static_cast<Eigen::Index>(r % unit.rows()));
    }
    return out;
}

namespace {

TrainResult train_on(const Model& model, const ExperimentConfig& config, const Eigen::MatrixXd& signal,
                     std::uint64_t seed) {
    ReservoirDriver driver(model, config, static_cast<std::size_t>(signal.cols()), true, seed);
    driver.drive(signal, {});
    TrainResult out;
    out.trained = driver.simulator().trained_model();
    out.record = driver.simulator().record();
    out.stats = spike_stats(out.record);
    return out;
}

}  // namespace

TrainResult train_stdp(const Model& model, const ExperimentConfig& config, TaskKind task, double duration,
                       std::uint64_t seed) {
    const double window =
        task == TaskKind::synth_class
            ? config.data.stimulus_ms / static_cast<double>(config.data.classes.n_samples)
            : config.encoding.window;
    if (duration <= 0.0) {
        TrainResult out;
        out.trained = model;
        out.record = SpikeRecord::from_spikes({}, 0.0, {});
        out.stats = spike_stats(out.record);
        return out;
    }
    const std::size_t rows = rows_for(duration, window);
    const Eigen::MatrixXd signal = training_signal(config, task, rows, seed);
    ExperimentConfig c = config;
    c.encoding.window = window;
    return train_on(model, c, signal, mix_seed(seed, 201));
}

TrainResult train_stdp_noise(const Model& model, const ExperimentConfig& config, double duration,
                             std::uint64_t seed) {
    if (duration <= 0.0) {
        TrainResult out;
        out.trained = model;
        out.record = SpikeRecord::from_spikes({}, 0.0, {});
        out.stats = spike_stats(out.record);
        return out;
    }
    const Eigen::MatrixXd signal = white_noise(rows_for(duration, config.encoding.window), mix_seed(seed, 202));
    return train_on(model, config, signal, mix_seed(seed, 203));
}

MemoryResult run_memory_task(const Model& model, const ExperimentConfig& config, std::uint64_t seed) {
    const Eigen::VectorXd u = white_noise(config.metrics.mc_samples, mix_seed(seed, 211));
    const auto sampled = readout_indices(model.graph, config.metrics.mc_fraction);
    ReservoirDriver driver(model, config, 1, false, mix_seed(seed, 212));
    const Eigen::MatrixXd features = driver.drive(u, sampled);
    MemoryResult out;
    out.capacity = memory_capacity(features, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                                   config.metrics.tau_max, config.metrics.mc_regularization,
                                   config.metrics.mc_train_fraction);
    out.record = driver.simulator().record();
    out.stats = spike_stats(out.record);
    out.efficiency = out.stats.s_tilde > 0.0 ? spike_efficiency(out.capacity.total, out.stats)
                                             : std::numeric_limits<double>::quiet_NaN();
    return out;
}

ForecastResult run_forecast(const Model& model, const ExperimentConfig& config, TaskKind task, std::uint64_t seed) {
    const DataSection& d = config.data;
    const ForecastData fd = forecast_data(config, task, seed);
    const Eigen::MatrixXd& centered = fd.series.values;
    const Eigen::MatrixXd unit = fd.to_unit(centered);
    const auto sampled = readout_indices(model.graph, config.readout.fraction);
    ReservoirDriver driver(model, config, static_cast<std::size_t>(centered.cols()), false, mix_seed(seed, 221));

    const auto fit_end = static_cast<Eigen::Index>(d.warmup_samples + d.train_samples);
    const Eigen::MatrixXd states = driver.drive(unit.topRows(fit_end), sampled);
    const auto w = static_cast<Eigen::Index>(d.warmup_samples);
    const auto n_train = static_cast<Eigen::Index>(d.train_samples);
    // State after row t predicts row t + 1.
    const LinearReadout readout = fit_linear_readout(states.middleRows(w, n_train),
                                                     centered.middleRows(w + 1, n_train),
                                                     config.readout.regularization, true);

    const auto horizon = static_cast<Eigen::Index>(d.test_samples);
    ForecastResult out;
    out.forecast.resize(horizon, centered.cols());
    out.truth = centered.middleRows(fit_end, horizon);
    Eigen::RowVectorXd state = states.row(fit_end - 1);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        const Eigen::RowVectorXd pred = readout.predict(state);
        if (!pred.allFinite()) throw NumericError("forecast diverged to a non-finite value");
        out.forecast.row(h) = pred;
        if (h + 1 == horizon) break;
        const Eigen::RowVectorXd next =
            d.forecast_mode == ForecastMode::closed_loop ? Eigen::RowVectorXd(fd.to_unit(pred)) : unit.row(fit_end + h);
        state = driver.drive_row(next, sampled);
    }
    out.nrmse = nrmse(out.forecast, out.truth, fd.series.sigma);
    out.nrmse_mean = std::accumulate(out.nrmse.begin(), out.nrmse.end(), 0.0) / static_cast<double>(out.nrmse.size());
    out.vpt = vpt(out.nrmse, config.metrics.vpt_epsilon);
    out.readout = readout;
    out.record = driver.simulator().record();
    return out;
}

ClassificationResult run_classification(const Model& model, const ExperimentConfig& config, std::uint64_t seed) {
    const ClassificationData data = make_classification_task(class_spec(config), seed);
    const auto sampled = readout_indices(model.graph, config.readout.fraction);
    ReservoirDriver driver(model, config, config.data.classes.n_channels, false, mix_seed(seed, 231));
    const double window = config.data.stimulus_ms / static_cast<double>(config.data.classes.n_samples);

    Eigen::MatrixXd finals(static_cast<Eigen::Index>(data.inputs.size()), static_cast<Eigen::Index>(sampled.size()));
    for (std::size_t t = 0; t < data.inputs.size(); ++t) {
        finals.row(static_cast<Eigen::Index>(t)) = driver.drive_stimulus(data.inputs[t], window, sampled);
        driver.drive_silent(config.data.blank_ms);
    }
    const auto& nodes = model.graph.nodes();
    auto subset = [&](const std::vector<std::size_t>& trials) {
        StateFeatures f;
        f.values.resize(static_cast<Eigen::Index>(trials.size()), finals.cols());
        for (std::size_t k = 0; k < trials.size(); ++k) {
            f.values.row(static_cast<Eigen::Index>(k)) = finals.row(static_cast<Eigen::Index>(trials[k]));
        }
        for (std::size_t idx : sampled) f.neurons.push_back(nodes[idx].id);
        return f;
    };
    std::vector<std::size_t> train_labels;
    for (std::size_t t : data.train) train_labels.push_back(data.labels[t]);
    const std::size_t n_classes = config.data.classes.n_classes;
    const ReadoutLayer clf = fit_classifier(subset(data.train), train_labels, n_classes,
                                            config.readout.regularization, config.readout.hidden_units, seed);
    ClassificationResult out;
    out.predictions = clf.classify(subset(data.test).values);
    out.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    std::size_t correct = 0;
    for (std::size_t k = 0; k < data.test.size(); ++k) {
        const std::size_t truth = data.labels[data.test[k]];
        out.truth.push_back(truth);
        ++out.confusion[truth][out.predictions[k]];
        if (truth == out.predictions[k]) ++correct;
    }
    out.classifier = clf;
    out.accuracy = data.test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.test.size());
    out.record = driver.simulator().record();
    return out;
}

Eigen::MatrixXd stimulus_final_states(const Model& model, const ExperimentConfig& config, std::size_t n_stimuli,
                                      std::uint64_t seed) {
    SyntheticClassTask spec = config.data.classes;
    spec.n_classes = n_stimuli;
    spec.trials_per_class = 1;
    spec.noise = 0.0;
    spec.train_fraction = 1.0;
    spec.templates.clear();
    const ClassificationData data = make_classification_task(spec, seed);
    const auto all = all_indices(model.graph);
    ReservoirDriver driver(model, config, spec.n_channels, false, mix_seed(seed, 241));
    const double window = config.data.stimulus_ms / static_cast<double>(spec.n_samples);
    Eigen::MatrixXd finals(static_cast<Eigen::Index>(n_stimuli), static_cast<Eigen::Index>(all.size()));
    for (std::size_t s = 0; s < n_stimuli; ++s) {
        finals.row(static_cast<Eigen::Index>(s)) = driver.drive_stimulus(data.inputs[s], window, all);
        driver.drive_silent(config.data.blank_ms);
    }
    return finals;
}

SeparationReport separation_rank(const Model& model, const ExperimentConfig& config, std::uint64_t seed) {
    return effective_rank(stimulus_final_states(model, config, config.metrics.rank_stimuli, seed),
                          config.metrics.rank_threshold);
}

PruneOutcome prune_lnp(const Model& model, const ExperimentConfig& config, std::uint64_t seed) {
    LnpResult r = run_lnp(model, config.lnp.config, seed);
    return {std::move(r.final_model), std::move(r.models), std::move(r.log)};
}

PruneOutcome prune_activity(const Model& model, const ExperimentConfig& config, TaskKind task,
                            std::size_t target_synapses, std::uint64_t seed) {
    PruneOutcome out;
    out.final_model = model;
    const std::size_t iterations = config.lnp.config.iterations;
    const double e0 = static_cast<double>(model.graph.edges().size());
    const double target = static_cast<double>(target_synapses);
    const std::size_t rows = config.data.train_samples;
    for (std::size_t k = 1; k <= iterations; ++k) {
        const std::uint64_t it_seed = mix_seed(seed, 1000 + k - 1);
        const Model& cur = out.final_model;
        const Eigen::MatrixXd signal = training_signal(config, task, rows, seed);
        ReservoirDriver driver(cur, config, static_cast<std::size_t>(signal.cols()), false, it_seed);
        driver.drive(signal, {});
        const SpikeRecord rec = driver.simulator().record();
        std::vector<double> rates;
        for (const Node& n : cur.graph.nodes()) {
            rates.push_back(1000.0 * static_cast<double>(rec.counts.at(n.id)) / rec.duration);
        }
        const double frac = static_cast<double>(k) / static_cast<double>(iterations);
        const auto step_target =
            e0 > 0.0 ? static_cast<std::size_t>(std::llround(e0 * std::pow(std::max(target, 1.0) / e0, frac))) : 0;
        out.final_model = activity_prune(cur, rates, std::max(step_target, target_synapses));
        out.models.push_back(out.final_model);
        LnpLogEntry e;
        e.iter = k;
        e.n_neurons = out.final_model.graph.size();
        e.n_synapses = out.final_model.graph.edges().size();
        e.density = out.final_model.graph.density();
        e.lambda_max = std::numeric_limits<double>::quiet_NaN();
        e.degree_var = out.final_model.graph.empty() ? 0.0 : degree_variance(out.final_model.graph);
        e.shift_applied = 0.0;
        e.seed = it_seed;
        out.log.push_back(e);
    }
    return out;
}

MemoryResult evaluate_distribution(const ExperimentConfig& config, const ParamDistributionSet& set,
                                   std::uint64_t seed) {
    const Model model = build_model_from(config, set, seed);
    const TrainResult trained = train_stdp_noise(model, config, config.bo.train_duration, seed);
    return run_memory_task(trained.trained, config, seed);
}

double objective_value(BoObjective objective, const MemoryResult& result) {
    switch (objective) {
        case BoObjective::efficiency: return result.efficiency;
        case BoObjective::capacity: return result.capacity.total;
        case BoObjective::spike_count: return -result.stats.s_tilde;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

BoOutcome run_distribution_search(const ExperimentConfig& config, std::uint64_t seed) {
    BoOutcome out;
    const ParamDistributionSet center = ParamDistributionSet::bio_defaults();
    auto objective = [&](const ParamDistributionSet& set) {
        try {
            out.evaluations.push_back(evaluate_distribution(config, set, seed));
        } catch (...) {
            MemoryResult failed;
            failed.efficiency = std::numeric_limits<double>::quiet_NaN();
            failed.capacity.total = std::numeric_limits<double>::quiet_NaN();
            failed.stats.s_tilde = std::numeric_limits<double>::quiet_NaN();
            out.evaluations.push_back(failed);
            throw;
        }
        return objective_value(config.bo.objective, out.evaluations.back());
    };
    DistributionBoResult r =
        bo_distributions(objective, DistributionBounds::around(center), config.bo.config, mix_seed(seed, 91), center);
    out.best = r.best;
    out.raw = std::move(r.raw);
    return out;
}

}  // namespace hetsnn
