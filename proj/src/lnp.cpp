#include "hetsnn/lnp.hpp"

#include <json.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace hetsnn {

void PruneConfig::validate() const {
    if (!(rho_density > 0.0)) throw ConfigError("lnp: rho_density must be positive");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw ConfigError("lnp: p_min must lie in (0, 1]");
    if (!(epsilon_quadform > 0.0)) throw ConfigError("lnp: epsilon_quadform must be positive");
    if (!(noise_sigma > 0.0)) throw ConfigError("lnp: noise_sigma must be positive");
    if (!(shift_margin > 0.0)) throw ConfigError("lnp: shift_margin must be positive");
    if (!(epsilon_h > 0.0)) throw ConfigError("lnp: epsilon_h must be positive");
    if (!(delocalize_w_scale > 0.0)) throw ConfigError("lnp: delocalize_w_scale must be positive");
    if (!(tau_m_min > 0.0)) throw ConfigError("lnp: tau_m_min must be positive");
    if (centrality.kind == NodeThreshold::Kind::quantile && !(centrality.value >= 0.0 && centrality.value < 1.0)) {
        throw ConfigError("lnp: centrality quantile must lie in [0, 1)");
    }
    if (optimize_timescales && timescale_budget < 5) throw ConfigError("lnp: timescale_budget must be at least 5");
    lyapunov.validate();
}

void write_lnp_log(std::ostream& out, std::span<const LnpLogEntry> log) {
    for (const LnpLogEntry& e : log) {
        nlohmann::ordered_json j;
        j["iter"] = e.iter;
        j["n_neurons"] = e.n_neurons;
        j["n_synapses"] = e.n_synapses;
        j["density"] = e.density;
        j["lambda_max"] = e.lambda_max;
        j["degree_var"] = e.degree_var;
        j["shift_applied"] = e.shift_applied;
        j["seed"] = e.seed;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed to write LNP log");
}

SynapsePruneStep lyapunov_prune_synapses(const Model& model, const PruneConfig& config, std::uint64_t seed) {
    config.validate();
    const RateSystem sys = rate_system_from_model(model, config.coupling_gain, config.drive);
    const NodeLyapunov exps = estimate_node_lyapunov(sys, config.lyapunov, seed);
    const LyapunovMatrix lmat =
        build_lyapunov_matrix(model.graph, exps.exponent, config.harmonic_multiplier, config.epsilon_h);
    const LinearizedSystem lin = linearize(model, lmat.entries, config.drive, config.noise_sigma);
    const StationaryCovariance cov = stationary_covariance(lin.a, config.noise_sigma, config.shift_margin);

    double rho = config.rho_density;
    if (config.rho_relative) {
        const Eigen::MatrixXd scores = edge_scores(lin.a, cov.sigma);
        std::vector<double> positive;
        for (Eigen::Index k = 0; k < scores.size(); ++k) {
            if (scores.data()[k] > 0.0) positive.push_back(scores.data()[k]);
        }
        if (!positive.empty()) {
            std::nth_element(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(positive.size() / 2),
                             positive.end());
            rho /= positive[positive.size() / 2];
        }
    }
    SynapsePruneStep step;
    step.a = lin.a;
    step.node_exponent = exps.exponent;
    step.shift_applied = cov.shift_applied;
    step.rho_effective = rho;
    step.a_sparse = prune_synapses(lin.a, cov.sigma, rho, config.p_min, config.diagonal_mode, seed);
    step.model = apply_sparsification(model, step.a, step.a_sparse, config.excitability_gain);
    return step;
}

namespace {

StdpParams mean_params(std::span<const StdpParams> params) {
    if (params.empty()) return {};
    StdpParams m = params.front();
    m.a_plus_gain = m.a_minus_gain = m.tau_plus = m.tau_minus = 0.0;
    for (const StdpParams& p : params) {
        m.a_plus_gain += p.a_plus_gain;
        m.a_minus_gain += p.a_minus_gain;
        m.tau_plus += p.tau_plus;
        m.tau_minus += p.tau_minus;
    }
    const auto n = static_cast<double>(params.size());
    m.a_plus_gain /= n;
    m.a_minus_gain /= n;
    m.tau_plus /= n;
    m.tau_minus /= n;
    return m;
}

Eigen::MatrixXd coupling_matrix(const Model& model, std::span<const double> offdiag) {
    return linearize(model, offdiag, 0.0, 1.0).a;
}

// Method-of-moments shape, clipped to the search box.
double moment_shape(const std::vector<double>& v, double lo, double hi) {
    if (v.size() < 2) return hi;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    if (!(var > 0.0)) return hi;
    return std::clamp(mean * mean / var, lo, hi);
}

}  // namespace

TimescaleResult optimize_timescales(const Model& model, std::span<const double> offdiag, std::size_t budget,
                                    std::uint64_t seed, double tau_m_min) {
    if (budget < 5) throw ConfigError("lnp: timescale budget must be at least 5");
    if (model.graph.empty()) throw InputError("timescale optimization on an empty model");
    const auto nodes = model.graph.nodes();
    const std::size_t n = nodes.size();
    std::vector<double> exc;
    std::vector<double> inh;
    for (std::size_t i = 0; i < n; ++i) {
        (nodes[i].sign == NeuronSign::excitatory ? exc : inh).push_back(model.neurons[i].tau_m);
    }
    auto mean_of = [](const std::vector<double>& v, double fallback) {
        if (v.empty()) return fallback;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double mean_e = mean_of(exc, 20.0);
    const double mean_i = mean_of(inh, 10.0);
    constexpr double k_lo = 2.0;
    constexpr double k_hi = 12.0;

    // Coordinates are (k_exc, mean_exc, k_inh, mean_inh).
    BoSpace space;
    space.lower = {k_lo, 0.5 * mean_e, k_lo, 0.5 * mean_i};
    space.upper = {k_hi, 2.0 * mean_e, k_hi, 2.0 * mean_i};
    const auto& rule = gauss_legendre_512();
    space.embed_weights.insert(space.embed_weights.end(), rule.weights.begin(), rule.weights.end());
    space.embed_weights.insert(space.embed_weights.end(), rule.weights.begin(), rule.weights.end());
    space.embed = [](std::span<const double> x) {
        const std::size_t q = gauss_legendre_512().nodes.size();
        std::vector<double> e(2 * q);
        tabulated_gamma_quantiles(x[0], x[1] / x[0], std::span<double>(e.data(), q));
        tabulated_gamma_quantiles(x[2], x[3] / x[2], std::span<double>(e.data() + q, q));
        return e;
    };

    // Common random numbers: every candidate law maps the same uniforms.
    Rng rng = make_rng(seed, 111);
    std::vector<double> uniforms(n);
    for (double& u : uniforms) u = std::clamp(uniform01(rng), 1e-12, 1.0 - 1e-12);
    const Eigen::MatrixXd coupling = coupling_matrix(model, offdiag);

    auto draw = [&](std::span<const double> x) {
        std::vector<double> tau(n);
        for (std::size_t i = 0; i < n; ++i) {
            const bool is_exc = nodes[i].sign == NeuronSign::excitatory;
            const double k = is_exc ? x[0] : x[2];
            const double theta = (is_exc ? x[1] : x[3]) / k;
            tau[i] = std::max(theta * boost::math::gamma_p_inv(k, uniforms[i]), tau_m_min);
        }
        return tau;
    };
    auto lambda_of = [&](const std::vector<double>& tau) {
        Eigen::MatrixXd a = coupling;
        for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -1.0 / tau[i];
        return max_real_eigenvalue(a);
    };

    BoConfig cfg;
    cfg.budget = budget;
    cfg.n_init = std::min<std::size_t>(8, budget);
    cfg.n_candidates = 256;
    cfg.initial_point = std::vector<double>{moment_shape(exc, k_lo, k_hi), mean_e, moment_shape(inh, k_lo, k_hi), mean_i};
    TimescaleResult out;
    out.search = bo_loop([&](std::span<const double> x) { return -std::abs(lambda_of(draw(x))); }, space, cfg, seed);
    const auto& best = out.search.best_x;
    out.tau_m_exc = GammaSpec::gamma(best[0], best[1] / best[0]);
    out.tau_m_inh = GammaSpec::gamma(best[2], best[3] / best[2]);
    out.lambda_max = -out.search.best_value;
    const auto tau = draw(best);
    out.model = model;
    for (std::size_t i = 0; i < n; ++i) out.model.neurons[i].tau_m = tau[i];
    // Report the signed exponent rather than its magnitude.
    out.lambda_max = lambda_of(tau);
    return out;
}

LnpResult run_lnp(const Model& model, const PruneConfig& config, std::uint64_t seed) {
    config.validate();
    model.validate();
    LnpResult result;
    result.final_model = model;
    Model current = model;
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        const std::uint64_t it_seed = mix_seed(seed, 1000 + iter);

        // Step 1: covariance-weighted synapse sampling.
        const SynapsePruneStep step = lyapunov_prune_synapses(current, config, it_seed);
        std::map<std::pair<NeuronId, NeuronId>, double> sparse_entry;
        {
            const auto& g = step.model.graph;
            for (const Edge& e : g.edges()) {
                const auto i = static_cast<Eigen::Index>(current.graph.index(e.dst));
                const auto j = static_cast<Eigen::Index>(current.graph.index(e.src));
                sparse_entry[{e.src, e.dst}] = step.a_sparse(i, j);
            }
        }

        // Step 2: centrality node pruning.
        const auto removed = nodes_below_threshold(step.model.graph, config.centrality);
        Model pruned = step.model.without_nodes(removed);

        // Step 3: delocalizing edges.
        const DelocalizeResult deloc = delocalize_edges(pruned.graph, config.m_delocalize, it_seed, config.delocalize_w_scale);
        pruned = pruned.with_edges(std::vector<Edge>(deloc.graph.edges().begin(), deloc.graph.edges().end()),
                                   mean_params(pruned.stdp.recurrent));

        // Coupling of the pruned linearization: sampled entries where they
        // survive, pooled harmonic means for the new edges.
        std::vector<double> exps(pruned.graph.size());
        for (std::size_t i = 0; i < exps.size(); ++i) {
            exps[i] = step.node_exponent[current.graph.index(pruned.graph.nodes()[i].id)];
        }
        LyapunovMatrix lmat = build_lyapunov_matrix(pruned.graph, exps, config.harmonic_multiplier, config.epsilon_h);
        for (std::size_t e = 0; e < pruned.graph.edges().size(); ++e) {
            const Edge& edge = pruned.graph.edges()[e];
            if (auto it = sparse_entry.find({edge.src, edge.dst}); it != sparse_entry.end()) lmat.entries[e] = it->second;
        }

        // Step 4: timescales.
        double lambda_max = 0.0;
        if (config.optimize_timescales) {
            TimescaleResult ts = optimize_timescales(pruned, lmat.entries, config.timescale_budget, it_seed, config.tau_m_min);
            pruned = std::move(ts.model);
            lambda_max = ts.lambda_max;
        } else {
            lambda_max = max_real_eigenvalue(linearize(pruned, lmat.entries, config.drive, config.noise_sigma).a);
        }

        LnpLogEntry entry;
        entry.iter = iter + 1;
        entry.n_neurons = pruned.graph.size();
        entry.n_synapses = pruned.graph.edges().size();
        entry.density = pruned.graph.density();
        entry.lambda_max = lambda_max;
        entry.degree_var = pruned.graph.empty() ? 0.0 : degree_variance(pruned.graph);
        entry.shift_applied = step.shift_applied;
        entry.seed = it_seed;
        result.log.push_back(entry);
        result.models.push_back(pruned);
        current = std::move(pruned);
    }
    result.final_model = current;
    return result;
}

Model activity_prune(const Model& model, std::span<const double> rates, std::size_t target_synapses) {
    const auto& g = model.graph;
    if (rates.size() != g.size()) throw InputError("activity pruning: rates misaligned with neurons");
    std::vector<std::size_t> order(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
    std::vector<std::vector<std::size_t>> incident(g.size());
    const auto idx = g.edge_indices();
    for (std::size_t e = 0; e < idx.size(); ++e) {
        incident[idx[e].first].push_back(e);
        incident[idx[e].second].push_back(e);
    }
    std::vector<char> edge_gone(idx.size(), 0);
    std::size_t remaining = idx.size();
    std::vector<NeuronId> removed;
    for (std::size_t r = 0; r < order.size() && remaining > target_synapses; ++r) {
        const std::size_t v = order[r];
        for (std::size_t e : incident[v]) {
            if (!edge_gone[e]) {
                edge_gone[e] = 1;
                --remaining;
            }
        }
        removed.push_back(g.nodes()[v].id);
    }
    if (removed.size() == g.size()) throw InputError("activity pruning would remove every neuron");
    std::sort(removed.begin(), removed.end());
    return model.without_nodes(removed);
}

}  // namespace hetsnn
