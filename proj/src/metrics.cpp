#include "hetsnn/metrics.hpp"

#include "hetsnn/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetsnn {

namespace {

double squared_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    const double va = ac.squaredNorm();
    const double vb = bc.squaredNorm();
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    const double c = ac.dot(bc);
    return std::clamp(c * c / (va * vb), 0.0, 1.0);
}

}  // namespace

MemoryCapacityReport memory_capacity(const Eigen::MatrixXd& features, std::span<const double> input,
                                     std::size_t tau_max, double regularization, double train_fraction) {
    const auto t_len = static_cast<std::size_t>(features.rows());
    if (input.size() != t_len) throw InputError("memory_capacity: input and feature lengths differ");
    if (tau_max == 0) throw ConfigError("metrics: tau_max must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("metrics: train_fraction must lie in (0, 1)");
    if (t_len <= tau_max || t_len - tau_max < 10 * static_cast<std::size_t>(features.cols())) {
        throw InputError("memory_capacity: signal too short for the number of features");
    }
    const auto [lo, hi] = std::minmax_element(input.begin(), input.end());
    if (*lo == *hi) throw InputError("memory_capacity: input signal has zero variance");

    const auto rows = static_cast<Eigen::Index>(t_len - tau_max);
    const auto n_train = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(rows)));
    const Eigen::Index n_test = rows - n_train;
    if (n_train < 2 || n_test < 2) throw InputError("memory_capacity: split leaves too few rows");
    const auto first = static_cast<Eigen::Index>(tau_max);
    const Eigen::MatrixXd x_train = features.middleRows(first, n_train);
    const Eigen::MatrixXd x_test = features.middleRows(first + n_train, n_test);

    // Targets for every delay share the design matrix: solve them together.
    Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(tau_max));
    for (std::size_t d = 1; d <= tau_max; ++d) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            y(r, static_cast<Eigen::Index>(d - 1)) = input[static_cast<std::size_t>(first + r) - d];
        }
    }
    const LinearReadout fit = RidgeSolver(x_train, regularization, true).solve(y.topRows(n_train));
    const Eigen::MatrixXd pred = fit.predict(x_test);

    MemoryCapacityReport report;
    report.tau_max = tau_max;
    report.per_delay.resize(tau_max);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(tau_max); ++d) {
        report.per_delay[static_cast<std::size_t>(d)] =
            squared_correlation(y.col(d).tail(n_test), pred.col(d));
    }
    for (double c : report.per_delay) report.total += c;
    return report;
}

SpikeStats spike_stats(const SpikeRecord& record, std::span<const NeuronId> readout) {
    SpikeStats s;
    s.window = record.duration;
    double cutoff = std::numeric_limits<double>::infinity();
    for (const Spike& sp : record.spikes) {
        if (std::find(readout.begin(), readout.end(), sp.neuron) != readout.end()) {
            cutoff = sp.time;
            break;
        }
    }
    std::map<NeuronId, std::size_t> counts;
    for (const auto& [id, c] : record.counts) counts[id] = 0;
    for (const Spike& sp : record.spikes) {
        if (sp.time > cutoff) break;
        ++counts[sp.neuron];
    }
    std::size_t total = 0;
    for (const auto& [id, c] : counts) {
        s.counts.push_back(c);
        total += c;
    }
    if (!s.counts.empty()) s.s_tilde = static_cast<double>(total) / static_cast<double>(s.counts.size());
    const double span = std::isfinite(cutoff) ? cutoff : record.duration;
    if (span > 0.0) s.nu_bar = 1000.0 * s.s_tilde / span;
    return s;
}

double spike_efficiency(double capacity, const SpikeStats& stats) {
    if (!(stats.s_tilde > 0.0)) throw NumericError("spike efficiency undefined without spikes");
    return capacity / stats.s_tilde;
}

SeparationReport effective_rank(const Eigen::MatrixXd& final_states, double threshold) {
    if (final_states.size() == 0 || !final_states.allFinite()) throw InputError("effective_rank: matrix must be finite and non-empty");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("metrics: rank threshold must lie in (0, 1]");
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(final_states);
    const Eigen::VectorXd sv = svd.singularValues();
    const double total = sv.sum();
    if (!(total > 0.0)) throw InputError("effective_rank: all-zero matrix");
    SeparationReport r;
    r.threshold = threshold;
    r.singular_values.assign(sv.data(), sv.data() + sv.size());
    double acc = 0.0;
    // Relative slack absorbs rounding in the cumulative sum.
    const double target = threshold * total * (1.0 - 1e-12);
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        acc += sv[k];
        if (acc >= target) {
            r.effective_rank = static_cast<std::size_t>(k + 1);
            break;
        }
    }
    return r;
}

HeterogeneityScore heterogeneity_score(const Eigen::MatrixXd& samples) {
    if (samples.rows() < 2) throw InputError("heterogeneity_score needs at least 2 draws");
    if (samples.rows() < samples.cols()) return {0.0, true};
    const Eigen::MatrixXd centered = samples.rowwise() - samples.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
    return {std::max(cov.determinant(), 0.0), false};
}

namespace {

double raw_sops(const SpikeRecord& record, const NetworkGraph& graph) {
    const auto out = graph.out_degrees();
    double total = 0.0;
    for (const auto& [id, count] : record.counts) {
        if (auto idx = graph.index_of(id)) total += static_cast<double>(count) * static_cast<double>(out[*idx]);
    }
    return total;
}

}  // namespace

EnergyReport count_sops(const SpikeRecord& record, const NetworkGraph& graph, const NetworkGraph* dense_parent,
                        double energy_per_sop) {
    EnergyReport r;
    r.total_sops = raw_sops(record, graph);
    r.energy = energy_per_sop * r.total_sops;
    if (dense_parent != nullptr) {
        const double dense = raw_sops(record, *dense_parent);
        if (r.total_sops > 0.0) {
            r.sop_ratio_vs_dense = dense / r.total_sops;
        } else {
            r.sop_ratio_vs_dense = dense > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        }
    }
    return r;
}

std::vector<double> nrmse(const Eigen::MatrixXd& forecast, const Eigen::MatrixXd& truth, std::span<const double> sigma) {
    if (forecast.rows() != truth.rows() || forecast.cols() != truth.cols()) throw InputError("nrmse: shape mismatch");
    if (sigma.size() != static_cast<std::size_t>(truth.cols())) throw InputError("nrmse: sigma size mismatch");
    for (double s : sigma) {
        if (!(s > 0.0)) throw InputError("nrmse: sigma must be positive");
    }
    std::vector<double> out(static_cast<std::size_t>(truth.rows()));
    const double d = static_cast<double>(truth.cols());
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < truth.cols(); ++c) {
            const double e = (forecast(r, c) - truth(r, c)) / sigma[static_cast<std::size_t>(c)];
            acc += e * e;
        }
        out[static_cast<std::size_t>(r)] = std::sqrt(acc / d);
    }
    return out;
}

std::size_t vpt(std::span<const double> rmse, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("metrics: VPT epsilon must be positive");
    return static_cast<std::size_t>(std::count_if(rmse.begin(), rmse.end(), [&](double v) { return v < epsilon; }));
}

}  // namespace hetsnn
