#include "hetsnn/readout.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace hetsnn {

StateFeatures extract_features(const SpikeRecord& record, std::span<const NeuronId> sampled, double filter_tau,
                               std::span<const double> timestamps) {
    if (!(filter_tau > 0.0)) throw InputError("filter_tau must be positive");
    std::unordered_map<NeuronId, std::size_t> column;
    for (std::size_t c = 0; c < sampled.size(); ++c) {
        if (!record.counts.contains(sampled[c])) throw InputError("unknown neuron id in feature extraction");
        column[sampled[c]] = c;
    }
    std::vector<std::vector<double>> spikes(sampled.size());
    for (const Spike& s : record.spikes) {
        if (auto it = column.find(s.neuron); it != column.end()) spikes[it->second].push_back(s.time);
    }
    for (double t : timestamps) {
        if (!(t >= 0.0 && t <= record.duration)) throw InputError("feature timestamp outside the record");
    }

    StateFeatures f;
    f.neurons.assign(sampled.begin(), sampled.end());
    f.timestamps.assign(timestamps.begin(), timestamps.end());
    f.filter_tau = filter_tau;
    f.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(timestamps.size()),
                                     static_cast<Eigen::Index>(sampled.size()));
    for (std::size_t c = 0; c < sampled.size(); ++c) {
        for (std::size_t r = 0; r < timestamps.size(); ++r) {
            double acc = 0.0;
            for (double s : spikes[c]) {
                if (s > timestamps[r]) break;
                acc += std::exp(-(timestamps[r] - s) / filter_tau);
            }
            f.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    }
    return f;
}

Eigen::MatrixXd LinearReadout::predict(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd y = x * weights;
    y.rowwise() += bias;
    return y;
}

RidgeSolver::RidgeSolver(const Eigen::MatrixXd& x, double regularization, bool intercept)
    : x_(x), regularization_(regularization), intercept_(intercept) {
    if (x.rows() < 2) throw InputError("readout fit needs at least 2 rows");
    if (regularization < 0.0) throw ConfigError("readout: regularization must be non-negative");
    x_mean_ = intercept ? Eigen::RowVectorXd(x.colwise().mean()) : Eigen::RowVectorXd::Zero(x.cols());
    x_.rowwise() -= x_mean_;
    Eigen::MatrixXd g = x_.transpose() * x_;
    g.diagonal().array() += regularization;
    gram_.compute(g);
    if (gram_.info() != Eigen::Success) throw NumericError("readout Gram factorization failed");
}

LinearReadout RidgeSolver::solve(const Eigen::MatrixXd& y) const {
    if (y.rows() != x_.rows()) throw InputError("readout: feature and target row counts differ");
    const Eigen::RowVectorXd y_mean = intercept_ ? Eigen::RowVectorXd(y.colwise().mean()) : Eigen::RowVectorXd::Zero(y.cols());
    LinearReadout out;
    out.regularization = regularization_;
    out.weights = gram_.solve(x_.transpose() * (y.rowwise() - y_mean));
    out.bias = y_mean - x_mean_ * out.weights;
    return out;
}

LinearReadout fit_linear_readout(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double regularization,
                                 bool intercept) {
    if (x.rows() < 2) throw InputError("readout fit needs at least 2 rows");
    if (y.rows() != x.rows()) throw InputError("readout: feature and target row counts differ");
    if (regularization < 0.0) throw ConfigError("readout: regularization must be non-negative");
    if (regularization > 0.0) return RidgeSolver(x, regularization, intercept).solve(y);

    // Unregularized: least squares via complete orthogonal decomposition
    // (minimum-norm when X is rank deficient).
    LinearReadout out;
    const Eigen::RowVectorXd x_mean = intercept ? Eigen::RowVectorXd(x.colwise().mean()) : Eigen::RowVectorXd::Zero(x.cols());
    const Eigen::RowVectorXd y_mean = intercept ? Eigen::RowVectorXd(y.colwise().mean()) : Eigen::RowVectorXd::Zero(y.cols());
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    out.weights = xc.completeOrthogonalDecomposition().solve(y.rowwise() - y_mean);
    out.bias = y_mean - x_mean * out.weights;
    return out;
}

Eigen::MatrixXd ReadoutLayer::predict(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd h = features;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = h * weights[l];
        h.rowwise() += biases[l];
        if (l + 1 < weights.size()) h = h.array().tanh().matrix();
    }
    return h;
}

std::vector<std::size_t> ReadoutLayer::classify(const Eigen::MatrixXd& features) const {
    const Eigen::MatrixXd scores = predict(features);
    std::vector<std::size_t> out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        Eigen::Index best = 0;
        scores.row(r).maxCoeff(&best);
        out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
    }
    return out;
}

ReadoutLayer fit_regression_readout(const StateFeatures& features, const Eigen::MatrixXd& targets,
                                    double regularization) {
    const LinearReadout lin = fit_linear_readout(features.values, targets, regularization, true);
    ReadoutLayer r;
    r.sampled_neurons = features.neurons;
    r.layer_sizes = {features.neurons.size(), static_cast<std::size_t>(targets.cols())};
    r.weights = {lin.weights};
    r.biases = {lin.bias};
    r.regularization = regularization;
    return r;
}

ReadoutLayer fit_classifier(const StateFeatures& features, std::span<const std::size_t> labels, std::size_t n_classes,
                            double regularization, std::size_t hidden_units, std::uint64_t seed) {
    const Eigen::Index rows = features.values.rows();
    if (static_cast<std::size_t>(rows) != labels.size()) throw InputError("classifier: label count mismatch");
    if (n_classes < 2) throw ConfigError("readout: need at least two classes");
    Eigen::MatrixXd targets = Eigen::MatrixXd::Constant(rows, static_cast<Eigen::Index>(n_classes), -1.0);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (labels[static_cast<std::size_t>(r)] >= n_classes) throw InputError("classifier: label out of range");
        targets(r, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) = 1.0;
    }

    ReadoutLayer out;
    out.sampled_neurons = features.neurons;
    out.regularization = regularization;
    out.layer_sizes.push_back(features.neurons.size());
    Eigen::MatrixXd design = features.values;
    if (hidden_units > 0) {
        // Fixed random projection scaled by the feature spread.
        Rng rng = make_rng(seed, 51);
        std::normal_distribution<double> normal(0.0, 1.0);
        const Eigen::RowVectorXd mean = design.colwise().mean();
        const double spread =
            std::max(std::sqrt((design.rowwise() - mean).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(rows, 1))), 1e-12);
        Eigen::MatrixXd w1(design.cols(), static_cast<Eigen::Index>(hidden_units));
        for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = normal(rng) / spread;
        const Eigen::RowVectorXd b1 = -mean * w1;
        Eigen::MatrixXd h = design * w1;
        h.rowwise() += b1;
        design = h.array().tanh().matrix();
        out.layer_sizes.push_back(hidden_units);
        out.weights.push_back(w1);
        out.biases.push_back(b1);
    }
    const LinearReadout lin = fit_linear_readout(design, targets, regularization, true);
    out.layer_sizes.push_back(n_classes);
    out.weights.push_back(lin.weights);
    out.biases.push_back(lin.bias);
    return out;
}

std::vector<NeuronId> select_readout_neurons(const NetworkGraph& graph, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("readout: fraction must lie in (0, 1]");
    const auto scores = betweenness_scores(graph);
    std::vector<std::size_t> order(graph.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto nodes = graph.nodes();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return nodes[a].id < nodes[b].id;
    });
    const double raw = std::floor(fraction * static_cast<double>(graph.size()) + 1e-9);
    const std::size_t k = std::min(graph.size(), std::max<std::size_t>(1, static_cast<std::size_t>(raw)));
    std::vector<NeuronId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(nodes[order[i]].id);
    return out;
}

}  // namespace hetsnn
