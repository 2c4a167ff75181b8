#include "hetsnn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hetsnn {

void ChaoticConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("data: dt must be positive");
    if (washout >= n_steps) throw ConfigError("data: washout must be smaller than n_steps");
    if (system == ChaoticSystem::lorenz96) {
        if (lorenz96.k < 4) throw ConfigError("data: lorenz96 needs k >= 4");
        if (lorenz96.two_scale && lorenz96.j < 3) throw ConfigError("data: two-scale lorenz96 needs j >= 3");
        if (lorenz96.two_scale && !(lorenz96.b != 0.0)) throw ConfigError("data: lorenz96 b must be non-zero");
    }
    if (initial && static_cast<std::size_t>(initial->size()) != state_dim()) {
        throw ConfigError("data: initial state has the wrong dimension");
    }
}

std::size_t ChaoticConfig::state_dim() const {
    switch (system) {
        case ChaoticSystem::lorenz63:
        case ChaoticSystem::rossler:
            return 3;
        case ChaoticSystem::lorenz96:
            return lorenz96.two_scale ? lorenz96.k * (1 + lorenz96.j) : lorenz96.k;
    }
    return 0;
}

Eigen::VectorXd lorenz63_rhs(const Eigen::VectorXd& s, const Lorenz63Params& p) {
    Eigen::VectorXd d(3);
    d[0] = p.sigma * (s[1] - s[0]);
    d[1] = s[0] * (p.rho - s[2]) - s[1];
    d[2] = s[0] * s[1] - p.beta * s[2];
    return d;
}

Eigen::VectorXd lorenz96_rhs(const Eigen::VectorXd& s, const Lorenz96Params& p) {
    const auto k = static_cast<Eigen::Index>(p.k);
    Eigen::VectorXd d(s.size());
    auto x = [&](Eigen::Index i) { return s[((i % k) + k) % k]; };
    for (Eigen::Index i = 0; i < k; ++i) d[i] = (x(i + 1) - x(i - 2)) * x(i - 1) - x(i) + p.forcing;
    if (!p.two_scale) return d;
    // Fast variables Y_{j,i} stored after the slow block, ring of length k*j.
    const auto n = static_cast<Eigen::Index>(p.k * p.j);
    auto y = [&](Eigen::Index m) { return s[k + ((m % n) + n) % n]; };
    const double coupling = p.h * p.c / p.b;
    for (Eigen::Index i = 0; i < k; ++i) {
        double sum = 0.0;
        for (Eigen::Index jj = 0; jj < static_cast<Eigen::Index>(p.j); ++jj) sum += y(i * static_cast<Eigen::Index>(p.j) + jj);
        d[i] -= coupling * sum;
    }
    for (Eigen::Index m = 0; m < n; ++m) {
        const Eigen::Index slow = m / static_cast<Eigen::Index>(p.j);
        d[k + m] = -p.c * p.b * y(m + 1) * (y(m + 2) - y(m - 1)) - p.c * y(m) + coupling * s[slow];
    }
    return d;
}

Eigen::VectorXd rossler_rhs(const Eigen::VectorXd& s, const RosslerParams& p) {
    Eigen::VectorXd d(3);
    d[0] = -s[1] - s[2];
    d[1] = s[0] + p.a * s[1];
    d[2] = p.b + s[2] * (s[0] - p.c);
    return d;
}

Eigen::VectorXd initial_state(const ChaoticConfig& config) {
    if (config.initial) return *config.initial;
    Rng rng = make_rng(config.seed, 121);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto dim = static_cast<Eigen::Index>(config.state_dim());
    Eigen::VectorXd s(dim);
    switch (config.system) {
        case ChaoticSystem::lorenz63:
            s << 1.0, 1.0, 1.0;
            break;
        case ChaoticSystem::rossler:
            s << 1.0, 1.0, 0.0;
            break;
        case ChaoticSystem::lorenz96:
            s.setZero();
            s.head(static_cast<Eigen::Index>(config.lorenz96.k)).setConstant(config.lorenz96.forcing);
            break;
    }
    for (Eigen::Index i = 0; i < dim; ++i) s[i] += 0.1 * normal(rng);
    return s;
}

namespace {

TimeSeries integrate(const ChaoticConfig& config, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                     Eigen::Index kept_dim) {
    config.validate();
    Eigen::VectorXd s = initial_state(config);
    const double h = config.dt;
    TimeSeries out;
    out.dt = h;
    out.values.resize(static_cast<Eigen::Index>(config.n_steps - config.washout), kept_dim);
    for (std::size_t step = 0; step < config.n_steps; ++step) {
        const Eigen::VectorXd k1 = f(s);
        const Eigen::VectorXd k2 = f(s + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(s + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!s.allFinite()) throw NumericError("chaotic integration produced a non-finite state");
        if (step >= config.washout) out.values.row(static_cast<Eigen::Index>(step - config.washout)) = s.head(kept_dim).transpose();
    }
    return out;
}

}  // namespace

TimeSeries generate_lorenz63(const ChaoticConfig& config) {
    ChaoticConfig c = config;
    c.system = ChaoticSystem::lorenz63;
    return integrate(c, [&](const Eigen::VectorXd& s) { return lorenz63_rhs(s, c.lorenz63); }, 3);
}

TimeSeries generate_lorenz96(const ChaoticConfig& config) {
    ChaoticConfig c = config;
    c.system = ChaoticSystem::lorenz96;
    return integrate(c, [&](const Eigen::VectorXd& s) { return lorenz96_rhs(s, c.lorenz96); },
                     static_cast<Eigen::Index>(c.lorenz96.k));
}

TimeSeries generate_rossler(const ChaoticConfig& config) {
    ChaoticConfig c = config;
    c.system = ChaoticSystem::rossler;
    return integrate(c, [&](const Eigen::VectorXd& s) { return rossler_rhs(s, c.rossler); }, 3);
}

TimeSeries generate_series(const ChaoticConfig& config) {
    switch (config.system) {
        case ChaoticSystem::lorenz63:
            return generate_lorenz63(config);
        case ChaoticSystem::lorenz96:
            return generate_lorenz96(config);
        case ChaoticSystem::rossler:
            return generate_rossler(config);
    }
    throw ConfigError("data: unknown system");
}

Eigen::MatrixXd NormalizedSeries::denormalize(const Eigen::MatrixXd& centered) const {
    return centered.rowwise() + mean;
}

NormalizedSeries normalize_series(const Eigen::MatrixXd& series) {
    if (series.rows() < 2) throw InputError("normalize_series needs at least 2 samples");
    NormalizedSeries out;
    out.mean = series.colwise().mean();
    out.values = series.rowwise() - out.mean;
    for (Eigen::Index c = 0; c < series.cols(); ++c) {
        const double s = std::sqrt(out.values.col(c).squaredNorm() / static_cast<double>(series.rows()));
        if (!(s > 0.0)) throw InputError("normalize_series: zero-variance dimension");
        out.sigma.push_back(s);
    }
    return out;
}

void SyntheticClassTask::validate() const {
    if (n_classes < 2) throw ConfigError("data: need at least two classes");
    if (n_channels == 0 || n_samples == 0) throw ConfigError("data: channels and samples must be positive");
    if (noise < 0.0) throw ConfigError("data: noise must be non-negative");
    if (trials_per_class == 0) throw ConfigError("data: trials_per_class must be positive");
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw ConfigError("data: train_fraction must lie in [0, 1]");
    if (!templates.empty()) {
        if (templates.size() != n_classes) throw ConfigError("data: one template per class is required");
        for (const auto& t : templates) {
            if (static_cast<std::size_t>(t.rows()) != n_samples || static_cast<std::size_t>(t.cols()) != n_channels) {
                throw ConfigError("data: template shape mismatch");
            }
            if (t.minCoeff() < 0.0 || t.maxCoeff() > 1.0) throw ConfigError("data: templates must lie in [0, 1]");
        }
    }
}

ClassificationData make_classification_task(const SyntheticClassTask& spec, std::uint64_t seed) {
    spec.validate();
    ClassificationData d;
    Rng rng = make_rng(seed, 131);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto rows = static_cast<Eigen::Index>(spec.n_samples);
    const auto cols = static_cast<Eigen::Index>(spec.n_channels);
    d.templates = spec.templates;
    if (d.templates.empty()) {
        for (std::size_t c = 0; c < spec.n_classes; ++c) {
            Eigen::MatrixXd t(rows, cols);
            for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform01(rng);
            d.templates.push_back(std::move(t));
        }
    }
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(spec.trials_per_class) + 1e-9));
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        for (std::size_t t = 0; t < spec.trials_per_class; ++t) {
            Eigen::MatrixXd x = d.templates[c];
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                x.data()[i] = std::clamp(x.data()[i] + spec.noise * normal(rng), 0.0, 1.0);
            }
            (t < n_train ? d.train : d.test).push_back(d.inputs.size());
            d.inputs.push_back(std::move(x));
            d.labels.push_back(c);
        }
    }
    return d;
}

}  // namespace hetsnn
