#include "hetsnn/lyapunov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hetsnn {

RateSystem RateSystem::linear(const Eigen::MatrixXd& a, Eigen::VectorXd b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw InputError("linear rate system: shape mismatch");
    RateSystem s;
    s.kind = Kind::linear;
    s.coupling = a.sparseView(0.0, 0.0);
    s.tau = Eigen::VectorXd::Ones(b.size());
    s.bias = std::move(b);
    return s;
}

RateSystem RateSystem::network(Eigen::SparseMatrix<double, Eigen::RowMajor> w, Eigen::VectorXd tau, Eigen::VectorXd b) {
    if (w.rows() != w.cols() || w.rows() != b.size() || tau.size() != b.size()) {
        throw InputError("network rate system: shape mismatch");
    }
    if ((tau.array() <= 0.0).any()) throw ConfigError("lnp: rate time constants must be positive");
    RateSystem s;
    s.kind = Kind::network;
    s.coupling = std::move(w);
    s.tau = std::move(tau);
    s.bias = std::move(b);
    return s;
}

Eigen::VectorXd RateSystem::rhs(const Eigen::VectorXd& x) const {
    if (kind == Kind::linear) return coupling * x + bias;
    const Eigen::VectorXd drive = coupling * x.array().tanh().matrix() + bias;
    return ((drive - x).array() / tau.array()).matrix();
}

Eigen::VectorXd RateSystem::rk4(const Eigen::VectorXd& x, double h) const {
    const Eigen::VectorXd k1 = rhs(x);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

RateSystem rate_system_from_model(const Model& model, double gain, double drive) {
    const auto& g = model.graph;
    const auto n = static_cast<Eigen::Index>(g.size());
    std::vector<Eigen::Triplet<double>> trips;
    const auto idx = g.edge_indices();
    for (std::size_t e = 0; e < idx.size(); ++e) {
        trips.emplace_back(static_cast<Eigen::Index>(idx[e].second), static_cast<Eigen::Index>(idx[e].first),
                           gain * g.edges()[e].w);
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> w(n, n);
    w.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd tau(n);
    for (Eigen::Index i = 0; i < n; ++i) tau[i] = model.neurons[static_cast<std::size_t>(i)].tau_m;
    return RateSystem::network(std::move(w), std::move(tau), Eigen::VectorXd::Constant(n, drive));
}

void LyapunovOptions::validate() const {
    if (!(horizon > 0.0) || !(step > 0.0) || !(renorm_interval > 0.0)) {
        throw ConfigError("lnp: Lyapunov horizon, step and renormalization interval must be positive");
    }
    if (washout < 0.0) throw ConfigError("lnp: washout must be non-negative");
    if (n_perturbations == 0) throw ConfigError("lnp: n_perturbations must be positive");
    if (!(delta0 > 0.0)) throw ConfigError("lnp: delta0 must be positive");
}

NodeLyapunov estimate_node_lyapunov(const RateSystem& system, const LyapunovOptions& options, std::uint64_t seed) {
    options.validate();
    const Eigen::Index n = system.size();
    const auto n_steps = static_cast<std::size_t>(std::llround(options.horizon / options.step));
    const auto per_renorm = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.renorm_interval / options.step)));
    const auto washout_steps = static_cast<std::size_t>(std::llround(options.washout / options.step));
    const double h = options.step;
    const double horizon = h * static_cast<double>(n_steps);

    NodeLyapunov out;
    out.horizon = horizon;
    out.exponent.assign(static_cast<std::size_t>(n), 0.0);
    bool failed = false;

    for (std::size_t rep = 0; rep < options.n_perturbations; ++rep) {
        // Reference trajectory, shared by all nodes of this replica.
        Rng rng = make_rng(seed, 61 + rep);
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = system.kind == RateSystem::Kind::linear ? 0.0 : 0.1 * (uniform01(rng) - 0.5);
        for (std::size_t s = 0; s < washout_steps; ++s) x = system.rk4(x, h);
        std::vector<Eigen::VectorXd> reference;
        reference.reserve(n_steps + 1);
        reference.push_back(x);
        for (std::size_t s = 0; s < n_steps; ++s) reference.push_back(system.rk4(reference.back(), h));

#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
            delta[i] = options.delta0;
            double log_growth = 0.0;
            for (std::size_t s = 0; s < n_steps; ++s) {
                delta = system.rk4(reference[s] + delta, h) - reference[s + 1];
                if ((s + 1) % per_renorm == 0 || s + 1 == n_steps) {
                    const double norm = delta.norm();
                    if (!std::isfinite(norm) || norm <= 0.0) {
#pragma omp atomic write
                        failed = true;
                        break;
                    }
                    log_growth += std::log(norm / options.delta0);
                    delta *= options.delta0 / norm;
                }
            }
            out.exponent[static_cast<std::size_t>(i)] += log_growth / horizon;
        }
        if (failed) throw NumericError("node Lyapunov estimate: perturbation left the representable range");
    }
    for (double& e : out.exponent) e /= static_cast<double>(options.n_perturbations);
    return out;
}

double max_real_eigenvalue(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw InputError("eigenvalues need a square matrix");
    if (a.rows() == 0) throw InputError("eigenvalues of an empty matrix");
    const Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
    return es.eigenvalues().real().maxCoeff();
}

}  // namespace hetsnn
