#pragma once

// Rate-space dynamics and finite-time node Lyapunov exponents.

#include "hetsnn/simulator.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <vector>

namespace hetsnn {

/// Either dx/dt = A x + b (linear), or tau_i dx_i/dt = -x_i + sum_j W_ij
/// tanh(x_j) + b_i (network). Time is in ms for network models.
struct RateSystem {
    enum class Kind { linear, network };

    Kind kind = Kind::linear;
    /// A for linear systems, W for network systems.
    Eigen::SparseMatrix<double, Eigen::RowMajor> coupling;
    Eigen::VectorXd tau;
    Eigen::VectorXd bias;

    static RateSystem linear(const Eigen::MatrixXd& a, Eigen::VectorXd b);
    static RateSystem network(Eigen::SparseMatrix<double, Eigen::RowMajor> w, Eigen::VectorXd tau, Eigen::VectorXd b);

    Eigen::Index size() const { return bias.size(); }
    Eigen::VectorXd rhs(const Eigen::VectorXd& x) const;
    /// One classical Runge-Kutta step.
    Eigen::VectorXd rk4(const Eigen::VectorXd& x, double h) const;
};

/// Network rate model with W_ij = gain * w(j -> i), tau from the neurons and
/// a uniform drive b.
RateSystem rate_system_from_model(const Model& model, double gain, double drive);

struct LyapunovOptions {
    double horizon = 100.0;
    double step = 0.5;
    double renorm_interval = 10.0;
    /// Settling time of the reference trajectory before measuring.
    double washout = 20.0;
    std::size_t n_perturbations = 1;
    double delta0 = 1e-6;

    void validate() const;
};

struct NodeLyapunov {
    /// Aligned with the system's state indices.
    std::vector<double> exponent;
    double horizon = 0.0;
    std::string method = "twin-trajectory";
};

/// For each node i, a twin trajectory displaced by delta0 along e_i is run
/// next to the reference; the log growth of the full separation is summed
/// over renormalization intervals and divided by the horizon, then averaged
/// over n_perturbations reference starts.
NodeLyapunov estimate_node_lyapunov(const RateSystem& system, const LyapunovOptions& options, std::uint64_t seed);

/// Largest real part of the eigenvalues of a square matrix.
double max_real_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace hetsnn
