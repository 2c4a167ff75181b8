#pragma once

// Stationary covariance of a linear system driven by white noise.

#include <Eigen/Dense>

namespace hetsnn {

struct StationaryCovariance {
    Eigen::MatrixXd sigma;
    /// Amount s by which A - s I was shifted to make it Hurwitz (0 if none).
    double shift_applied = 0.0;
};

/// Solves A S + S A^T + sigma^2 I = 0 by Bartels-Stewart on the complex
/// Schur form. A non-Hurwitz A is replaced by A - (max Re(eig) + margin) I
/// for this solve only.
StationaryCovariance stationary_covariance(const Eigen::MatrixXd& a, double noise_sigma, double margin = 0.01);

/// Solves A X + X A^T = C for a Hurwitz A (general right-hand side).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

}  // namespace hetsnn
