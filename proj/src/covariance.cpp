#include "hetsnn/covariance.hpp"

#include "hetsnn/common.hpp"

#include <Eigen/Eigenvalues>

#include <complex>

namespace hetsnn {

namespace {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Solves T Y + Y T^H = C for upper-triangular T, last column first.
CMatrix solve_triangular_lyapunov(const CMatrix& t, const CMatrix& c) {
    const Eigen::Index n = t.rows();
    CMatrix y = CMatrix::Zero(n, n);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        Eigen::VectorXcd rhs = c.col(k);
        for (Eigen::Index j = k + 1; j < n; ++j) rhs -= std::conj(t(k, j)) * y.col(j);
        CMatrix m = t;
        m.diagonal().array() += std::conj(t(k, k));
        y.col(k) = m.triangularView<Eigen::Upper>().solve(rhs);
    }
    return y;
}

Eigen::MatrixXd solve_from_schur(const Eigen::ComplexSchur<Eigen::MatrixXd>& schur, double shift,
                                 const Eigen::MatrixXd& c) {
    const CMatrix& u = schur.matrixU();
    CMatrix t = schur.matrixT();
    t.diagonal().array() -= shift;
    const CMatrix ct = u.adjoint() * c.cast<Complex>() * u;
    const CMatrix y = solve_triangular_lyapunov(t, ct);
    Eigen::MatrixXd x = (u * y * u.adjoint()).real();
    x = 0.5 * (x + x.transpose()).eval();
    if (!x.allFinite()) throw NumericError("Lyapunov solve produced non-finite values");
    return x;
}

Eigen::ComplexSchur<Eigen::MatrixXd> schur_of(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InputError("Lyapunov solve needs a non-empty square matrix");
    if (!a.allFinite()) throw NumericError("Lyapunov solve: matrix has non-finite entries");
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
    if (schur.info() != Eigen::Success) throw NumericError("complex Schur decomposition did not converge");
    return schur;
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    return solve_from_schur(schur_of(a), 0.0, c);
}

StationaryCovariance stationary_covariance(const Eigen::MatrixXd& a, double noise_sigma, double margin) {
    if (!(noise_sigma > 0.0)) throw ConfigError("lnp: noise sigma must be positive");
    if (!(margin > 0.0)) throw ConfigError("lnp: stabilizing margin must be positive");
    const auto schur = schur_of(a);
    const double max_re = schur.matrixT().diagonal().real().maxCoeff();
    StationaryCovariance out;
    if (max_re >= 0.0) out.shift_applied = max_re + margin;
    const Eigen::Index n = a.rows();
    out.sigma = solve_from_schur(schur, out.shift_applied,
                                 -noise_sigma * noise_sigma * Eigen::MatrixXd::Identity(n, n));
    return out;
}

}  // namespace hetsnn
