#pragma once

// Bayesian optimization over parameter distributions: Wasserstein and
// Sinkhorn distances, the Matern kernel on the Wasserstein metric, a GP
// surrogate and expected improvement.

#include "hetsnn/distributions.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hetsnn {

/// Gauss-Legendre rule mapped to [0, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// 512-point rule, nodes ascending.
const QuadratureRule& gauss_legendre_512();

/// W1 between two gamma (or point-mass) laws by quadrature of the quantile
/// difference.
double wasserstein_1d(const GammaSpec& p, const GammaSpec& q);

enum class SetDistanceMode { marginal_sum, sinkhorn };

struct SinkhornOptions {
    /// Entropic regularization in cost units.
    double epsilon = 0.05;
    /// Samples drawn from each product distribution.
    std::size_t samples = 64;
    std::size_t max_iterations = 5000;
    double tolerance = 1e-10;
};

/// Entropic OT cost <P, C> between uniform clouds (rows are points) under
/// the L1 ground metric, solved in the log domain.
double sinkhorn_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double epsilon,
                         std::size_t max_iterations = 5000, double tolerance = 1e-10);

/// Sum of the marginal W1 distances, or Sinkhorn on seeded samples.
double set_distance(const ParamDistributionSet& x, const ParamDistributionSet& y,
                    SetDistanceMode mode = SetDistanceMode::marginal_sum, const SinkhornOptions& sinkhorn = {},
                    std::uint64_t seed = 0);

struct KernelHyper {
    double variance = 1.0;
    double length_scale = 1.0;
    /// 1/2 keeps the kernel positive definite on W1, an L1-type metric;
    /// larger values can give indefinite Gram matrices there.
    double smoothness = 0.5;

    void validate() const;
};

/// Matern covariance of a distance w.
double matern(double w, const KernelHyper& hyper);
double matern_w_kernel(const ParamDistributionSet& x, const ParamDistributionSet& y, const KernelHyper& hyper);

struct GpState {
    KernelHyper hyper;
    /// Jitter actually used after escalation.
    double jitter = 1e-8;
    /// Set when the Gram matrix had to be projected onto the PSD cone.
    bool projected = false;
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd alpha;
};

/// Zero-mean GP regression from pairwise distances. Jitter grows tenfold up
/// to 1e-2 * variance until the Gram matrix factors; if it still does not,
/// negative eigenvalues are clipped to zero before the last attempt.
GpState gp_fit(const Eigen::MatrixXd& distances, const Eigen::VectorXd& values, const KernelHyper& hyper,
               double jitter = 1e-8);

struct GpPrediction {
    double mean = 0.0;
    double std = 0.0;
};

/// `distances` holds the query's distance to every observed point.
GpPrediction gp_predict(const GpState& state, const Eigen::VectorXd& distances);

Eigen::MatrixXd distance_matrix(std::span<const ParamDistributionSet> points);
Eigen::VectorXd distances_to(std::span<const ParamDistributionSet> points, const ParamDistributionSet& query);

/// Expected improvement of a maximization problem.
double expected_improvement(double mean, double std, double f_best);

/// Box search space. Points are compared through an embedding: the
/// distance is sum_k weight_k |e_k(x) - e_k(y)|.
struct BoSpace {
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<std::vector<double>(std::span<const double>)> embed;
    std::vector<double> embed_weights;

    std::size_t dim() const { return lower.size(); }
    void validate() const;
};

/// Plain box with the L1 distance on coordinates.
BoSpace euclidean_box(std::vector<double> lower, std::vector<double> upper);

struct BoConfig {
    std::size_t budget = 50;
    std::size_t n_init = 8;
    std::size_t n_candidates = 1024;
    /// A non-positive length scale is replaced by the median pairwise
    /// distance of the initial design.
    KernelHyper hyper{1.0, 0.0, 0.5};
    double jitter = 1e-8;
    /// Share of candidates drawn around the incumbents instead of uniformly.
    double local_fraction = 0.5;
    /// Perturbation scale relative to the box width.
    double local_scale = 0.1;
    /// First point of the initial design.
    std::optional<std::vector<double>> initial_point;

    void validate() const;
};

struct BoTraceEntry {
    std::size_t iter = 0;
    std::vector<double> x;
    double value = 0.0;
    bool ok = true;
    double best_so_far = 0.0;
};

struct BoResult {
    std::vector<double> best_x;
    double best_value = 0.0;
    std::vector<BoTraceEntry> trace;
};

/// Maximizes `objective`. A throw or non-finite value marks the evaluation
/// as failed; it is kept in the trace but not in the surrogate.
BoResult bo_loop(const std::function<double(std::span<const double>)>& objective, const BoSpace& space,
                 const BoConfig& config, std::uint64_t seed);

/// Bounds on (shape, scale) per marginal of a ParamDistributionSet.
struct DistributionBounds {
    std::array<std::pair<double, double>, ParamDistributionSet::count> shape;
    std::array<std::pair<double, double>, ParamDistributionSet::count> scale;

    /// Shapes in [1, 12] and scales from a third to three times the
    /// biological defaults.
    static DistributionBounds around(const ParamDistributionSet& center);
};

/// Coordinates are (k_0, theta_0, k_1, theta_1, ...).
ParamDistributionSet decode_distribution_set(std::span<const double> x);
std::vector<double> encode_distribution_set(const ParamDistributionSet& set);

/// Space whose distance is the marginal-sum W1. Quantiles come from a
/// shape-interpolated table (relative error below 1e-7).
BoSpace distribution_space(const DistributionBounds& bounds);

struct DistributionBoResult {
    ParamDistributionSet best;
    BoResult raw;
};

/// bo_loop over distribution sets, starting from `initial` (the biological
/// defaults when unset).
DistributionBoResult bo_distributions(const std::function<double(const ParamDistributionSet&)>& objective,
                                      const DistributionBounds& bounds, BoConfig config, std::uint64_t seed,
                                      std::optional<ParamDistributionSet> initial = std::nullopt);

/// Quantiles of Gamma(k, theta) at the 512-point rule's nodes, from the
/// interpolation table.
void tabulated_gamma_quantiles(double shape, double scale, std::span<double> out);

}  // namespace hetsnn
