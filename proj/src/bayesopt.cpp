#include "hetsnn/bayesopt.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hetsnn {

const QuadratureRule& gauss_legendre_512() {
    static const QuadratureRule rule = [] {
        // Boost stores the non-negative half of the symmetric rule on [-1, 1].
        using Rule = boost::math::quadrature::gauss<double, 512>;
        const auto& x = Rule::abscissa();
        const auto& w = Rule::weights();
        QuadratureRule r;
        for (std::size_t i = x.size(); i-- > 0;) {
            r.nodes.push_back(0.5 * (1.0 - x[i]));
            r.weights.push_back(0.5 * w[i]);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.nodes.push_back(0.5 * (1.0 + x[i]));
            r.weights.push_back(0.5 * w[i]);
        }
        return r;
    }();
    return rule;
}

double wasserstein_1d(const GammaSpec& p, const GammaSpec& q) {
    if (p.degenerate() && q.degenerate()) return std::abs(p.mean() - q.mean());
    if (p == q) return 0.0;
    const auto& rule = gauss_legendre_512();
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * std::abs(p.quantile(rule.nodes[i]) - q.quantile(rule.nodes[i]));
    }
    return acc;
}

namespace {

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double sinkhorn_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double epsilon, std::size_t max_iterations,
                         double tolerance) {
    if (x.rows() == 0 || y.rows() == 0 || x.cols() != y.cols()) throw InputError("sinkhorn: incompatible clouds");
    if (!(epsilon > 0.0)) throw ConfigError("sinkhorn: epsilon must be positive");
    const Eigen::Index n = x.rows();
    const Eigen::Index m = y.rows();
    Eigen::MatrixXd c(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) c(i, j) = (x.row(i) - y.row(j)).cwiseAbs().sum();
    }
    const double log_a = -std::log(static_cast<double>(n));
    const double log_b = -std::log(static_cast<double>(m));
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd tmp_n(n);
    Eigen::VectorXd tmp_m(m);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
            tmp_m = (g - c.row(i).transpose()) / epsilon;
            f[i] = epsilon * (log_a - log_sum_exp(tmp_m));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            tmp_n = (f - c.col(j)) / epsilon;
            g[j] = epsilon * (log_b - log_sum_exp(tmp_n));
        }
        // After the g update columns are exact; check the row marginals.
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            tmp_m = (f[i] + g.array() - c.row(i).transpose().array()) / epsilon;
            err += std::abs(std::exp(log_sum_exp(tmp_m)) - std::exp(log_a));
        }
        if (err < tolerance) break;
    }
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) cost += std::exp((f[i] + g[j] - c(i, j)) / epsilon) * c(i, j);
    }
    if (!std::isfinite(cost)) throw NumericError("sinkhorn produced a non-finite cost");
    return cost;
}

double set_distance(const ParamDistributionSet& x, const ParamDistributionSet& y, SetDistanceMode mode,
                    const SinkhornOptions& sinkhorn, std::uint64_t seed) {
    if (mode == SetDistanceMode::marginal_sum) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) acc += wasserstein_1d(x[k], y[k]);
        return acc;
    }
    if (x == y) return 0.0;
    if (sinkhorn.samples == 0) throw ConfigError("bo: sinkhorn samples must be positive");
    const auto n = static_cast<Eigen::Index>(sinkhorn.samples);
    const auto d = static_cast<Eigen::Index>(ParamDistributionSet::count);
    Eigen::MatrixXd cx(n, d);
    Eigen::MatrixXd cy(n, d);
    Rng rx = make_rng(seed, 101);
    Rng ry = make_rng(seed, 102);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
            cx(i, k) = x[static_cast<std::size_t>(k)].sample(rx);
            cy(i, k) = y[static_cast<std::size_t>(k)].sample(ry);
        }
    }
    return sinkhorn_distance(cx, cy, sinkhorn.epsilon, sinkhorn.max_iterations, sinkhorn.tolerance);
}

void KernelHyper::validate() const {
    if (!(variance > 0.0) || !(length_scale > 0.0) || !(smoothness > 0.0)) {
        throw ConfigError("bo: kernel variance, length scale and smoothness must be positive");
    }
}

double matern(double w, const KernelHyper& hyper) {
    if (w < 0.0) throw InputError("matern: negative distance");
    if (w == 0.0) return hyper.variance;
    const double rho = hyper.smoothness;
    const double s = std::sqrt(2.0 * rho) * w / hyper.length_scale;
    if (rho == 0.5) return hyper.variance * std::exp(-s);
    if (rho == 1.5) return hyper.variance * (1.0 + s) * std::exp(-s);
    if (rho == 2.5) return hyper.variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    if (s > 700.0) return 0.0;
    const double coef = std::pow(2.0, 1.0 - rho) / std::tgamma(rho);
    return hyper.variance * coef * std::pow(s, rho) * boost::math::cyl_bessel_k(rho, s);
}

double matern_w_kernel(const ParamDistributionSet& x, const ParamDistributionSet& y, const KernelHyper& hyper) {
    hyper.validate();
    return matern(set_distance(x, y), hyper);
}

GpState gp_fit(const Eigen::MatrixXd& distances, const Eigen::VectorXd& values, const KernelHyper& hyper,
               double jitter) {
    hyper.validate();
    if (values.size() == 0) throw InputError("gp_fit needs at least one observation");
    if (distances.rows() != values.size() || distances.cols() != values.size()) throw InputError("gp_fit: shape mismatch");
    if (!(jitter > 0.0)) throw ConfigError("bo: jitter must be positive");
    const Eigen::Index n = values.size();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = matern(distances(i, j), hyper);
    }
    GpState s;
    s.hyper = hyper;
    for (double jit = jitter; jit <= 1e-2 * hyper.variance * (1.0 + 1e-12); jit *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jit;
        s.chol.compute(kj);
        if (s.chol.info() == Eigen::Success) {
            s.jitter = jit;
            s.alpha = s.chol.solve(values);
            return s;
        }
    }
    // Matern kernels over an L1-type distance can be indefinite for
    // clustered points; fall back to the nearest PSD matrix.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    if (eig.info() == Eigen::Success) {
        const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
        Eigen::MatrixXd kp = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        kp = 0.5 * (kp + kp.transpose());
        kp.diagonal().array() += 1e-2 * hyper.variance;
        s.chol.compute(kp);
        if (s.chol.info() == Eigen::Success) {
            s.jitter = 1e-2 * hyper.variance;
            s.projected = true;
            s.alpha = s.chol.solve(values);
            return s;
        }
    }
    throw NumericError("GP Gram matrix is not positive definite after jitter escalation");
}

GpPrediction gp_predict(const GpState& state, const Eigen::VectorXd& distances) {
    if (distances.size() != state.alpha.size()) throw InputError("gp_predict: distance vector size mismatch");
    Eigen::VectorXd kq(distances.size());
    for (Eigen::Index i = 0; i < distances.size(); ++i) kq[i] = matern(distances[i], state.hyper);
    const Eigen::VectorXd v = state.chol.matrixL().solve(kq);
    GpPrediction p;
    p.mean = kq.dot(state.alpha);
    p.std = std::sqrt(std::max(state.hyper.variance - v.squaredNorm(), 0.0));
    return p;
}

Eigen::MatrixXd distance_matrix(std::span<const ParamDistributionSet> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            d(i, j) = d(j, i) = set_distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
        }
    }
    return d;
}

Eigen::VectorXd distances_to(std::span<const ParamDistributionSet> points, const ParamDistributionSet& query) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) d[static_cast<Eigen::Index>(i)] = set_distance(points[i], query);
    return d;
}

double expected_improvement(double mean, double std, double f_best) {
    if (std < 0.0) throw InputError("expected_improvement: negative std");
    const double diff = mean - f_best;
    if (std == 0.0) return std::max(diff, 0.0);
    const double z = diff / std;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(diff * cdf + std * pdf, 0.0);
}

void BoSpace::validate() const {
    if (lower.empty() || lower.size() != upper.size()) throw ConfigError("bo: bounds must be non-empty and matched");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw ConfigError("bo: each lower bound must be below its upper bound");
    }
    if (!embed) throw ConfigError("bo: search space has no embedding");
}

BoSpace euclidean_box(std::vector<double> lower, std::vector<double> upper) {
    BoSpace s;
    s.embed_weights.assign(lower.size(), 1.0);
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    s.embed = [](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); };
    return s;
}

void BoConfig::validate() const {
    if (budget < 5) throw ConfigError("bo: budget must be at least 5");
    if (n_init == 0) throw ConfigError("bo: n_init must be positive");
    if (n_candidates == 0) throw ConfigError("bo: n_candidates must be positive");
    if (!(jitter > 0.0)) throw ConfigError("bo: jitter must be positive");
    if (!(local_fraction >= 0.0 && local_fraction <= 1.0)) throw ConfigError("bo: local_fraction must lie in [0, 1]");
    if (!(local_scale > 0.0)) throw ConfigError("bo: local_scale must be positive");
    if (!(hyper.variance > 0.0) || !(hyper.smoothness > 0.0)) throw ConfigError("bo: kernel variance and smoothness must be positive");
}

namespace {

double embedded_distance(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += w[k] * std::abs(a[k] - b[k]);
    return acc;
}

}  // namespace

BoResult bo_loop(const std::function<double(std::span<const double>)>& objective, const BoSpace& space,
                 const BoConfig& config, std::uint64_t seed) {
    space.validate();
    config.validate();
    const std::size_t dim = space.dim();
    Rng rng = make_rng(seed, 91);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> embeds;
    std::vector<double> ys;
    std::vector<bool> oks;
    BoResult result;
    result.best_value = -std::numeric_limits<double>::infinity();

    auto clip = [&](std::vector<double>& x) {
        for (std::size_t d = 0; d < dim; ++d) x[d] = std::clamp(x[d], space.lower[d], space.upper[d]);
    };
    auto evaluate = [&](std::vector<double> x) {
        double value = std::numeric_limits<double>::quiet_NaN();
        bool ok = true;
        try {
            value = objective(x);
            ok = std::isfinite(value);
        } catch (const std::exception&) {
            ok = false;
        }
        BoTraceEntry entry;
        entry.iter = result.trace.size();
        entry.x = x;
        entry.value = value;
        entry.ok = ok;
        if (ok && value > result.best_value) {
            result.best_value = value;
            result.best_x = x;
        }
        entry.best_so_far = result.best_value;
        result.trace.push_back(entry);
        embeds.push_back(space.embed(x));
        xs.push_back(std::move(x));
        ys.push_back(value);
        oks.push_back(ok);
    };

    // Initial design: the given start point, then a Latin hypercube.
    const std::size_t n0 = std::min(config.n_init, config.budget);
    std::vector<std::vector<double>> design;
    if (config.initial_point) {
        if (config.initial_point->size() != dim) throw ConfigError("bo: initial point has the wrong dimension");
        design.push_back(*config.initial_point);
        clip(design.back());
    }
    const std::size_t n_lhs = n0 - design.size();
    std::vector<std::vector<std::size_t>> strata(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        strata[d].resize(n_lhs);
        std::iota(strata[d].begin(), strata[d].end(), 0);
        std::shuffle(strata[d].begin(), strata[d].end(), rng);
    }
    for (std::size_t i = 0; i < n_lhs; ++i) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double u = (static_cast<double>(strata[d][i]) + uniform01(rng)) / static_cast<double>(n_lhs);
            x[d] = space.lower[d] + u * (space.upper[d] - space.lower[d]);
        }
        design.push_back(std::move(x));
    }
    for (auto& x : design) evaluate(std::move(x));

    KernelHyper hyper = config.hyper;
    if (!(hyper.length_scale > 0.0)) {
        std::vector<double> pair;
        for (std::size_t i = 0; i < embeds.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) pair.push_back(embedded_distance(embeds[i], embeds[j], space.embed_weights));
        }
        double median = 0.0;
        if (!pair.empty()) {
            std::nth_element(pair.begin(), pair.begin() + static_cast<std::ptrdiff_t>(pair.size() / 2), pair.end());
            median = pair[pair.size() / 2];
        }
        hyper.length_scale = median > 0.0 ? median : 1.0;
    }

    while (result.trace.size() < config.budget) {
        std::vector<std::size_t> good;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (oks[i]) good.push_back(i);
        }
        if (good.empty()) {
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d) x[d] = space.lower[d] + uniform01(rng) * (space.upper[d] - space.lower[d]);
            evaluate(std::move(x));
            continue;
        }
        const auto ng = static_cast<Eigen::Index>(good.size());
        Eigen::VectorXd y(ng);
        for (Eigen::Index i = 0; i < ng; ++i) y[i] = ys[good[static_cast<std::size_t>(i)]];
        const double mu = y.mean();
        double sd = std::sqrt((y.array() - mu).square().sum() / static_cast<double>(ng));
        if (!(sd > 0.0)) sd = 1.0;
        const Eigen::VectorXd ys_std = (y.array() - mu) / sd;
        Eigen::MatrixXd dmat = Eigen::MatrixXd::Zero(ng, ng);
        for (Eigen::Index i = 0; i < ng; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                dmat(i, j) = dmat(j, i) = embedded_distance(embeds[good[static_cast<std::size_t>(i)]],
                                                            embeds[good[static_cast<std::size_t>(j)]], space.embed_weights);
            }
        }
        const GpState gp = gp_fit(dmat, ys_std, hyper, config.jitter);
        const double f_best = ys_std.maxCoeff();

        std::vector<std::size_t> incumbents(good.size());
        std::iota(incumbents.begin(), incumbents.end(), 0);
        std::stable_sort(incumbents.begin(), incumbents.end(),
                         [&](std::size_t a, std::size_t b) { return ys_std[static_cast<Eigen::Index>(a)] > ys_std[static_cast<Eigen::Index>(b)]; });
        incumbents.resize(std::min<std::size_t>(3, incumbents.size()));

        const auto n_local = static_cast<std::size_t>(std::llround(config.local_fraction * static_cast<double>(config.n_candidates)));
        std::vector<double> best_candidate;
        double best_ei = -1.0;
        Eigen::VectorXd dq(ng);
        for (std::size_t c = 0; c < config.n_candidates; ++c) {
            std::vector<double> x(dim);
            if (c < n_local) {
                const auto& base = xs[good[incumbents[c % incumbents.size()]]];
                for (std::size_t d = 0; d < dim; ++d) {
                    x[d] = base[d] + config.local_scale * (space.upper[d] - space.lower[d]) * normal(rng);
                }
                clip(x);
            } else {
                for (std::size_t d = 0; d < dim; ++d) x[d] = space.lower[d] + uniform01(rng) * (space.upper[d] - space.lower[d]);
            }
            const auto e = space.embed(x);
            for (Eigen::Index i = 0; i < ng; ++i) dq[i] = embedded_distance(e, embeds[good[static_cast<std::size_t>(i)]], space.embed_weights);
            const GpPrediction pred = gp_predict(gp, dq);
            const double ei = expected_improvement(pred.mean, pred.std, f_best);
            if (ei > best_ei) {
                best_ei = ei;
                best_candidate = std::move(x);
            }
        }
        evaluate(std::move(best_candidate));
    }
    if (result.best_x.empty()) throw NumericError("every Bayesian-optimization evaluation failed");
    return result;
}

DistributionBounds DistributionBounds::around(const ParamDistributionSet& center) {
    DistributionBounds b;
    for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) {
        const double theta = center[k].degenerate() ? center[k].mean() : center[k].scale();
        b.shape[k] = {1.0, 12.0};
        b.scale[k] = {theta / 3.0, theta * 3.0};
    }
    return b;
}

ParamDistributionSet decode_distribution_set(std::span<const double> x) {
    if (x.size() != 2 * ParamDistributionSet::count) throw InputError("distribution coordinates have the wrong size");
    ParamDistributionSet s;
    for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) s[k] = GammaSpec::gamma(x[2 * k], x[2 * k + 1]);
    return s;
}

std::vector<double> encode_distribution_set(const ParamDistributionSet& set) {
    std::vector<double> x;
    for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) {
        if (set[k].degenerate()) throw ConfigError("bo: point masses cannot be encoded as gamma coordinates");
        x.push_back(set[k].shape());
        x.push_back(set[k].scale());
    }
    return x;
}

namespace {

// log Q_k(u_i) for unit scale on a log-spaced shape grid.
struct QuantileTable {
    static constexpr double k_lo = 0.5;
    static constexpr double k_hi = 64.0;
    static constexpr std::size_t n_grid = 400;
    double log_lo = std::log(k_lo);
    double step = (std::log(k_hi) - std::log(k_lo)) / static_cast<double>(n_grid - 1);
    std::vector<std::vector<double>> log_q;

    QuantileTable() {
        const auto& rule = gauss_legendre_512();
        log_q.resize(n_grid);
        for (std::size_t g = 0; g < n_grid; ++g) {
            const double k = std::exp(log_lo + step * static_cast<double>(g));
            log_q[g].resize(rule.nodes.size());
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                log_q[g][i] = std::log(boost::math::gamma_p_inv(k, rule.nodes[i]));
            }
        }
    }

    static const QuantileTable& instance() {
        static const QuantileTable table;
        return table;
    }
};

}  // namespace

void tabulated_gamma_quantiles(double shape, double scale, std::span<double> out) {
    const auto& rule = gauss_legendre_512();
    if (out.size() != rule.nodes.size()) throw InputError("quantile buffer must have 512 entries");
    if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("gamma shape and scale must be positive");
    if (shape < QuantileTable::k_lo || shape > QuantileTable::k_hi) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * boost::math::gamma_p_inv(shape, rule.nodes[i]);
        return;
    }
    const auto& t = QuantileTable::instance();
    const double pos = (std::log(shape) - t.log_lo) / t.step;
    // Four-point Lagrange stencil kept inside the grid.
    auto base = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    base = std::clamp<std::ptrdiff_t>(base, 0, static_cast<std::ptrdiff_t>(QuantileTable::n_grid) - 4);
    double w[4];
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a != b) l *= (pos - static_cast<double>(base + b)) / static_cast<double>(a - b);
        }
        w[a] = l;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += w[a] * t.log_q[static_cast<std::size_t>(base + a)][i];
        out[i] = scale * std::exp(v);
    }
}

BoSpace distribution_space(const DistributionBounds& bounds) {
    BoSpace s;
    for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) {
        s.lower.push_back(bounds.shape[k].first);
        s.upper.push_back(bounds.shape[k].second);
        s.lower.push_back(bounds.scale[k].first);
        s.upper.push_back(bounds.scale[k].second);
    }
    const auto& rule = gauss_legendre_512();
    for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) {
        s.embed_weights.insert(s.embed_weights.end(), rule.weights.begin(), rule.weights.end());
    }
    s.embed = [](std::span<const double> x) {
        const std::size_t q = gauss_legendre_512().nodes.size();
        std::vector<double> e(ParamDistributionSet::count * q);
        for (std::size_t k = 0; k < ParamDistributionSet::count; ++k) {
            tabulated_gamma_quantiles(x[2 * k], x[2 * k + 1], std::span<double>(e.data() + k * q, q));
        }
        return e;
    };
    return s;
}

DistributionBoResult bo_distributions(const std::function<double(const ParamDistributionSet&)>& objective,
                                      const DistributionBounds& bounds, BoConfig config, std::uint64_t seed,
                                      std::optional<ParamDistributionSet> initial) {
    if (!config.initial_point) {
        config.initial_point = encode_distribution_set(initial.value_or(ParamDistributionSet::bio_defaults()));
    }
    DistributionBoResult out;
    out.raw = bo_loop([&](std::span<const double> x) { return objective(decode_distribution_set(x)); },
                      distribution_space(bounds), config, seed);
    out.best = decode_distribution_set(out.raw.best_x);
    return out;
}

}  // namespace hetsnn
