#include "hetsnn/bayesopt.hpp"

#include "../support/fixtures.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace hetsnn;

TEST_CASE("one-dimensional Wasserstein distance") {
    const GammaSpec p = GammaSpec::gamma(2.0, 1.0), q = GammaSpec::gamma(2.0, 3.0);
    CHECK(wasserstein_1d(p, p) == 0.0);
    CHECK(wasserstein_1d(GammaSpec::point_mass(2.0), GammaSpec::point_mass(5.5)) == doctest::Approx(3.5).epsilon(1e-12));

    // Paired sorted samples of both laws.
    Rng rng(1);
    std::gamma_distribution<double> gp(2.0, 1.0), gq(2.0, 3.0);
    const std::size_t n = 1000000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = gp(rng);
        b[i] = gq(rng);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double mc = 0.0;
    for (std::size_t i = 0; i < n; ++i) mc += std::abs(a[i] - b[i]);
    mc /= static_cast<double>(n);
    CHECK(wasserstein_1d(p, q) == doctest::Approx(mc).epsilon(0.01));
    // Stochastically ordered laws: W1 is the difference of means. The
    // fixed rule loses a few 1e-6 on the unbounded quantile tail.
    CHECK(wasserstein_1d(p, q) == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("set distance") {
    const ParamDistributionSet x = ParamDistributionSet::bio_defaults();
    CHECK(set_distance(x, x) == 0.0);
    ParamDistributionSet y = x;
    y[ParamDistributionSet::tau_plus] = GammaSpec::gamma(6.0, 5.0);
    CHECK(set_distance(x, y) == doctest::Approx(wasserstein_1d(x[ParamDistributionSet::tau_plus], y[ParamDistributionSet::tau_plus])).epsilon(1e-14));

    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const auto a = fixtures::random_distribution_set(rng), b = fixtures::random_distribution_set(rng),
                   c = fixtures::random_distribution_set(rng);
        CHECK(set_distance(a, c) <= set_distance(a, b) + set_distance(b, c) + 1e-12);
        CHECK(set_distance(a, b) > 0.0);
        CHECK(set_distance(a, b) == set_distance(b, a));
    }
}

TEST_CASE("Sinkhorn cost approaches the exact assignment") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 3 + trial % 4;
        Eigen::MatrixXd x(n, 2), y(n, 2);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x.data()[k] = 4.0 * uniform01(rng);
            y.data()[k] = 4.0 * uniform01(rng);
        }
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        double exact = 1e300;
        do {
            double c = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) c += (x.row(i) - y.row(perm[i])).cwiseAbs().sum();
            exact = std::min(exact, c / static_cast<double>(n));
        } while (std::next_permutation(perm.begin(), perm.end()));
        const double s = sinkhorn_distance(x, y, 0.05);
        CHECK(s >= exact * (1.0 - 1e-6));
        CHECK(s <= 1.05 * exact);
    }
}

TEST_CASE("Matern kernel") {
    const KernelHyper h{2.0, 1.3, 0.5};
    CHECK(matern(0.0, h) == 2.0);
    CHECK(matern(0.7, h) == doctest::Approx(2.0 * std::exp(-0.7 / 1.3)).epsilon(1e-14));
    // General smoothness agrees with the half-integer closed forms.
    for (double nu : {0.5, 1.5, 2.5}) {
        for (double w : {0.1, 0.8, 2.0}) {
            const double s = std::sqrt(2.0 * nu) * w / 1.3;
            const double general = 2.0 * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(s, nu) *
                                   boost::math::cyl_bessel_k(nu, s);
            CHECK(matern(w, KernelHyper{2.0, 1.3, nu}) == doctest::Approx(general).epsilon(1e-10));
            CHECK(matern(w, KernelHyper{2.0, 1.3, nu + 1e-9}) == doctest::Approx(general).epsilon(1e-6));
        }
    }
    const ParamDistributionSet x = ParamDistributionSet::bio_defaults();
    CHECK(matern_w_kernel(x, x, h) == 2.0);
    Rng rng(4);
    const auto a = fixtures::random_distribution_set(rng), b = fixtures::random_distribution_set(rng);
    CHECK(matern_w_kernel(a, b, h) == matern_w_kernel(b, a, h));
}

// Exponential smoothness: PSD is guaranteed on L1-type metrics such as W1.
TEST_CASE("Gram matrices of random distribution sets are PSD") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<ParamDistributionSet> pts;
        for (int i = 0; i < 10; ++i) pts.push_back(fixtures::random_distribution_set(rng));
        const Eigen::MatrixXd k = fixtures::matern_gram(pts, 0.5);
        CHECK(k == k.transpose());
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("GP regression") {
    const KernelHyper h{2.0, 1.5, 0.5};
    // Points at 0, 1 and 3 on a line.
    const std::vector<double> xs{0.0, 1.0, 3.0};
    Eigen::MatrixXd d(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
    Eigen::VectorXd y(3);
    y << 0.5, -1.0, 2.0;

    SUBCASE("closed-form conditionals") {
        const double jit = 1e-8;
        const GpState s = gp_fit(d, y, h, jit);
        // Explicit cofactor inverse of K + jitter I.
        double k[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) k[i][j] = 2.0 * std::exp(-d(i, j) / 1.5) + (i == j ? jit : 0.0);
        const double det = k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1]) -
                           k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0]) +
                           k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]);
        double inv[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                inv[i][j] = (k[r0][c0] * k[r1][c1] - k[r0][c1] * k[r1][c0]) / det;
            }
        for (double q : {2.0, 0.4, 5.0}) {
            double ks[3];
            Eigen::VectorXd dq(3);
            for (int i = 0; i < 3; ++i) {
                dq[i] = std::abs(q - xs[i]);
                ks[i] = 2.0 * std::exp(-dq[i] / 1.5);
            }
            double mean = 0.0, quad = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    mean += ks[i] * inv[i][j] * y[j];
                    quad += ks[i] * inv[i][j] * ks[j];
                }
            const GpPrediction p = gp_predict(s, dq);
            CHECK(std::abs(p.mean - mean) <= 1e-9);
            CHECK(std::abs(p.std - std::sqrt(2.0 - quad)) <= 1e-9);
        }
    }
    SUBCASE("interpolation and prior limit") {
        const GpState s = gp_fit(d, y, h, 1e-8);
        for (int i = 0; i < 3; ++i) {
            const GpPrediction p = gp_predict(s, d.col(i));
            CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-6));
            CHECK(p.std * p.std <= 10.0 * s.jitter);
        }
        const GpPrediction far = gp_predict(s, Eigen::VectorXd::Constant(3, 1e6));
        CHECK(std::abs(far.mean) <= 1e-12);
        CHECK(far.std == doctest::Approx(std::sqrt(2.0)));
    }
}

TEST_CASE("expected improvement") {
    CHECK(expected_improvement(0.5, 0.0, 0.8) == 0.0);
    CHECK(expected_improvement(0.8, 0.0, 0.8) == 0.0);
    CHECK(expected_improvement(1.1, 0.0, 0.8) == doctest::Approx(0.3));

    Rng rng(7);
    std::normal_distribution<double> g(1.0, 0.5);
    const std::size_t n = 10000000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::max(g(rng) - 0.8, 0.0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(expected_improvement(1.0, 0.5, 0.8) - mean) <= 3.0 * se);

    double previous = 0.0;
    for (double s = 0.0; s <= 3.0; s += 0.25) {
        const double ei = expected_improvement(1.0, s, 0.8);
        CHECK(ei >= previous);
        previous = ei;
    }
    for (double m : {-2.0, 0.0, 0.5}) CHECK(expected_improvement(m, 0.3, 1.0) >= 0.0);
}

TEST_CASE("BO loop") {
    const BoSpace box = euclidean_box({0.0, 0.0}, {1.0, 1.0});
    SUBCASE("constant objective") {
        BoConfig c;
        c.budget = 12;
        const BoResult r = bo_loop([](std::span<const double>) { return 1.0; }, box, c, 3);
        CHECK(r.trace.size() == 12);
        CHECK(r.best_x == r.trace.front().x);
        for (const auto& e : r.trace) CHECK(e.best_so_far == 1.0);
    }
    SUBCASE("same seed, same trace; failures are skipped") {
        BoConfig c;
        c.budget = 15;
        auto f = [](std::span<const double> x) {
            if (x[0] > 0.9) throw NumericError("fails");
            return -(x[0] - 0.3) * (x[0] - 0.3) - (x[1] - 0.6) * (x[1] - 0.6);
        };
        const BoResult a = bo_loop(f, box, c, 9), b = bo_loop(f, box, c, 9);
        REQUIRE(a.trace.size() == b.trace.size());
        double running = -1e300;
        for (std::size_t i = 0; i < a.trace.size(); ++i) {
            CHECK(a.trace[i].x == b.trace[i].x);
            CHECK(a.trace[i].value == b.trace[i].value);
            if (a.trace[i].ok) running = std::max(running, a.trace[i].value);
            CHECK(a.trace[i].best_so_far == running);
        }
    }
    SUBCASE("minimal budget") {
        BoConfig c;
        c.budget = 5;
        CHECK(bo_loop([](std::span<const double> x) { return x[0]; }, box, c, 1).trace.size() == 5);
        c.budget = 4;
        CHECK_THROWS_AS(bo_loop([](std::span<const double> x) { return x[0]; }, box, c, 1), ConfigError);
    }
}

TEST_CASE("distribution encoding round trip") {
    const ParamDistributionSet x = ParamDistributionSet::bio_defaults();
    CHECK(decode_distribution_set(encode_distribution_set(x)) == x);
    std::vector<double> q(512);
    tabulated_gamma_quantiles(3.7, 2.1, q);
    const auto& rule = gauss_legendre_512();
    const GammaSpec g = GammaSpec::gamma(3.7, 2.1);
    for (std::size_t i = 0; i < 512; i += 37) CHECK(q[i] == doctest::Approx(g.quantile(rule.nodes[i])).epsilon(1e-7));
}
