#include "hetsnn/experiment.hpp"
#include "hetsnn/lnp.hpp"
#include "hetsnn/snapshot.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace hetsnn;

namespace {

// Largest Lyapunov exponent of dx/dt = A x by QR re-orthonormalization of
// the tangent flow (RK4 on the tangent vectors).
Eigen::VectorXd qr_spectrum(const Eigen::MatrixXd& a, double horizon, double h) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    const auto steps = static_cast<int>(horizon / h);
    for (int s = 0; s < steps; ++s) {
        const Eigen::MatrixXd k1 = a * q, k2 = a * (q + 0.5 * h * k1), k3 = a * (q + 0.5 * h * k2),
                              k4 = a * (q + h * k3);
        q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        Eigen::MatrixXd qq = qr.householderQ();
        for (Eigen::Index i = 0; i < n; ++i) {
            acc[i] += std::log(std::abs(r(i, i)));
            if (r(i, i) < 0.0) qq.col(i) *= -1.0;
        }
        q = qq;
    }
    return acc / (steps * h);
}

Model small_model(std::size_t n, std::uint64_t seed) {
    ExperimentConfig c;
    c.topology.n_total = n;
    std::size_t side = 1;
    while (side * side * side < n) ++side;
    c.topology.lattice_shape = {side, side, side};
    return build_model(c, seed);
}

}  // namespace

TEST_CASE("node exponents of linear fixtures") {
    LyapunovOptions o;
    o.horizon = 200.0;
    o.step = 0.05;
    SUBCASE("decoupled decay") {
        const auto r = estimate_node_lyapunov(RateSystem::linear(-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)), o, 1);
        CHECK(r.exponent[0] == doctest::Approx(-1.0).epsilon(0.05));
    }
    SUBCASE("no dynamics") {
        const auto r = estimate_node_lyapunov(RateSystem::linear(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3)), o, 1);
        for (double e : r.exponent) CHECK(std::abs(e) <= 0.01);
    }
    SUBCASE("coupled 3-node system against the QR spectrum") {
        Eigen::MatrixXd a(3, 3);
        a << -0.6, 0.3, 0.1, 0.2, -0.9, 0.4, -0.1, 0.5, -1.2;
        const auto r = estimate_node_lyapunov(RateSystem::linear(a, Eigen::VectorXd::Zero(3)), o, 1);
        const Eigen::VectorXd spectrum = qr_spectrum(a, 200.0, 0.01);
        CHECK(spectrum[0] == doctest::Approx(max_real_eigenvalue(a)).epsilon(0.01));
        for (double e : r.exponent) CHECK(std::abs(e - spectrum[0]) <= 0.1);
    }
}

TEST_CASE("shifted harmonic mean and pooled Lyapunov matrix") {
    CHECK(shifted_harmonic_mean(std::vector<double>{0.4, 0.4, 0.4}) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(std::abs(shifted_harmonic_mean(std::vector<double>{1.0, 1.0 / 3.0}) - 0.5) <= 1e-6);
    CHECK(shifted_harmonic_mean(std::vector<double>{-2.0, -2.0}) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK_THROWS(shifted_harmonic_mean(std::vector<double>{}));

    Rng rng(10);
    const NetworkGraph g = fixtures::random_digraph(10, 0.25, rng);
    std::vector<double> lam(10);
    for (auto& v : lam) v = uniform01(rng) * 2.0 - 1.0;
    const auto lm = build_lyapunov_matrix(g, lam);
    // Oracle: enumerate every node, test adjacency in either direction.
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const std::size_t i = g.index(g.edges()[e].src), j = g.index(g.edges()[e].dst);
        std::vector<double> pool;
        for (std::size_t endpoint : {i, j})
            for (std::size_t k = 0; k < 10; ++k) {
                const NeuronId a = g.nodes()[endpoint].id, b = g.nodes()[k].id;
                if (k != endpoint && (g.has_edge(a, b) || g.has_edge(b, a))) pool.push_back(lam[k]);
            }
        CHECK(lm.pool_size[e] == pool.size());
        double inv = 0.0, sum = 0.0;
        for (double v : pool) {
            inv += 1.0 / (std::abs(v) + 1e-6);
            sum += v;
        }
        const double mag = std::max(pool.size() / inv - 1e-6, 0.0);
        CHECK(lm.entries[e] == doctest::Approx(sum < 0.0 ? -mag : mag).epsilon(1e-12));
    }
}

TEST_CASE("stationary covariance") {
    const auto r = stationary_covariance(-Eigen::MatrixXd::Identity(4, 4), 1.0);
    CHECK((r.sigma - 0.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(r.shift_applied == 0.0);

    Eigen::VectorXd d(3);
    d << 0.5, 2.0, 3.0;
    const auto rd = stationary_covariance(Eigen::MatrixXd((-d).asDiagonal()), 1.5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(rd.sigma(i, j) - (i == j ? 2.25 / (2.0 * d[i]) : 0.0)) <= 1e-10);

    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd a = fixtures::random_stable(6, rng);
        const auto s = stationary_covariance(a, 0.7);
        CHECK((s.sigma - fixtures::kronecker_lyapunov(a, 0.7)).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((s.sigma - s.sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.sigma).eigenvalues().minCoeff() >= -1e-10);
    }

    // Unstable input is shifted for the solve only.
    Eigen::MatrixXd unstable = Eigen::MatrixXd::Identity(2, 2) * 0.3;
    const auto su = stationary_covariance(unstable, 1.0);
    CHECK(su.shift_applied == doctest::Approx(0.31));
    CHECK(su.sigma.allFinite());
}

TEST_CASE("keep probabilities and sparsification") {
    Eigen::MatrixXd a(2, 2);
    a << -1.0, 1.0, 0.0, -1.0;
    const Eigen::MatrixXd p = keep_probabilities(a, Eigen::MatrixXd::Identity(2, 2), 0.25);
    CHECK(p(0, 1) == doctest::Approx(0.5));
    CHECK(p(0, 0) == 1.0);
    CHECK(p(1, 0) == 0.0);

    Rng rng(1);
    const Eigen::MatrixXd big = fixtures::random_stable(8, rng);
    const Eigen::MatrixXd sigma = stationary_covariance(big, 1.0).sigma;
    CHECK(prune_synapses(big, sigma, 1e12, 1e-3, DiagonalMode::retain, 3) == big);

    // Diagonal perturbation: A_ii - Delta_i with Delta_i the change in off-diagonal row mass.
    const Eigen::MatrixXd probs = keep_probabilities(big, sigma, 0.3);
    Rng draw(5);
    const Eigen::MatrixXd s = sparsify(big, probs, DiagonalMode::perturb, draw);
    for (Eigen::Index i = 0; i < 8; ++i) {
        double delta = 0.0;
        for (Eigen::Index j = 0; j < 8; ++j)
            if (j != i) delta += std::abs(s(i, j)) - std::abs(big(i, j));
        CHECK(s(i, i) == doctest::Approx(big(i, i) - delta).epsilon(1e-12));
    }
}

TEST_CASE("sparsification is unbiased") {
    Rng rng(2);
    const Eigen::MatrixXd a = fixtures::random_stable(5, rng);
    const Eigen::MatrixXd p = keep_probabilities(a, stationary_covariance(a, 1.0).sigma, 0.2, 0.05);
    const int draws = 20000;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5), sq = Eigen::MatrixXd::Zero(5, 5);
    Rng d(7);
    for (int k = 0; k < draws; ++k) {
        const Eigen::MatrixXd s = sparsify(a, p, DiagonalMode::retain, d);
        sum += s;
        sq += s.cwiseProduct(s);
    }
    const Eigen::MatrixXd mean = sum / draws;
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) {
            const double var = std::max(sq(i, j) / draws - mean(i, j) * mean(i, j), 0.0);
            CHECK(std::abs(mean(i, j) - a(i, j)) <= 3.0 * std::sqrt(var / draws) + 1e-12);
        }
}

TEST_CASE("centrality node pruning") {
    const NetworkGraph path = fixtures::digraph(3, {{0, 1}, {1, 2}});
    NodeThreshold abs{NodeThreshold::Kind::absolute, 0.5};
    CHECK(nodes_below_threshold(path, abs) == std::vector<NeuronId>{NeuronId{0}, NeuronId{2}});
    CHECK(prune_nodes(path, abs).size() == 1);
    abs.value = -1.0;
    CHECK(prune_nodes(path, abs).size() == 3);
    abs.value = 10.0;
    CHECK_THROWS_AS(prune_nodes(path, abs), InputError);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkGraph g = fixtures::random_digraph(25, 0.12, rng);
        const auto scores = betweenness_scores(g);
        std::vector<std::size_t> order(g.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return scores[x] != scores[y] ? scores[x] < scores[y] : g.nodes()[x].id < g.nodes()[y].id;
        });
        std::vector<NeuronId> expect;
        for (std::size_t k = 0; k < 2; ++k) expect.push_back(g.nodes()[order[k]].id);
        std::sort(expect.begin(), expect.end());
        CHECK(nodes_below_threshold(g, {NodeThreshold::Kind::quantile, 0.1}) == expect);
        const NetworkGraph h = prune_nodes(g, {NodeThreshold::Kind::quantile, 0.1});
        CHECK(h.size() == 23);
        for (const Node& n : h.nodes()) CHECK(g.index_of(n.id).has_value());
    }
}

TEST_CASE("delocalizing edges") {
    // Hub 0 with spokes 1..4 (both directions for spoke 1).
    const NetworkGraph hub = fixtures::digraph(5, {{0, 1}, {1, 0}, {0, 2}, {0, 3}, {0, 4}});
    const auto none = delocalize_edges(hub, 0, 1, 2.0);
    CHECK(none.graph.edges().size() == hub.edges().size());
    CHECK(none.added.empty());

    const auto one = delocalize_edges(hub, 1, 1, 2.0);
    REQUIRE(one.added.size() == 1);
    CHECK((one.added[0].src == NeuronId{0} || one.added[0].dst == NeuronId{0}));
    CHECK_FALSE(hub.has_edge(one.added[0].src, one.added[0].dst));
    // Exhaustive scan: no valid candidate gives a larger variance.
    auto deg = hub.total_degrees();
    const auto nbrs = hub.neighbors();
    double best = -1.0;
    for (std::size_t u = 0; u < 5; ++u)
        for (std::size_t v = 0; v < 5; ++v) {
            if (u == v || hub.has_edge(NeuronId{static_cast<std::uint32_t>(u)}, NeuronId{static_cast<std::uint32_t>(v)}))
                continue;
            bool near = false;
            for (std::size_t w : nbrs[v]) {
                near = near || w == u;
                for (std::size_t x : nbrs[w]) near = near || x == u;
            }
            if (!near) continue;
            auto d2 = deg;
            ++d2[u];
            ++d2[v];
            best = std::max(best, degree_variance(d2));
        }
    CHECK(degree_variance(one.graph) == doctest::Approx(best).epsilon(1e-14));

    Rng rng(5);
    const NetworkGraph g = fixtures::random_digraph(20, 0.1, rng);
    const auto many = delocalize_edges(g, 7, 2, 2.0);
    CHECK(many.added.size() + many.shortfall == 7);
    CHECK(many.graph.edges().size() == g.edges().size() + many.added.size());
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const Edge& e : many.added) {
        CHECK_FALSE(g.has_edge(e.src, e.dst));
        CHECK(seen.insert({e.src.value, e.dst.value}).second);
    }
}

TEST_CASE("timescale search") {
    // Toy map lambda_max(theta) = theta - 3.
    const BoResult r = bo_loop([](std::span<const double> x) { return -std::abs(x[0] - 3.0); },
                               euclidean_box({0.0}, {10.0}), BoConfig{.budget = 30}, 4);
    CHECK(r.trace.size() <= 30);
    CHECK(std::abs(r.best_x[0] - 3.0) <= 0.2);

    const Model m = small_model(60, 2);
    std::vector<double> offdiag(m.graph.edges().size(), 0.05);
    CHECK_THROWS_AS(optimize_timescales(m, offdiag, 4, 1), ConfigError);
    const TimescaleResult ts = optimize_timescales(m, offdiag, 6, 1);
    for (const auto& p : ts.model.neurons) {
        CHECK(std::isfinite(p.tau_m));
        CHECK(p.tau_m > 0.0);
    }
    CHECK(std::isfinite(ts.lambda_max));
}

TEST_CASE("LNP iterations") {
    const Model m = small_model(80, 3);
    PruneConfig cfg;
    cfg.iterations = 0;
    const LnpResult none = run_lnp(m, cfg, 1);
    CHECK(none.log.empty());
    CHECK(serialize_model(none.final_model) == serialize_model(m));

    cfg.iterations = 3;
    cfg.timescale_budget = 5;
    const LnpResult r = run_lnp(m, cfg, 1);
    REQUIRE(r.log.size() == 3);
    REQUIRE(r.models.size() == 3);
    std::size_t previous = m.graph.edges().size();
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(r.log[k].iter == k + 1);
        CHECK(r.log[k].n_synapses <= previous + cfg.m_delocalize);
        CHECK(r.log[k].n_neurons == r.models[k].graph.size());
        CHECK(r.log[k].n_synapses == r.models[k].graph.edges().size());
        previous = r.log[k].n_synapses;
        for (const Edge& e : r.models[k].graph.edges())
            if (e.w != 0.0) CHECK(e.w * sign_factor(r.models[k].graph.node(e.src).sign) > 0.0);
    }
    // Outputs depend on (model, config, seed) only.
    const LnpResult again = run_lnp(m, cfg, 1);
    CHECK(serialize_model(again.final_model) == serialize_model(r.final_model));

    std::ostringstream log;
    write_lnp_log(log, r.log);
    std::istringstream lines(log.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        CHECK(line.rfind("{\"iter\":", 0) == 0);
        CHECK(line.find("\"seed\":") != std::string::npos);
        ++count;
    }
    CHECK(count == 3);
}

TEST_CASE("LNP contracts a 100-neuron net below half its density") {
    std::vector<double> ratio;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const Model m = small_model(100, s);
        PruneConfig cfg;
        const LnpResult r = run_lnp(m, cfg, s);
        ratio.push_back(r.final_model.graph.density() / m.graph.density());
    }
    std::nth_element(ratio.begin(), ratio.begin() + 5, ratio.end());
    CHECK(ratio[5] < 0.5);
}

TEST_CASE("activity pruning removes the quietest neurons first") {
    const Model m = small_model(60, 4);
    std::vector<double> rates(m.graph.size());
    for (std::size_t i = 0; i < rates.size(); ++i) rates[i] = static_cast<double>((i * 37) % 60);
    const std::size_t target = m.graph.edges().size() / 2;
    const Model p = activity_prune(m, rates, target);
    CHECK(p.graph.edges().size() <= target);
    double min_kept = 1e300, max_removed = -1.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (p.graph.index_of(m.graph.nodes()[i].id)) min_kept = std::min(min_kept, rates[i]);
        else max_removed = std::max(max_removed, rates[i]);
    }
    CHECK(max_removed <= min_kept);
}
