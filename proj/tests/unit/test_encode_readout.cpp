#include "hetsnn/encoding.hpp"
#include "hetsnn/readout.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace hetsnn;

TEST_CASE("rate encoding") {
    RateEncoderConfig cfg;
    cfg.max_rate = 100.0;
    cfg.window = 10.0;

    SUBCASE("silent signal") {
        CHECK(rate_encode(Eigen::MatrixXd::Zero(50, 2), cfg, 0.25, 1).total() == 0);
    }
    SUBCASE("Poisson count at full rate") {
        const SpikeTrains t = rate_encode(Eigen::MatrixXd::Ones(1000, 1), cfg, 0.25, 2);
        CHECK(t.duration() == doctest::Approx(10000.0));
        CHECK(std::abs(static_cast<double>(t.total()) - 1000.0) <= 3.0 * std::sqrt(1000.0));
    }
    SUBCASE("seeded reproducibility") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Constant(40, 3, 0.5);
        const SpikeTrains a = rate_encode(s, cfg, 0.25, 7), b = rate_encode(s, cfg, 0.25, 7);
        CHECK(a.active == b.active);
        CHECK(rate_encode(s, cfg, 0.25, 8).active != a.active);
    }
    SUBCASE("values outside the unit interval") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Constant(3, 1, 0.5);
        s(1, 0) = 1.2;
        CHECK_THROWS_AS(rate_encode(s, cfg, 0.25, 1), InputError);
        s(1, 0) = -0.1;
        CHECK_THROWS_AS(rate_encode(s, cfg, 0.25, 1), InputError);
    }
    SUBCASE("encoders per channel") {
        cfg.encoders_per_channel = 3;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(200, 2);
        s.col(1).setOnes();
        const SpikeTrains t = rate_encode(s, cfg, 0.25, 3);
        CHECK(t.n_channels == 6);
        const auto c = t.counts();
        CHECK(c[0] + c[1] + c[2] == 0);
        CHECK(c[3] > 0);
        CHECK(c[5] > 0);
    }
}

TEST_CASE("temporal difference splits ON and OFF halves") {
    Eigen::MatrixXd s(4, 1);
    s << 0.2, 0.5, 0.1, 0.1;
    const Eigen::MatrixXd d = temporal_difference(s);
    REQUIRE(d.cols() == 2);
    CHECK(d.row(0).isZero());
    CHECK(d(1, 0) == doctest::Approx(0.3));
    CHECK(d(1, 1) == 0.0);
    CHECK(d(2, 0) == 0.0);
    CHECK(d(2, 1) == doctest::Approx(0.4));
    CHECK(d.row(3).isZero());
}

TEST_CASE("feature extraction") {
    const std::vector<NeuronId> ids{NeuronId{0}, NeuronId{1}};
    const std::vector<double> ts{0.0, 10.0, 20.0, 45.0};

    SUBCASE("no spikes") {
        const auto f = extract_features(SpikeRecord::from_spikes({}, 50.0, ids), ids, 20.0, ts);
        CHECK(f.values.isZero());
    }
    SUBCASE("single spike decays by e after one filter constant") {
        const auto rec = SpikeRecord::from_spikes({{NeuronId{0}, 0.0}}, 50.0, ids);
        const auto f = extract_features(rec, ids, 20.0, ts);
        CHECK(f.values(0, 0) == doctest::Approx(1.0));
        CHECK(f.values(2, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    }
    SUBCASE("direct summation and linearity in the record") {
        Rng rng(3);
        std::vector<Spike> a, b;
        for (int k = 0; k < 40; ++k) {
            const Spike s{NeuronId{static_cast<std::uint32_t>(k % 2)}, 50.0 * uniform01(rng)};
            (k < 20 ? a : b).push_back(s);
        }
        std::vector<Spike> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        auto sorted = [](std::vector<Spike> v) {
            std::sort(v.begin(), v.end(), [](const Spike& x, const Spike& y) {
                return x.time != y.time ? x.time < y.time : x.neuron < y.neuron;
            });
            return v;
        };
        const auto fa = extract_features(SpikeRecord::from_spikes(sorted(a), 50.0, ids), ids, 20.0, ts);
        const auto fb = extract_features(SpikeRecord::from_spikes(sorted(b), 50.0, ids), ids, 20.0, ts);
        const auto fab = extract_features(SpikeRecord::from_spikes(sorted(ab), 50.0, ids), ids, 20.0, ts);
        for (std::size_t r = 0; r < ts.size(); ++r)
            for (std::size_t c = 0; c < 2; ++c) {
                double direct = 0.0;
                for (const Spike& s : ab)
                    if (s.neuron.value == c && s.time <= ts[r]) direct += std::exp(-(ts[r] - s.time) / 20.0);
                CHECK(fab.values(r, c) == doctest::Approx(direct).epsilon(1e-12));
                CHECK(fab.values(r, c) == doctest::Approx(fa.values(r, c) + fb.values(r, c)).epsilon(1e-12));
            }
    }
    SUBCASE("unknown neuron") {
        const std::vector<NeuronId> bad{NeuronId{9}};
        CHECK_THROWS(extract_features(SpikeRecord::from_spikes({}, 50.0, ids), bad, 20.0, ts));
    }
}

TEST_CASE("ridge readout") {
    SUBCASE("normal-equations oracle on a 5x3 fixture") {
        Eigen::MatrixXd x(5, 3);
        x << 1, 2, 0.5, -1, 0.3, 2, 0.7, -0.2, 1.1, 2.2, 1.5, -0.4, 0.1, 0.9, 0.8;
        Eigen::VectorXd y(5);
        y << 1.0, -0.5, 0.3, 2.0, 0.7;
        const double reg = 0.37;
        const Eigen::VectorXd oracle =
            (x.transpose() * x + reg * Eigen::MatrixXd::Identity(3, 3)).inverse() * x.transpose() * y;
        const LinearReadout r = fit_linear_readout(x, y, reg);
        for (int k = 0; k < 3; ++k) CHECK(r.weights(k, 0) == doctest::Approx(oracle(k)).epsilon(1e-9));
        const Eigen::VectorXd resid =
            (x.transpose() * x + reg * Eigen::MatrixXd::Identity(3, 3)) * r.weights.col(0) - x.transpose() * y;
        CHECK(resid.norm() <= 1e-8 * (x.transpose() * y).norm());
    }
    SUBCASE("exact interpolation without regularization") {
        Rng rng(1);
        Eigen::MatrixXd x(30, 4);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform01(rng);
        Eigen::VectorXd w(4);
        w << 1.0, -2.0, 0.5, 3.0;
        const Eigen::VectorXd y = x * w;
        const LinearReadout r = fit_linear_readout(x, y, 0.0);
        CHECK((r.predict(x) - y).norm() <= 1e-8 * y.norm());
    }
    SUBCASE("shrinkage limit") {
        Rng rng(2);
        Eigen::MatrixXd x(20, 3);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform01(rng);
        const Eigen::VectorXd y = x.col(0) - x.col(2);
        const double free = fit_linear_readout(x, y, 0.0).weights.norm();
        CHECK(fit_linear_readout(x, y, 1e9).weights.norm() <= 1e-6 * free);
    }
    SUBCASE("intercept is not penalized and multi-target solver agrees") {
        Rng rng(4);
        Eigen::MatrixXd x(40, 3);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform01(rng);
        Eigen::MatrixXd y(40, 2);
        y.col(0) = x.col(0) * 2.0 + Eigen::VectorXd::Constant(40, 5.0);
        y.col(1) = x.col(1) - x.col(2);
        const LinearReadout a = fit_linear_readout(x, y, 1e-3, true);
        const LinearReadout b = RidgeSolver(x, 1e-3, true).solve(y);
        CHECK((a.weights - b.weights).norm() <= 1e-10);
        CHECK((a.bias - b.bias).norm() <= 1e-10);
        CHECK(a.bias(0) == doctest::Approx(5.0).epsilon(1e-2));
    }
    SUBCASE("too few rows") {
        CHECK_THROWS(fit_linear_readout(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1), 0.1));
    }
}

TEST_CASE("readout neuron selection") {
    const NetworkGraph path = fixtures::digraph(3, {{0, 1}, {1, 2}});
    CHECK(select_readout_neurons(path, 1.0).size() == 3);
    CHECK(select_readout_neurons(path, 0.34) == std::vector<NeuronId>{NeuronId{1}});

    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkGraph g = fixtures::random_digraph(15, 0.2, rng);
        const auto scores = betweenness_scores(g);
        std::vector<std::size_t> order(g.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a] != scores[b] ? scores[a] > scores[b] : g.nodes()[a].id < g.nodes()[b].id;
        });
        const double fraction = 0.1 + 0.04 * trial;
        const auto got = select_readout_neurons(g, fraction);
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * 15)));
        REQUIRE(got.size() == k);
        for (std::size_t i = 0; i < k; ++i) CHECK(got[i] == g.nodes()[order[i]].id);
        // Input order does not matter: rebuild from reversed edge and node lists.
        std::vector<Node> nodes(g.nodes().begin(), g.nodes().end());
        std::vector<Edge> edges(g.edges().begin(), g.edges().end());
        std::reverse(nodes.begin(), nodes.end());
        std::reverse(edges.begin(), edges.end());
        CHECK(select_readout_neurons(NetworkGraph(nodes, edges, {}, 0), fraction) == got);
    }
}

TEST_CASE("classifier separates orthogonal patterns") {
    StateFeatures f;
    f.neurons = {NeuronId{0}, NeuronId{1}, NeuronId{2}, NeuronId{3}};
    f.values = Eigen::MatrixXd::Zero(20, 4);
    std::vector<std::size_t> labels(20);
    Rng rng(6);
    for (int r = 0; r < 20; ++r) {
        labels[r] = r % 2;
        f.values(r, labels[r] * 2) = 1.0 + 0.1 * uniform01(rng);
        f.values(r, labels[r] * 2 + 1) = 1.0 + 0.1 * uniform01(rng);
    }
    for (std::size_t hidden : {std::size_t{0}, std::size_t{20}}) {
        const ReadoutLayer c = fit_classifier(f, labels, 2, 1e-3, hidden, 1);
        CHECK(c.classify(f.values) == labels);
        CHECK(c.layer_sizes.size() == (hidden ? 3u : 2u));
    }
}
