#include "hetsnn/metrics.hpp"
#include "hetsnn/simulator.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hetsnn;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = uniform01(rng);
    return x;
}

SpikeRecord record_for(const NetworkGraph& g, std::vector<Spike> spikes, double duration) {
    std::vector<NeuronId> ids;
    for (const Node& n : g.nodes()) ids.push_back(n.id);
    return SpikeRecord::from_spikes(std::move(spikes), duration, ids);
}

}  // namespace

TEST_CASE("memory capacity") {
    const std::size_t n = 2000;
    SUBCASE("features holding the one-step delayed input") {
        const auto x = noise(n, 1);
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, 2);
        for (std::size_t t = 1; t < n; ++t) f(t, 0) = x[t - 1];
        const auto r = memory_capacity(f, x, 10);
        CHECK(r.per_delay[0] >= 0.999);
        for (double c : r.per_delay) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
    }
    SUBCASE("independent features stay near zero") {
        double mean_total = 0.0;
        for (int s = 0; s < 20; ++s) {
            const auto x = noise(n, 100 + s);
            Eigen::MatrixXd f(n, 5);
            Rng rng(500 + s);
            for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = uniform01(rng);
            mean_total += memory_capacity(f, x, 100).total;
        }
        CHECK(mean_total / 20.0 <= 0.05 * 100);
    }
    SUBCASE("constant input is rejected") {
        const std::vector<double> x(n, 0.5);
        CHECK_THROWS(memory_capacity(Eigen::MatrixXd::Ones(n, 3), x, 10));
    }
}

TEST_CASE("spike efficiency") {
    SpikeStats s;
    s.s_tilde = 5.0;
    CHECK(spike_efficiency(10.0, s) == 2.0);
    s.s_tilde = 10.0;
    CHECK(spike_efficiency(10.0, s) == 1.0);
    s.s_tilde = 0.0;
    CHECK_THROWS_AS(spike_efficiency(10.0, s), NumericError);
}

TEST_CASE("spike efficiency on a 200-neuron record equals capacity over the mean count") {
    const NetworkGraph g = build_recurrent_graph(TopologyConfig{}, 3);
    Rng rng(4);
    std::vector<Spike> spikes;
    for (int k = 0; k < 3000; ++k)
        spikes.push_back({g.nodes()[static_cast<std::size_t>(uniform01(rng) * 200)].id, k * 0.1});
    const SpikeRecord rec = record_for(g, spikes, 300.0);
    const SpikeStats st = spike_stats(rec);
    double mean = 0.0;
    for (const auto& [id, c] : rec.counts) mean += static_cast<double>(c);
    mean /= 200.0;
    CHECK(st.s_tilde == doctest::Approx(mean).epsilon(1e-14));
    CHECK(spike_efficiency(4.2, st) == doctest::Approx(4.2 / mean).epsilon(1e-14));
}

TEST_CASE("spike count up to the first readout spike") {
    const NetworkGraph g = fixtures::digraph(3, {});
    const SpikeRecord rec = record_for(
        g, {{NeuronId{0}, 1.0}, {NeuronId{1}, 2.0}, {NeuronId{2}, 3.0}, {NeuronId{0}, 4.0}}, 10.0);
    const std::vector<NeuronId> readout{NeuronId{2}};
    const SpikeStats st = spike_stats(rec, readout);
    CHECK(st.counts[0] + st.counts[1] + st.counts[2] == 3);
    CHECK(spike_stats(rec, std::vector<NeuronId>{}).s_tilde == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("effective rank") {
    CHECK(effective_rank(Eigen::MatrixXd::Identity(4, 4)).effective_rank == 4);
    Eigen::VectorXd u(5), v(7);
    u << 1, 2, 3, 4, 5;
    v << 1, -1, 2, 0.5, 0.1, 3, 2;
    CHECK(effective_rank(u * v.transpose()).effective_rank == 1);
    CHECK_THROWS(effective_rank(Eigen::MatrixXd::Zero(3, 3)));

    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd m(10, 20);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform01(rng) - 0.5;
        // Oracle: singular values as square roots of the eigenvalues of M M^T.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose());
        Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
        for (double threshold : {0.5, 0.9, 0.99}) {
            std::size_t k = 0;
            double acc = 0.0;
            while (acc < threshold * sv.sum()) acc += sv[static_cast<Eigen::Index>(k++)];
            const auto r = effective_rank(m, threshold);
            CHECK(r.effective_rank == k);
            CHECK(r.effective_rank <= 10);
        }
    }
}

TEST_CASE("heterogeneity score") {
    CHECK(heterogeneity_score(Eigen::MatrixXd::Ones(10, 2)).value == 0.0);
    CHECK(heterogeneity_score(Eigen::MatrixXd::Ones(2, 3)).degenerate);

    Rng rng(12);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd m(10000, 2);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = gauss(rng);
    const double base = heterogeneity_score(m).value;
    CHECK(base == doctest::Approx(1.0).epsilon(0.1));

    Eigen::MatrixXd scaled = m;
    scaled.col(1) *= 3.0;
    CHECK(heterogeneity_score(scaled).value == doctest::Approx(9.0 * base).epsilon(1e-9));

    Eigen::MatrixXd flipped = m.colwise().reverse();
    CHECK(heterogeneity_score(flipped).value == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("synaptic operation counts") {
    const NetworkGraph parent = fixtures::digraph(3, {{0, 1}, {0, 2}});
    std::vector<Spike> s;
    for (int k = 0; k < 4; ++k) s.push_back({NeuronId{0}, 1.0 + k});
    const SpikeRecord rec = record_for(parent, s, 10.0);

    CHECK(count_sops(record_for(parent, {}, 10.0), parent).total_sops == 0.0);
    CHECK(count_sops(rec, parent).total_sops == 8.0);

    const NetworkGraph pruned = fixtures::digraph(3, {{0, 1}});
    const EnergyReport r = count_sops(rec, pruned, &parent, 2.5);
    CHECK(r.total_sops == 4.0);
    CHECK(r.energy == 10.0);
    CHECK(r.sop_ratio_vs_dense == 2.0);

    // Additive over disjoint records on a fixed graph.
    const SpikeRecord other = record_for(parent, {{NeuronId{1}, 1.0}, {NeuronId{2}, 2.0}, {NeuronId{0}, 9.5}}, 10.0);
    std::vector<Spike> all = rec.spikes;
    all.insert(all.end(), other.spikes.begin(), other.spikes.end());
    std::sort(all.begin(), all.end(), [](const Spike& a, const Spike& b) { return a.time < b.time; });
    CHECK(count_sops(record_for(parent, all, 10.0), parent).total_sops ==
          count_sops(rec, parent).total_sops + count_sops(other, parent).total_sops);
}

TEST_CASE("normalized forecast error") {
    Rng rng(3);
    Eigen::MatrixXd truth(50, 3), fc(50, 3);
    for (Eigen::Index k = 0; k < truth.size(); ++k) {
        truth.data()[k] = uniform01(rng);
        fc.data()[k] = uniform01(rng);
    }
    const std::vector<double> sigma{0.5, 2.0, 1.5};
    for (double e : nrmse(truth, truth, sigma)) CHECK(e == 0.0);

    Eigen::MatrixXd offset = truth;
    for (int c = 0; c < 3; ++c) offset.col(c).array() += sigma[c];
    for (double e : nrmse(offset, truth, sigma)) CHECK(e == doctest::Approx(1.0).epsilon(1e-14));

    const auto got = nrmse(fc, truth, sigma);
    for (Eigen::Index t = 0; t < 50; ++t) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) acc += std::pow((fc(t, c) - truth(t, c)) / sigma[c], 2);
        CHECK(std::abs(got[t] - std::sqrt(acc / 3.0)) <= 1e-12);
    }
    CHECK_THROWS(nrmse(fc, truth, std::vector<double>{1.0, 0.0, 1.0}));
}

TEST_CASE("valid prediction time") {
    CHECK(vpt(std::vector<double>(100, 0.0)) == 100);
    std::vector<double> ramp(200);
    for (std::size_t t = 1; t <= 200; ++t) ramp[t - 1] = 0.001 * static_cast<double>(t);
    CHECK(vpt(ramp, 0.1) == 99);
}
