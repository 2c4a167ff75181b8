// Serial versus OpenMP timings of the inner kernels on a generated network.
//
// Usage: hetsnn_bench [n_neurons] [repeats]

#include "hetsnn/kernels.hpp"
#include "hetsnn/topology.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

using namespace hetsnn;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-22s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial, parallel,
                serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
    std::printf("neurons %zu, threads %d, best of %d\n", n, omp_get_max_threads(), repeats);

    TopologyConfig cfg;
    cfg.n_total = n;
    std::size_t side = 1;
    while (side * side * side < n) ++side;
    cfg.lattice_shape = {side, side, side};
    const NetworkGraph g = build_recurrent_graph(cfg, 7);
    const kernels::Csr adj = out_adjacency(g);
    std::printf("synapses %zu\n", g.edges().size());

    {
        std::vector<double> a, b;
        const double ts = time_ms([&] { a = kernels::betweenness_serial(adj); }, repeats);
        const double tp = time_ms([&] { b = kernels::betweenness_parallel(adj); }, repeats);
        report("betweenness", ts, tp, a == b);
    }

    kernels::LifArrays lif;
    lif.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lif.tau_m[i] = 10.0 + static_cast<double>(i % 17);
        lif.r_m[i] = 1.0;
        lif.v_rest[i] = -65.0;
        lif.v_threshold[i] = -50.0;
        lif.v_reset[i] = -65.0;
        lif.refractory[i] = 2.0;
        lif.v_floor[i] = -85.0;
        lif.v[i] = -65.0 + static_cast<double>(i % 13);
        lif.refractory_until[i] = -1.0;
    }
    std::vector<double> drive(n);
    for (std::size_t i = 0; i < n; ++i) drive[i] = 10.0 + static_cast<double>(i % 11);
    const int steps = 2000;
    {
        kernels::LifArrays a = lif, b = lif;
        std::vector<std::uint8_t> fa(n), fb(n);
        const double ts = time_ms(
            [&] {
                a = lif;
                for (int s = 0; s < steps; ++s) kernels::lif_integrate_serial(a, drive, 0.25 * s, 0.25, fa);
            },
            repeats);
        const double tp = time_ms(
            [&] {
                b = lif;
                for (int s = 0; s < steps; ++s) kernels::lif_integrate_parallel(b, drive, 0.25 * s, 0.25, fb);
            },
            repeats);
        report("lif_integrate x2000", ts, tp, a.v == b.v && fa == fb);
    }

    kernels::SynapseArrays syn;
    const auto idx = g.edge_indices();
    syn.resize(idx.size());
    for (std::size_t e = 0; e < idx.size(); ++e) {
        syn.pre[e] = static_cast<std::uint32_t>(idx[e].first);
        syn.post[e] = static_cast<std::uint32_t>(idx[e].second);
        syn.magnitude[e] = 1.0;
        syn.decay_plus[e] = syn.decay_minus[e] = 0.9876;
        syn.gain_plus[e] = 0.01;
        syn.gain_minus[e] = 0.012;
        syn.incr_plus[e] = syn.incr_minus[e] = 1.0;
        syn.w_min[e] = 0.0;
        syn.w_max[e] = 4.0;
    }
    std::vector<std::uint8_t> pre(n), post(n);
    for (std::size_t i = 0; i < n; ++i) {
        pre[i] = i % 7 == 0;
        post[i] = i % 5 == 0;
    }
    {
        kernels::SynapseArrays a = syn, b = syn;
        const double ts = time_ms(
            [&] {
                a = syn;
                for (int s = 0; s < 200; ++s) kernels::stdp_step_serial(a, pre, post);
            },
            repeats);
        const double tp = time_ms(
            [&] {
                b = syn;
                for (int s = 0; s < 200; ++s) kernels::stdp_step_parallel(b, pre, post);
            },
            repeats);
        report("stdp_step x200", ts, tp, a.magnitude == b.magnitude && a.t_pre == b.t_pre);
    }
    return 0;
}
