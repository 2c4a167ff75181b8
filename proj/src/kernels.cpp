#include "hetsnn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace hetsnn::kernels {

namespace {

struct BrandesScratch {
    std::vector<std::size_t> stack;
    std::vector<std::size_t> queue;
    std::vector<long> dist;
    std::vector<double> sigma;
    std::vector<double> delta;
    std::vector<std::vector<std::size_t>> preds;

    explicit BrandesScratch(std::size_t n) : dist(n), sigma(n), delta(n), preds(n) {
        stack.reserve(n);
        queue.reserve(n);
    }
};

// Dependencies of every target on the nodes reachable from source s.
void brandes_single_source(const Csr& out, std::size_t s, BrandesScratch& w, std::vector<double>& acc) {
    const std::size_t n = out.size();
    w.stack.clear();
    w.queue.clear();
    std::fill(w.dist.begin(), w.dist.end(), -1L);
    std::fill(w.sigma.begin(), w.sigma.end(), 0.0);
    std::fill(w.delta.begin(), w.delta.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) w.preds[i].clear();

    w.dist[s] = 0;
    w.sigma[s] = 1.0;
    w.queue.push_back(s);
    for (std::size_t head = 0; head < w.queue.size(); ++head) {
        const std::size_t v = w.queue[head];
        w.stack.push_back(v);
        for (std::size_t t : out.row(v)) {
            if (w.dist[t] < 0) {
                w.dist[t] = w.dist[v] + 1;
                w.queue.push_back(t);
            }
            if (w.dist[t] == w.dist[v] + 1) {
                w.sigma[t] += w.sigma[v];
                w.preds[t].push_back(v);
            }
        }
    }
    for (auto it = w.stack.rbegin(); it != w.stack.rend(); ++it) {
        const std::size_t t = *it;
        for (std::size_t v : w.preds[t]) w.delta[v] += w.sigma[v] / w.sigma[t] * (1.0 + w.delta[t]);
        if (t != s) acc[t] += w.delta[t];
    }
}

}  // namespace

std::vector<double> betweenness_serial(const Csr& out) {
    const std::size_t n = out.size();
    std::vector<double> score(n, 0.0);
    BrandesScratch scratch(n);
    for (std::size_t s = 0; s < n; ++s) brandes_single_source(out, s, scratch, score);
    return score;
}

std::vector<double> betweenness_parallel(const Csr& out) {
    const std::size_t n = out.size();
    // Per-source contributions are kept separate and summed in source order,
    // so the result does not depend on the thread schedule.
    std::vector<std::vector<double>> per_source(n);
#pragma omp parallel
    {
        BrandesScratch scratch(n);
#pragma omp for schedule(dynamic, 4)
        for (std::size_t s = 0; s < n; ++s) {
            per_source[s].assign(n, 0.0);
            brandes_single_source(out, s, scratch, per_source[s]);
        }
    }
    std::vector<double> score(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < n; ++i) score[i] += per_source[s][i];
    }
    return score;
}

void LifArrays::resize(std::size_t n) {
    for (auto* vec : {&v, &i_syn, &refractory_until, &tau_m, &r_m, &v_rest, &v_threshold, &v_reset, &refractory,
                      &v_floor}) {
        vec->resize(n, 0.0);
    }
}

namespace {

inline void lif_one(LifArrays& s, std::size_t i, double i_ext, double t_now, double dt, std::uint8_t& fired) {
    fired = 0;
    if (t_now < s.refractory_until[i]) {
        s.v[i] = s.v_reset[i];
        return;
    }
    double v = s.v[i];
    v += dt * (s.v_rest[i] + s.r_m[i] * (i_ext + s.i_syn[i]) - v) / s.tau_m[i];
    v = std::max(v, s.v_floor[i]);
    if (v > s.v_threshold[i]) {
        fired = 1;
        v = s.v_reset[i];
        s.refractory_until[i] = t_now + dt + s.refractory[i];
    }
    s.v[i] = v;
}

}  // namespace

void lif_integrate_serial(LifArrays& s, std::span<const double> i_ext, double t_now, double dt,
                          std::span<std::uint8_t> fired) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) lif_one(s, i, i_ext.empty() ? 0.0 : i_ext[i], t_now, dt, fired[i]);
}

void lif_integrate_parallel(LifArrays& s, std::span<const double> i_ext, double t_now, double dt,
                            std::span<std::uint8_t> fired) {
    const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(static) if (n > 2048)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        lif_one(s, k, i_ext.empty() ? 0.0 : i_ext[k], t_now, dt, fired[k]);
    }
}

void SynapseArrays::resize(std::size_t n) {
    pre.resize(n, 0);
    post.resize(n, 0);
    for (auto* vec : {&magnitude, &t_pre, &t_post, &decay_plus, &decay_minus, &gain_plus, &gain_minus, &incr_plus,
                      &incr_minus, &w_min, &w_max}) {
        vec->resize(n, 0.0);
    }
}

namespace {

inline void stdp_one(SynapseArrays& s, std::size_t k, bool pre, bool post) {
    s.t_pre[k] *= s.decay_plus[k];
    s.t_post[k] *= s.decay_minus[k];
    if (!pre && !post) return;
    double w = s.magnitude[k];
    if (post) w += s.gain_plus[k] * s.t_pre[k];
    if (pre) w -= s.gain_minus[k] * s.t_post[k];
    s.magnitude[k] = std::clamp(w, s.w_min[k], s.w_max[k]);
    if (pre) s.t_pre[k] += s.incr_plus[k];
    if (post) s.t_post[k] += s.incr_minus[k];
}

}  // namespace

void stdp_step_serial(SynapseArrays& s, std::span<const std::uint8_t> pre_fired,
                      std::span<const std::uint8_t> post_fired) {
    const std::size_t n = s.size();
    for (std::size_t k = 0; k < n; ++k) stdp_one(s, k, pre_fired[s.pre[k]] != 0, post_fired[s.post[k]] != 0);
}

void stdp_step_parallel(SynapseArrays& s, std::span<const std::uint8_t> pre_fired,
                        std::span<const std::uint8_t> post_fired) {
    const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        stdp_one(s, k, pre_fired[s.pre[k]] != 0, post_fired[s.post[k]] != 0);
    }
}

}  // namespace hetsnn::kernels
