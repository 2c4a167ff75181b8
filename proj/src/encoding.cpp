#include "hetsnn/encoding.hpp"

#include <cmath>

namespace hetsnn {

void RateEncoderConfig::validate() const {
    if (!(max_rate > 0.0)) throw ConfigError("encoding: max_rate must be positive");
    if (encoders_per_channel == 0) throw ConfigError("encoding: encoders_per_channel must be positive");
    if (!(window > 0.0)) throw ConfigError("encoding: window must be positive");
}

std::size_t encoder_count(const RateEncoderConfig& config, std::size_t channels) {
    const std::size_t cols = config.mode == EncodingMode::temporal_difference ? 2 * channels : channels;
    return cols * config.encoders_per_channel;
}

Eigen::MatrixXd temporal_difference(const Eigen::MatrixXd& signal) {
    const Eigen::Index t = signal.rows();
    const Eigen::Index c = signal.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t, 2 * c);
    for (Eigen::Index r = 1; r < t; ++r) {
        for (Eigen::Index j = 0; j < c; ++j) {
            const double d = signal(r, j) - signal(r - 1, j);
            out(r, 2 * j) = std::max(d, 0.0);
            out(r, 2 * j + 1) = std::max(-d, 0.0);
        }
    }
    return out;
}

SpikeTrains rate_encode(const Eigen::MatrixXd& signal, const RateEncoderConfig& config, double dt,
                        std::uint64_t seed) {
    config.validate();
    if (!(dt > 0.0)) throw ConfigError("encoding: dt must be positive");
    if (!signal.allFinite() || (signal.size() > 0 && (signal.minCoeff() < 0.0 || signal.maxCoeff() > 1.0))) {
        throw InputError("rate_encode: signal values must lie in [0, 1]");
    }
    const Eigen::MatrixXd values =
        config.mode == EncodingMode::temporal_difference ? temporal_difference(signal) : signal;
    const auto steps_per_sample = static_cast<std::size_t>(std::llround(config.window / dt));
    if (steps_per_sample == 0) throw ConfigError("encoding: window shorter than dt");
    const std::size_t per = config.encoders_per_channel;

    SpikeTrains out;
    out.dt = dt;
    out.n_channels = static_cast<std::uint32_t>(values.cols() * per);
    out.active.resize(static_cast<std::size_t>(values.rows()) * steps_per_sample);
    Rng rng = make_rng(seed, 41);
    const double p_scale = config.max_rate * dt / 1000.0;
    std::size_t step = 0;
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (std::size_t s = 0; s < steps_per_sample; ++s, ++step) {
            auto& active = out.active[step];
            for (Eigen::Index c = 0; c < values.cols(); ++c) {
                const double p = values(r, c) * p_scale;
                for (std::size_t k = 0; k < per; ++k) {
                    // Draw unconditionally so the stream does not depend on the values.
                    const double u = uniform01(rng);
                    if (u < p) active.push_back(static_cast<std::uint32_t>(c * per + k));
                }
            }
        }
    }
    return out;
}

}  // namespace hetsnn
