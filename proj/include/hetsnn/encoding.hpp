#pragma once

// Poisson rate encoding of analog signals into encoder spike trains.

#include "hetsnn/dynamics.hpp"

#include <Eigen/Dense>

namespace hetsnn {

enum class EncodingMode { poisson_rate, temporal_difference };

struct RateEncoderConfig {
    /// Rate (Hz) of an encoder whose input is 1.
    double max_rate = 100.0;
    /// Encoders driven by each signal channel (each ON/OFF half in
    /// temporal-difference mode).
    std::size_t encoders_per_channel = 1;
    /// Time each sample is held, in ms.
    double window = 5.0;
    EncodingMode mode = EncodingMode::poisson_rate;

    void validate() const;
};

/// Number of encoders used for a signal with `channels` columns.
std::size_t encoder_count(const RateEncoderConfig& config, std::size_t channels);

/// First differences split into ON (positive) and OFF (negative) halves,
/// giving 2 * channels columns in [0, 1]. The first row is all zero.
Eigen::MatrixXd temporal_difference(const Eigen::MatrixXd& signal);

/// Rows are samples, columns channels, values in [0, 1]. Every encoder of a
/// channel fires independently with probability value * max_rate * dt in
/// each step of the sample's window. Encoder index = channel * per_channel + k.
SpikeTrains rate_encode(const Eigen::MatrixXd& signal, const RateEncoderConfig& config, double dt,
                        std::uint64_t seed);

}  // namespace hetsnn
