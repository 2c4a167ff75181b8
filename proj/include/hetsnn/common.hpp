#pragma once

// Shared vocabulary types, error hierarchy and seeding helpers.

#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace hetsnn {

/// Identifier of a recurrent neuron. Ids are assigned at construction and
/// never reused after a neuron is pruned.
struct NeuronId {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const NeuronId&) const = default;
};

enum class NeuronSign : std::uint8_t { excitatory, inhibitory };

inline double sign_factor(NeuronSign s) { return s == NeuronSign::excitatory ? 1.0 : -1.0; }

// Error classes. The CLI maps them onto exit codes 2, 3, 4 and 2 respectively.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix_seed(seed, stream)); }

/// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace hetsnn

template <>
struct std::hash<hetsnn::NeuronId> {
    std::size_t operator()(const hetsnn::NeuronId& id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
