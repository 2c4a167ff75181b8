#pragma once

#include "hetsnn/common.hpp"

#include <array>
#include <string_view>

namespace hetsnn {

/// Gamma distribution with shape k and scale theta, or a point mass.
///
/// The point mass is the homogeneous limit (zero variance) and is what a
/// "homogeneous" network draws its parameters from.
class GammaSpec {
public:
    GammaSpec() = default;

    /// Throws ConfigError unless shape > 0 and scale > 0.
    static GammaSpec gamma(double shape, double scale);
    static GammaSpec point_mass(double value);
    /// Gamma with the given mean and variance; variance 0 gives a point mass.
    static GammaSpec from_moments(double mean, double variance);

    bool degenerate() const { return degenerate_; }
    double shape() const { return shape_; }
    double scale() const { return scale_; }
    double mean() const;
    double variance() const;

    /// Inverse CDF at u in (0, 1).
    double quantile(double u) const;
    double sample(Rng& rng) const;

    /// Same distribution with the mean held fixed and no spread.
    GammaSpec homogenized() const { return point_mass(mean()); }

    bool operator==(const GammaSpec&) const = default;

private:
    double shape_ = 1.0;
    double scale_ = 1.0;
    double value_ = 0.0;
    bool degenerate_ = false;
};

/// The multivariate distribution searched by the Bayesian optimizer: one
/// marginal per heterogeneous parameter family.
struct ParamDistributionSet {
    enum Marginal : std::size_t { tau_m_exc = 0, tau_m_inh, a_plus, a_minus, tau_plus, tau_minus, count };

    std::array<GammaSpec, count> marginals;

    GammaSpec& operator[](std::size_t i) { return marginals[i]; }
    const GammaSpec& operator[](std::size_t i) const { return marginals[i]; }

    static std::string_view name(std::size_t i);

    /// Biologically motivated starting point: excitatory membranes slower
    /// than inhibitory ones.
    static ParamDistributionSet bio_defaults();

    bool operator==(const ParamDistributionSet&) const = default;
};

}  // namespace hetsnn
