#include "hetsnn/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <random>

namespace hetsnn {

GammaSpec GammaSpec::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
        throw ConfigError("gamma spec requires shape > 0 and scale > 0");
    }
    GammaSpec g;
    g.shape_ = shape;
    g.scale_ = scale;
    return g;
}

GammaSpec GammaSpec::point_mass(double value) {
    if (!std::isfinite(value)) throw ConfigError("point mass value must be finite");
    GammaSpec g;
    g.degenerate_ = true;
    g.value_ = value;
    g.shape_ = 0.0;
    g.scale_ = 0.0;
    return g;
}

GammaSpec GammaSpec::from_moments(double mean, double variance) {
    if (variance < 0.0) throw ConfigError("variance must be non-negative");
    if (variance == 0.0) return point_mass(mean);
    if (!(mean > 0.0)) throw ConfigError("gamma mean must be positive");
    return gamma(mean * mean / variance, variance / mean);
}

double GammaSpec::mean() const { return degenerate_ ? value_ : shape_ * scale_; }

double GammaSpec::variance() const { return degenerate_ ? 0.0 : shape_ * scale_ * scale_; }

double GammaSpec::quantile(double u) const {
    if (degenerate_) return value_;
    if (!(u > 0.0 && u < 1.0)) throw NumericError("gamma quantile requires u in (0, 1)");
    try {
        return scale_ * boost::math::gamma_p_inv(shape_, u);
    } catch (const std::exception& e) {
        throw NumericError(std::string("gamma quantile evaluation failed: ") + e.what());
    }
}

double GammaSpec::sample(Rng& rng) const {
    if (degenerate_) return value_;
    return std::gamma_distribution<double>(shape_, scale_)(rng);
}

std::string_view ParamDistributionSet::name(std::size_t i) {
    static constexpr std::array<std::string_view, count> names{"tau_m_exc", "tau_m_inh", "a_plus",
                                                               "a_minus",   "tau_plus",  "tau_minus"};
    return names.at(i);
}

ParamDistributionSet ParamDistributionSet::bio_defaults() {
    ParamDistributionSet s;
    s[tau_m_exc] = GammaSpec::gamma(4.0, 5.0);    // mean 20 ms
    s[tau_m_inh] = GammaSpec::gamma(4.0, 2.5);    // mean 10 ms
    s[a_plus] = GammaSpec::gamma(4.0, 0.0025);    // mean 0.010
    s[a_minus] = GammaSpec::gamma(4.0, 0.003);    // mean 0.012
    s[tau_plus] = GammaSpec::gamma(4.0, 5.0);     // mean 20 ms
    s[tau_minus] = GammaSpec::gamma(4.0, 5.0);    // mean 20 ms
    return s;
}

}  // namespace hetsnn
