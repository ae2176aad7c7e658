#pragma once

#include <cmath>
#include <numbers>

namespace franson {

// Speed of light in mm/ps (exact). All path-delay arithmetic uses this value.
inline constexpr double speed_of_light_mm_per_ps = 0.299792458;

// Gaussian FWHM -> standard deviation: 1 / (2 sqrt(2 ln 2)).
inline constexpr double fwhm_to_sigma = 0.42466090014400953;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Internal frequency unit is THz (= 1/ps); pump linewidths are configured in GHz.
inline constexpr double ghz_to_thz = 1.0e-3;

// Canonicalize an angle to [0, 2*pi).
inline double wrap_phase(double rad) {
    double w = std::fmod(rad, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

} // namespace franson
