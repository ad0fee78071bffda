#pragma once

#include <cmath>
#include <stdexcept>

namespace bbma {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kThermalNoiseDbmHz = -174.0;       // kT at 290 K
inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) {
    if (x <= 0.0)
        throw std::domain_error("linear_to_db: non-positive value");
    return 10.0 * std::log10(x);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// BER of coherent antipodal signalling at linear SNR gamma: Q(sqrt(2*gamma)).
inline double antipodal_ber(double snr_linear) {
    if (snr_linear < 0.0)
        throw std::domain_error("antipodal_ber: negative SNR");
    return q_function(std::sqrt(2.0 * snr_linear));
}

} // namespace bbma
