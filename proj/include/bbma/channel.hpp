#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbma/mathutil.hpp"
#include "bbma/rng.hpp"

namespace bbma {

/// Cell geometry and radio parameters. The access point sits at the origin;
/// terminals live in the horizontal plane ap_height_m below it, inside a
/// square of side side_m centred under the AP.
struct CellConfig {
    double side_m = 1000.0;
    double carrier_hz = 2.0e9;
    double bandwidth_hz = 10.0e6;
    double pathloss_ref_db = 38.5;  // mean path loss at 1 m
    double pathloss_exponent = 2.717;
    double shadowing_sigma_db = 8.0;
    double noise_figure_db = 10.0;
    double target_sinr_db = 15.0;
    double min_distance_m = 10.0;
    double ap_height_m = 25.0;

    void validate() const {
        if (side_m <= 0.0) throw std::invalid_argument("cell.side_m must be > 0");
        if (carrier_hz <= 0.0) throw std::invalid_argument("cell.carrier_hz must be > 0");
        if (bandwidth_hz <= 0.0) throw std::invalid_argument("cell.bandwidth_hz must be > 0");
        if (min_distance_m <= 0.0) throw std::invalid_argument("cell.min_distance_m must be > 0");
        if (pathloss_exponent < 2.0) throw std::invalid_argument("cell.pathloss_exponent must be >= 2");
        if (shadowing_sigma_db < 0.0) throw std::invalid_argument("cell.shadowing_sigma_db must be >= 0");
        if (ap_height_m < 0.0) throw std::invalid_argument("cell.ap_height_m must be >= 0");
    }

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    double target_sinr_linear() const { return db_to_linear(target_sinr_db); }
};

struct Terminal {
    int id = 0;
    std::array<double, 3> position{}; // metres, AP at origin
    double shadowing_db = 0.0;        // frozen per drop

    double distance_m() const {
        return std::sqrt(position[0] * position[0] + position[1] * position[1] +
                         position[2] * position[2]);
    }

    std::array<double, 3> direction() const {
        const double d = distance_m();
        return {position[0] / d, position[1] / d, position[2] / d};
    }
};

/// Uniform planar array in the x-y plane, reference element at the origin,
/// element spacing given in carrier wavelengths. Broadside is the z axis.
struct ArrayGeometry {
    int nx = 64;
    int ny = 64;
    double spacing_wavelengths = 0.5;

    int size() const { return nx * ny; }

    void validate() const {
        if (nx < 1 || ny < 1) throw std::invalid_argument("array.nx/ny must be >= 1");
        if (spacing_wavelengths <= 0.0)
            throw std::invalid_argument("array.spacing_wavelengths must be > 0");
    }
};

/// Mean channel power gain, linear, in (0, 1].
struct LinkGain {
    double gain_linear = 1.0;
};

/// Mean (log-distance) path gain at a given range. Errors below the
/// configured minimum distance where the model has no meaning.
inline LinkGain mean_path_gain(const CellConfig& cell, double distance_m) {
    if (distance_m < cell.min_distance_m)
        throw std::domain_error("mean_path_gain: distance " + std::to_string(distance_m) +
                                " m below minimum " + std::to_string(cell.min_distance_m) + " m");
    const double loss_db = cell.pathloss_ref_db +
                           10.0 * cell.pathloss_exponent * std::log10(distance_m);
    return {db_to_linear(-loss_db)};
}

/// Path gain combined with the terminal's frozen shadowing draw.
inline LinkGain channel_gain(const CellConfig& cell, const Terminal& t) {
    const double mean = mean_path_gain(cell, t.distance_m()).gain_linear;
    return {mean * db_to_linear(t.shadowing_db)};
}

/// Average thermal noise power at the terminal input, in Watts:
/// kT (-174 dBm/Hz at 290 K) + 10 log10(B) + NF.
inline double noise_power_w(const CellConfig& cell) {
    const double dbm = kThermalNoiseDbmHz + 10.0 * std::log10(cell.bandwidth_hz) +
                       cell.noise_figure_db;
    return dbm_to_watts(dbm);
}

/// Drop n terminals uniformly over the cell square, rejection-resampling any
/// position whose ground distance falls inside the minimum-distance disk.
/// Shadowing is drawn i.i.d. Normal(0, sigma^2) per terminal.
inline std::vector<Terminal> drop_terminals(Rng& rng, int n, const CellConfig& cell) {
    if (n < 1) throw std::invalid_argument("drop_terminals: n must be >= 1");
    cell.validate();
    std::vector<Terminal> out;
    out.reserve(static_cast<std::size_t>(n));
    const double half = cell.side_m / 2.0;
    for (int i = 0; i < n; ++i) {
        double x, y;
        do {
            x = rng.uniform(-half, half);
            y = rng.uniform(-half, half);
        } while (std::hypot(x, y) < cell.min_distance_m);
        Terminal t;
        t.id = i;
        t.position = {x, y, -cell.ap_height_m};
        t.shadowing_db = rng.normal(0.0, cell.shadowing_sigma_db);
        out.push_back(t);
    }
    return out;
}

/// Far-field steering vector toward a unit direction. Element (ix, iy) sits at
/// spacing*(ix, iy, 0) wavelengths, so its relative phase is
/// 2*pi*spacing*(ix*ux + iy*uy); the carrier wavelength cancels. The reference
/// element (0, 0) is always exactly 1. Elements are ordered ix + nx*iy.
inline std::vector<std::complex<double>> steering_vector(const ArrayGeometry& array,
                                                         const std::array<double, 3>& direction) {
    array.validate();
    std::vector<std::complex<double>> a;
    a.reserve(static_cast<std::size_t>(array.size()));
    const double k = 2.0 * kPi * array.spacing_wavelengths;
    for (int iy = 0; iy < array.ny; ++iy)
        for (int ix = 0; ix < array.nx; ++ix) {
            const double phase = k * (ix * direction[0] + iy * direction[1]);
            a.emplace_back(std::cos(phase), std::sin(phase));
        }
    return a;
}

inline std::vector<std::complex<double>> steering_vector(const ArrayGeometry& array,
                                                         const Terminal& t) {
    return steering_vector(array, t.direction());
}

} // namespace bbma
