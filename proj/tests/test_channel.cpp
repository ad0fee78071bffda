#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "bbma/channel.hpp"

using namespace bbma;

namespace {
CellConfig default_cell() { return CellConfig{}; }
} // namespace

TEST_CASE("noise power follows kTB + NF", "[channel]") {
    CellConfig cell;

    SECTION("10 MHz, NF 10 dB is -94 dBm") {
        cell.bandwidth_hz = 10e6;
        cell.noise_figure_db = 10.0;
        // independent dB arithmetic: -174 + 70 + 10
        const double expected_dbm = -174.0 + 10.0 * std::log10(10e6) + 10.0;
        CHECK(expected_dbm == Catch::Approx(-94.0).margin(1e-9));
        CHECK(noise_power_w(cell) == Catch::Approx(std::pow(10.0, -94.0 / 10.0) * 1e-3).epsilon(1e-12));
        CHECK(noise_power_w(cell) == Catch::Approx(3.981e-13).epsilon(1e-3));
    }

    SECTION("5 MHz, NF 5 dB is -102.0 dBm") {
        cell.bandwidth_hz = 5e6;
        cell.noise_figure_db = 5.0;
        const double dbm = 10.0 * std::log10(noise_power_w(cell) * 1e3);
        CHECK(dbm == Catch::Approx(-102.0).margin(0.02));
    }

    SECTION("1 Hz, NF 0 dB is the -174 dBm floor") {
        cell.bandwidth_hz = 1.0;
        cell.noise_figure_db = 0.0;
        CHECK(10.0 * std::log10(noise_power_w(cell) * 1e3) == Catch::Approx(-174.0).margin(1e-9));
    }

    SECTION("strictly increasing in bandwidth and noise figure") {
        CellConfig a = default_cell(), b = default_cell();
        b.bandwidth_hz = a.bandwidth_hz * 1.5;
        CHECK(noise_power_w(b) > noise_power_w(a));
        b = a;
        b.noise_figure_db = a.noise_figure_db + 1.0;
        CHECK(noise_power_w(b) > noise_power_w(a));
    }
}

TEST_CASE("mean path gain calibration", "[channel]") {
    CellConfig cell;

    SECTION("default calibration gives 120 dB loss at 1 km") {
        const double gain_db = 10.0 * std::log10(mean_path_gain(cell, 1000.0).gain_linear);
        CHECK(gain_db == Catch::Approx(-120.0).margin(0.05));
    }

    SECTION("reference distance recovers the reference loss") {
        cell.min_distance_m = 1.0;
        const double gain_db = 10.0 * std::log10(mean_path_gain(cell, 1.0).gain_linear);
        CHECK(gain_db == Catch::Approx(-cell.pathloss_ref_db).margin(1e-9));
    }

    SECTION("monotone decreasing in distance") {
        double prev = mean_path_gain(cell, 10.0).gain_linear;
        for (double d : {20.0, 50.0, 100.0, 300.0, 700.0}) {
            const double g = mean_path_gain(cell, d).gain_linear;
            CHECK(g < prev);
            prev = g;
        }
    }

    SECTION("errors below the minimum distance") {
        CHECK_THROWS_AS(mean_path_gain(cell, 1.0), std::domain_error);
    }
}

TEST_CASE("channel gain applies the shadowing draw", "[channel]") {
    CellConfig cell;
    Terminal t;
    t.position = {300.0, 400.0, -cell.ap_height_m}; // 500 m ground range

    SECTION("zero shadowing equals the mean path gain") {
        t.shadowing_db = 0.0;
        CHECK(channel_gain(cell, t).gain_linear ==
              Catch::Approx(mean_path_gain(cell, t.distance_m()).gain_linear));
    }

    SECTION("+10 dB shadowing is a factor of 10") {
        t.shadowing_db = 10.0;
        CHECK(channel_gain(cell, t).gain_linear ==
              Catch::Approx(10.0 * mean_path_gain(cell, t.distance_m()).gain_linear));
    }

    SECTION("median over draws recovers the mean path gain") {
        Rng rng(7);
        std::vector<double> gains;
        for (int i = 0; i < 20001; ++i) {
            Terminal u = t;
            u.shadowing_db = rng.normal(0.0, cell.shadowing_sigma_db);
            gains.push_back(channel_gain(cell, u).gain_linear);
        }
        std::nth_element(gains.begin(), gains.begin() + 10000, gains.end());
        const double median = gains[10000];
        const double mean = mean_path_gain(cell, t.distance_m()).gain_linear;
        CHECK(median == Catch::Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("terminal drops", "[channel]") {
    CellConfig cell;

    SECTION("n must be positive") {
        Rng rng(1);
        CHECK_THROWS_AS(drop_terminals(rng, 0, cell), std::invalid_argument);
    }

    SECTION("single terminal lands inside the geometry bounds") {
        Rng rng(42);
        const auto ts = drop_terminals(rng, 1, cell);
        REQUIRE(ts.size() == 1);
        const double d = ts[0].distance_m();
        const double ground_max = cell.side_m * std::sqrt(2.0) / 2.0;
        CHECK(d >= cell.min_distance_m);
        CHECK(d <= std::hypot(ground_max, cell.ap_height_m));
    }

    SECTION("positions stay in the square and outside the minimum-distance disk") {
        Rng rng(3);
        for (const auto& t : drop_terminals(rng, 500, cell)) {
            CHECK(std::abs(t.position[0]) <= cell.side_m / 2.0);
            CHECK(std::abs(t.position[1]) <= cell.side_m / 2.0);
            CHECK(std::hypot(t.position[0], t.position[1]) >= cell.min_distance_m);
            CHECK(t.position[2] == -cell.ap_height_m);
        }
    }

    SECTION("shadowing sample mean is near zero") {
        Rng rng(11);
        const int n = 100000;
        const auto ts = drop_terminals(rng, n, cell);
        double sum = 0.0;
        for (const auto& t : ts) sum += t.shadowing_db;
        const double bound = 3.0 * cell.shadowing_sigma_db / std::sqrt(double(n));
        CHECK(std::abs(sum / n) <= bound);
    }

    SECTION("equal seeds give bitwise-equal drops") {
        Rng a(99), b(99);
        const auto ta = drop_terminals(a, 64, cell);
        const auto tb = drop_terminals(b, 64, cell);
        REQUIRE(ta.size() == tb.size());
        for (std::size_t i = 0; i < ta.size(); ++i) {
            CHECK(ta[i].id == tb[i].id);
            CHECK(ta[i].position == tb[i].position);
            CHECK(ta[i].shadowing_db == tb[i].shadowing_db);
        }
    }

    SECTION("gain is positive and at most 1 across a drop") {
        Rng rng(5);
        for (const auto& t : drop_terminals(rng, 2000, cell)) {
            const double g = channel_gain(cell, t).gain_linear;
            CHECK(g > 0.0);
            CHECK(g <= 1.0);
        }
    }
}

TEST_CASE("steering vectors", "[channel]") {
    ArrayGeometry array;
    array.nx = 8;
    array.ny = 4;

    SECTION("broadside direction gives all ones") {
        const auto a = steering_vector(array, std::array<double, 3>{0.0, 0.0, -1.0});
        for (const auto& e : a) {
            CHECK(e.real() == Catch::Approx(1.0).margin(1e-15));
            CHECK(e.imag() == Catch::Approx(0.0).margin(1e-15));
        }
    }

    SECTION("reference element is 1 for every direction") {
        Rng rng(13);
        for (int k = 0; k < 20; ++k) {
            double v[3] = {rng.normal(), rng.normal(), rng.normal()};
            const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            const auto a =
                steering_vector(array, std::array<double, 3>{v[0] / norm, v[1] / norm, v[2] / norm});
            CHECK(a[0] == std::complex<double>(1.0, 0.0));
        }
    }

    SECTION("all elements have unit modulus") {
        const auto a = steering_vector(array, std::array<double, 3>{0.6, 0.48, -0.64});
        for (const auto& e : a) CHECK(std::abs(std::abs(e) - 1.0) < 1e-12);
    }

    SECTION("opposite azimuth directions give conjugate vectors") {
        const std::array<double, 3> u{0.5, 0.3, -std::sqrt(1.0 - 0.25 - 0.09)};
        const std::array<double, 3> v{-u[0], -u[1], u[2]};
        const auto a = steering_vector(array, u);
        const auto b = steering_vector(array, v);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::abs(a[i] - std::conj(b[i])) < 1e-12);
    }

    SECTION("phases match a direct computation") {
        // element x of row y sits at spacing*(x, y, 0) wavelengths; its phase is
        // 2*pi*spacing*(x*ux + y*uy), computed here from scratch
        const std::array<double, 3> u{0.36, -0.48, -0.8};
        const auto a = steering_vector(array, u);
        for (int iy = 0; iy < array.ny; ++iy)
            for (int ix = 0; ix < array.nx; ++ix) {
                const double phase =
                    2.0 * 3.14159265358979323846 * array.spacing_wavelengths *
                    (ix * u[0] + iy * u[1]);
                const std::complex<double> expected{std::cos(phase), std::sin(phase)};
                CHECK(std::abs(a[std::size_t(ix + array.nx * iy)] - expected) < 1e-12);
            }
    }
}
