#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "bbma/channel.hpp"
#include "bbma/rng.hpp"
#include "bbma/steering.hpp"

namespace bbma {

/// One transmitted word; bit positions are 1-indexed in the class split.
struct WordFrame {
    std::vector<std::uint8_t> bits;

    void validate() const {
        if (bits.empty()) throw std::invalid_argument("word must have at least one bit");
        for (auto b : bits)
            if (b > 1) throw std::invalid_argument("word bits must be 0 or 1");
    }
};

/// Bit positions split into the two symbol classes: 0-bits form class 1,
/// 1-bits form class 2. The two sets partition 1..N_bits.
struct BitClassSplit {
    std::vector<int> class1_positions;
    std::vector<int> class2_positions;
};

inline BitClassSplit split_word(const WordFrame& word) {
    word.validate();
    BitClassSplit split;
    for (std::size_t i = 0; i < word.bits.size(); ++i)
        (word.bits[i] ? split.class2_positions : split.class1_positions)
            .push_back(static_cast<int>(i + 1));
    return split;
}

/// Point-to-point configuration: one receive antenna per bit, transmit array
/// with at least as many elements.
struct P2PGeometry {
    ArrayGeometry tx_array;
    std::vector<std::array<double, 3>> rx_positions;

    void validate() const {
        tx_array.validate();
        if (rx_positions.empty()) throw std::invalid_argument("need at least one rx antenna");
        if (tx_array.size() < static_cast<int>(rx_positions.size()))
            throw std::invalid_argument("tx array must have at least as many antennas as rx");
    }
};

/// Receive antennas in a line along x at half-wavelength spacing, broadside to
/// the transmit array at the given range.
inline P2PGeometry line_p2p_geometry(const ArrayGeometry& tx, int n_bits, double wavelength_m,
                                     double range_m) {
    if (n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
    if (range_m <= 0.0) throw std::invalid_argument("range must be > 0");
    P2PGeometry geom;
    geom.tx_array = tx;
    for (int k = 0; k < n_bits; ++k) {
        const double x = (k - (n_bits - 1) / 2.0) * wavelength_m / 2.0;
        geom.rx_positions.push_back({x, 0.0, -range_m});
    }
    geom.validate();
    return geom;
}

struct WordResult {
    std::vector<std::uint8_t> detected;
    int bit_errors = 0;
    bool word_error = false;
};

/// One-word-per-symbol-time link: bits are spatially multiplexed onto two
/// null-steered class beams (0-bits and 1-bits), each receive antenna sees
/// unit response from its own class's beam and a null from the other, and
/// detects its bit from the sign of the real part.
class PointToPointLink {
public:
    PointToPointLink(P2PGeometry geometry, SolverKind solver,
                     double condition_ceiling = 1e12)
        : geometry_(std::move(geometry)) {
        geometry_.validate();
        const int n = n_bits();
        matrix_.entries.resize(geometry_.tx_array.size(), n);
        for (int k = 0; k < n; ++k) {
            const auto& p = geometry_.rx_positions[static_cast<std::size_t>(k)];
            const double d = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            const auto col = steering_vector(
                geometry_.tx_array, std::array<double, 3>{p[0] / d, p[1] / d, p[2] / d});
            matrix_.entries.col(k) =
                Eigen::Map<const Eigen::VectorXcd>(col.data(), geometry_.tx_array.size());
        }
        solver_ = std::make_unique<NullSolver>(matrix_, solver, condition_ceiling);
    }

    int n_bits() const { return static_cast<int>(geometry_.rx_positions.size()); }
    const SteeringMatrix& steering() const { return matrix_; }

    /// Transmit one word with class amplitudes -sqrt(Es) (0-bits) and
    /// +sqrt(Es) (1-bits); each receive antenna adds complex Gaussian noise of
    /// variance n0/2 per real dimension.
    WordResult simulate_word(Rng& rng, const WordFrame& word, double es_joules,
                             double n0) const {
        word.validate();
        const int n = n_bits();
        if (static_cast<int>(word.bits.size()) != n)
            throw std::invalid_argument("word length does not match receive antenna count");
        if (es_joules <= 0.0) throw std::invalid_argument("symbol energy must be > 0");
        if (n0 < 0.0) throw std::invalid_argument("noise density must be >= 0");

        ClassSelectorRow zeros{std::vector<std::uint8_t>(word.bits.size())};
        ClassSelectorRow ones{std::vector<std::uint8_t>(word.bits.size())};
        int n_ones = 0;
        for (std::size_t i = 0; i < word.bits.size(); ++i) {
            ones.entries[i] = word.bits[i];
            zeros.entries[i] = static_cast<std::uint8_t>(1 - word.bits[i]);
            n_ones += word.bits[i];
        }

        const double amp = std::sqrt(es_joules);
        Eigen::VectorXcd signal = Eigen::VectorXcd::Zero(n);
        if (n_ones < n) {
            const auto w = solver_->weights(zeros);
            signal -= amp * (matrix_.entries.adjoint() * w.entries).conjugate();
        }
        if (n_ones > 0) {
            const auto w = solver_->weights(ones);
            signal += amp * (matrix_.entries.adjoint() * w.entries).conjugate();
        }

        const double sigma = std::sqrt(n0 / 2.0);
        WordResult result;
        result.detected.resize(word.bits.size());
        for (int k = 0; k < n; ++k) {
            const std::complex<double> y = signal(k) +
                std::complex<double>(rng.normal(0.0, sigma), rng.normal(0.0, sigma));
            const std::uint8_t bit = y.real() > 0.0 ? 1 : 0;
            result.detected[static_cast<std::size_t>(k)] = bit;
            result.bit_errors += (bit != word.bits[static_cast<std::size_t>(k)]);
        }
        result.word_error = result.bit_errors > 0;
        return result;
    }

private:
    P2PGeometry geometry_;
    SteeringMatrix matrix_;
    std::unique_ptr<NullSolver> solver_;
};

/// Symbol error probability of M-ary PSK over AWGN at symbol SNR es_n0:
/// exact antipodal form for M=2, the standard high-SNR approximation
/// 2 Q(sqrt(2 es_n0) sin(pi/M)) for M >= 4.
inline double mpsk_ser(std::uint64_t m, double es_n0) {
    if (m < 2 || (m & (m - 1)) != 0)
        throw std::invalid_argument("mpsk_ser: M must be a power of 2, M >= 2");
    if (es_n0 < 0.0) throw std::invalid_argument("mpsk_ser: es_n0 must be >= 0");
    if (m == 2) return q_function(std::sqrt(2.0 * es_n0));
    return 2.0 * q_function(std::sqrt(2.0 * es_n0) * std::sin(kPi / static_cast<double>(m)));
}

struct WordErrorRow {
    int n_bits = 0;
    double spectral_efficiency = 0.0; // b/s/Hz = bits per symbol-time
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    double per_bit_error = 0.0;
    std::uint64_t words = 0;
    std::uint64_t word_errors = 0;
    double word_error_rate = 0.0;
};

/// Sweeps word length, simulating at least min_bits_per_point random words'
/// worth of bits per point. Each point gets its own derived seed, so rows are
/// reproducible independently of evaluation order.
inline std::vector<WordErrorRow> word_error_curve(const ArrayGeometry& tx, double wavelength_m,
                                                  double range_m,
                                                  std::span<const int> n_bits_list,
                                                  double es_joules, double n0,
                                                  std::uint64_t min_bits_per_point,
                                                  std::uint64_t master_seed,
                                                  SolverKind solver = SolverKind::orthogonal_factorization,
                                                  double condition_ceiling = 1e12) {
    if (min_bits_per_point < 1)
        throw std::invalid_argument("word_error_curve: need at least one bit per point");
    std::vector<WordErrorRow> rows;
    for (const int n_bits : n_bits_list) {
        PointToPointLink link(line_p2p_geometry(tx, n_bits, wavelength_m, range_m), solver,
                              condition_ceiling);
        Rng rng(derive_trial_seed(master_seed, "fig5", static_cast<std::uint64_t>(n_bits)));
        WordErrorRow row;
        row.n_bits = n_bits;
        row.spectral_efficiency = n_bits;
        const std::uint64_t words =
            (min_bits_per_point + static_cast<std::uint64_t>(n_bits) - 1) /
            static_cast<std::uint64_t>(n_bits);
        WordFrame word;
        word.bits.resize(static_cast<std::size_t>(n_bits));
        for (std::uint64_t t = 0; t < words; ++t) {
            for (auto& b : word.bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
            const auto result = link.simulate_word(rng, word, es_joules, n0);
            row.bits += static_cast<std::uint64_t>(n_bits);
            row.bit_errors += static_cast<std::uint64_t>(result.bit_errors);
            row.words += 1;
            row.word_errors += result.word_error ? 1 : 0;
        }
        row.per_bit_error = static_cast<double>(row.bit_errors) / static_cast<double>(row.bits);
        row.word_error_rate =
            static_cast<double>(row.word_errors) / static_cast<double>(row.words);
        rows.push_back(row);
    }
    return rows;
}

} // namespace bbma
