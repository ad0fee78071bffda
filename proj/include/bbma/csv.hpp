#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbma/experiments.hpp"

namespace bbma {

/// Shortest round-trippable decimal form; bitwise-stable for equal doubles.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_fig3_csv(const std::filesystem::path& path, const std::vector<Fig3Row>& rows) {
    CsvWriter csv(path);
    csv.row({"n_terminals", "trials", "conv_mean_w", "conv_std_w", "conv_stderr_w",
             "bbma_mean_w", "bbma_std_w", "bbma_stderr_w"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.n_terminals), std::to_string(r.conv.count),
                 format_double(r.conv.mean), format_double(r.conv.stddev),
                 format_double(r.conv.stderr_mean), format_double(r.bbma.mean),
                 format_double(r.bbma.stddev), format_double(r.bbma.stderr_mean)});
}

inline void write_fig4_csv(const std::filesystem::path& path, const std::vector<Fig4Row>& rows) {
    CsvWriter csv(path);
    csv.row({"n_terminals", "solver", "trials", "flagged", "mean_condition_number",
             "mean_max_residual", "mean_ber", "stderr_ber"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.n_terminals), to_string(r.solver), std::to_string(r.trials),
                 std::to_string(r.flagged), format_double(r.mean_condition_number),
                 format_double(r.mean_max_residual), format_double(r.mean_ber),
                 format_double(r.stderr_ber)});
}

inline void write_fig5_csv(const std::filesystem::path& path, const std::vector<Fig5Row>& rows) {
    CsvWriter csv(path);
    csv.row({"bits_per_symbol", "spectral_efficiency_bps_hz", "mpsk_order", "mpsk_ser_analytic",
             "bits_simulated", "bit_errors", "bbma_bit_error", "words_simulated", "word_errors",
             "bbma_word_error"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.bbma.n_bits), format_double(r.bbma.spectral_efficiency),
                 std::to_string(r.mpsk_order), format_double(r.mpsk_ser_analytic),
                 std::to_string(r.bbma.bits), std::to_string(r.bbma.bit_errors),
                 format_double(r.bbma.per_bit_error), std::to_string(r.bbma.words),
                 std::to_string(r.bbma.word_errors), format_double(r.bbma.word_error_rate)});
}

/// Per-trial records behind --raw; one shared schema across experiments, with
/// cells a given experiment does not produce left as nan/0.
inline void write_raw_csv(const std::filesystem::path& path, const std::string& experiment,
                          const std::vector<std::pair<std::string, const std::vector<TrialRecord>*>>& groups) {
    CsvWriter csv(path);
    csv.row({"experiment", "solver", "n", "trial", "seed", "flagged", "conventional_total_w",
             "bbma_total_w", "condition_number", "max_null_residual", "ber", "bit_errors",
             "bits_simulated", "capacity_bps_hz"});
    for (const auto& [solver, recs] : groups)
        for (const auto& r : *recs)
            csv.row({experiment, solver, std::to_string(r.n), std::to_string(r.trial),
                     std::to_string(r.seed), r.flagged ? "1" : "0",
                     format_double(r.conventional_total_w), format_double(r.bbma_total_w),
                     format_double(r.condition_number), format_double(r.max_null_residual),
                     format_double(r.ber), std::to_string(r.bit_errors),
                     std::to_string(r.bits_simulated), format_double(r.capacity_bps_hz)});
}

inline void write_check_weights_csv(const std::filesystem::path& path,
                                    const std::vector<WeightCheckRow>& rows) {
    CsvWriter csv(path);
    csv.row({"seed", "condition_number", "max_error_explicit_inverse",
             "max_error_orthogonal_factorization"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.seed), format_double(r.condition_number),
                 format_double(r.max_error_explicit_inverse),
                 format_double(r.max_error_orthogonal_factorization)});
}

} // namespace bbma
