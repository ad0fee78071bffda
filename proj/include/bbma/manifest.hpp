#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "bbma/experiments.hpp"
#include "bbma/version.hpp"

namespace bbma {

inline std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["run"] = {{"master_seed", cfg.master_seed},
                {"threads", cfg.threads},
                {"out_dir", cfg.out_dir},
                {"profile", cfg.profile},
                {"raw", cfg.raw}};
    j["cell"] = {{"side_m", cfg.cell.side_m},
                 {"carrier_hz", cfg.cell.carrier_hz},
                 {"bandwidth_hz", cfg.cell.bandwidth_hz},
                 {"pathloss_ref_db", cfg.cell.pathloss_ref_db},
                 {"pathloss_exponent", cfg.cell.pathloss_exponent},
                 {"shadowing_sigma_db", cfg.cell.shadowing_sigma_db},
                 {"noise_figure_db", cfg.cell.noise_figure_db},
                 {"target_sinr_db", cfg.cell.target_sinr_db},
                 {"min_distance_m", cfg.cell.min_distance_m},
                 {"ap_height_m", cfg.cell.ap_height_m}};
    j["array"] = {{"nx", cfg.array.nx},
                  {"ny", cfg.array.ny},
                  {"spacing_wavelengths", cfg.array.spacing_wavelengths}};
    j["solver"] = {{"kind", to_string(cfg.solver.kind)},
                   {"condition_ceiling", cfg.solver.condition_ceiling},
                   {"refine", cfg.solver.refine}};
    j["fig3"] = {{"n_values", cfg.fig3.n_values},
                 {"trials", cfg.fig3.trials},
                 {"alloc_gains",
                  cfg.fig3.alloc_gains == GainBasis::path_loss ? "path_loss" : "shadowed"},
                 {"p_max_w", cfg.fig3.p_max_w}};
    j["fig4"] = {{"n_values", cfg.fig4.n_values},
                 {"trials", cfg.fig4.trials},
                 {"drops", cfg.fig4.drops == DropStyle::clustered ? "clustered" : "uniform"},
                 {"cluster_radius_m", cfg.fig4.cluster_radius_m},
                 {"cluster_min_separation_m", cfg.fig4.cluster_min_separation_m},
                 {"clusters_min", cfg.fig4.clusters_min},
                 {"clusters_max", cfg.fig4.clusters_max},
                 {"condition_ceiling", cfg.fig4.condition_ceiling},
                 {"p_max_w", cfg.fig4.p_max_w}};
    j["fig5"] = {{"n_bits_values", cfg.fig5.n_bits_values},
                 {"min_bits_per_point", cfg.fig5.min_bits_per_point},
                 {"es_joules", cfg.fig5.es_joules},
                 {"es_over_n0", cfg.fig5.es_over_n0},
                 {"tx_nx", cfg.fig5.tx_nx},
                 {"tx_ny", cfg.fig5.tx_ny},
                 {"rx_range_m", cfg.fig5.rx_range_m}};
    return j;
}

/// One manifest per run: everything needed to reproduce the CSV bitwise, plus
/// wall-clock timestamps (the only fields that vary between identical runs).
struct RunManifest {
    std::string subcommand;
    ExperimentConfig config;
    std::vector<std::string> outputs;
    std::chrono::system_clock::time_point started_at;
    std::chrono::system_clock::time_point finished_at;
};

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["version"] = kVersion;
    j["profile"] = m.config.profile;
    j["master_seed"] = m.config.master_seed;
    j["config"] = config_to_json(m.config);
    j["outputs"] = m.outputs;
    j["started_at"] = iso8601_utc(m.started_at);
    j["finished_at"] = iso8601_utc(m.finished_at);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace bbma
