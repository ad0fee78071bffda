// bbma — command-line front end: reproduces the three experiment figures as
// CSV runs, checks null-steering residuals, and prints the class-scheduling
// worked example.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bbma/config.hpp"
#include "bbma/csv.hpp"
#include "bbma/experiments.hpp"
#include "bbma/manifest.hpp"
#include "bbma/scheduler.hpp"
#include "bbma/version.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string profile;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool raw = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "TOML config file");
    cmd->add_option("--out", opts.out_path, "output CSV path (default: <out_dir>/<name>-<timestamp>.csv)");
    cmd->add_option("--profile", opts.profile, "array profile: paper (64x64) or desk (16x16)")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--seed", opts.seed, "master seed (overrides config file)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_flag("--raw", opts.raw, "also write per-trial records");
}

bbma::ExperimentConfig resolve_config(const CommonOpts& opts) {
    std::optional<std::string> profile;
    if (!opts.profile.empty()) profile = opts.profile;
    bbma::ExperimentConfig cfg = opts.config_path.empty()
                                     ? bbma::parse_experiment_config("", profile)
                                     : bbma::load_experiment_config(opts.config_path, profile);
    if (opts.seed_given) cfg.master_seed = opts.seed;
    if (opts.raw) cfg.raw = true;
    return cfg;
}

std::string timestamp_utc() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path resolve_csv_path(const bbma::ExperimentConfig& cfg, const CommonOpts& opts,
                          const std::string& stem) {
    if (!opts.out_path.empty()) return opts.out_path;
    return fs::path(cfg.out_dir) / (stem + "-" + timestamp_utc() + ".csv");
}

fs::path meta_path_for(fs::path p) { return p.replace_extension(".meta"); }

fs::path raw_path_for(const fs::path& p) {
    fs::path raw = p;
    raw.replace_extension();
    raw += ".raw.csv";
    return raw;
}

int run_figure(const std::string& name, const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    bbma::RunManifest manifest;
    manifest.subcommand = name;
    manifest.config = cfg;
    manifest.started_at = std::chrono::system_clock::now();

    const fs::path csv_path = resolve_csv_path(cfg, opts, name);
    manifest.outputs.push_back(csv_path.string());

    if (name == "fig3") {
        const auto result = bbma::run_fig3(cfg);
        bbma::write_fig3_csv(csv_path, result.rows);
        if (cfg.raw) {
            const fs::path raw = raw_path_for(csv_path);
            bbma::write_raw_csv(raw, "fig3", {{"", &result.raw}});
            manifest.outputs.push_back(raw.string());
        }
        std::cout << "fig3: " << result.rows.size() << " sweep points x " << cfg.fig3.trials
                  << " trials -> " << csv_path.string() << "\n";
    } else if (name == "fig4") {
        const auto result = bbma::run_fig4(cfg);
        bbma::write_fig4_csv(csv_path, result.rows);
        if (cfg.raw) {
            const fs::path raw = raw_path_for(csv_path);
            bbma::write_raw_csv(raw, "fig4",
                                {{"explicit_inverse", &result.raw_explicit_inverse},
                                 {"orthogonal_factorization",
                                  &result.raw_orthogonal_factorization}});
            manifest.outputs.push_back(raw.string());
        }
        std::cout << "fig4: " << result.rows.size() << " rows -> " << csv_path.string() << "\n";
    } else {
        const auto rows = bbma::run_fig5(cfg);
        bbma::write_fig5_csv(csv_path, rows);
        std::cout << "fig5: " << rows.size() << " sweep points, >= "
                  << cfg.fig5.min_bits_per_point << " bits each -> " << csv_path.string()
                  << "\n";
    }

    manifest.finished_at = std::chrono::system_clock::now();
    bbma::write_manifest(meta_path_for(csv_path), manifest);
    return 0;
}

int run_check_weights_cmd(const CommonOpts& opts, int n_terminals, int n_seeds) {
    const auto cfg = resolve_config(opts);
    bbma::RunManifest manifest;
    manifest.subcommand = "check-weights";
    manifest.config = cfg;
    manifest.started_at = std::chrono::system_clock::now();

    const auto rows = bbma::run_check_weights(cfg, n_terminals, n_seeds);
    double worst_inv = 0.0, worst_qr = 0.0, worst_cond = 0.0;
    for (const auto& r : rows) {
        worst_inv = std::max(worst_inv, r.max_error_explicit_inverse);
        worst_qr = std::max(worst_qr, r.max_error_orthogonal_factorization);
        worst_cond = std::max(worst_cond, r.condition_number);
    }
    const fs::path csv_path = resolve_csv_path(cfg, opts, "check-weights");
    bbma::write_check_weights_csv(csv_path, rows);
    manifest.outputs.push_back(csv_path.string());
    manifest.finished_at = std::chrono::system_clock::now();
    bbma::write_manifest(meta_path_for(csv_path), manifest);

    std::cout << "check-weights: N=" << n_terminals << ", " << n_seeds << " seeds, s="
              << cfg.array.size() << "\n"
              << "  worst condition number        " << bbma::format_double(worst_cond) << "\n"
              << "  worst |w^H a - D| (inverse)   " << bbma::format_double(worst_inv) << "\n"
              << "  worst |w^H a - D| (factored)  " << bbma::format_double(worst_qr) << "\n"
              << "  -> " << csv_path.string() << "\n";
    return 0;
}

std::string class_list(const bbma::ClassState& state, int cls) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [t, c] : state.membership)
        if (c == cls) {
            out << (first ? "" : " ") << "T" << t;
            first = false;
        }
    return out.str();
}

std::string mapping_text(const std::map<int, int>& symbol_of_class) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [c, s] : symbol_of_class) {
        out << (first ? "" : ", ") << "S" << s << "->Class" << c;
        first = false;
    }
    return out.str();
}

void print_moves(const bbma::MovePlan& plan, int classes) {
    for (int c = 1; c <= classes; ++c) {
        std::ostringstream line;
        bool any = false;
        for (const auto& mv : plan.moves)
            if (mv.to_class == c) {
                line << (any ? " " : "") << "T" << mv.terminal;
                any = true;
            }
        if (any) std::cout << "  to Class" << c << ": " << line.str() << "\n";
    }
}

int run_table1_demo(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    bbma::RunManifest manifest;
    manifest.subcommand = "table1-demo";
    manifest.config = cfg;
    manifest.started_at = std::chrono::system_clock::now();

    bbma::ClassState state;
    state.symbol_of_class = {{1, 1}, {2, 2}};
    for (int t : {1, 4, 5, 7, 10, 11}) state.membership[t] = 1;
    for (int t : {2, 3, 6, 8, 9}) state.membership[t] = 2;
    bbma::DemandVector demand;
    demand.next_symbol = {{1, 2}, {2, 1}, {3, 2}, {4, 1}, {5, 2}, {6, 2},
                          {7, 2}, {8, 1}, {9, 1}, {10, 1}, {11, 2}};

    std::cout << "Table I worked example (11 terminals, binary modulation)\n\n";
    std::cout << "classes at t_k:\n";
    for (int c = 1; c <= 2; ++c)
        std::cout << "  Class" << c << " (S" << state.symbol_of_class.at(c)
                  << "): " << class_list(state, c) << "\n";
    std::cout << "\nnext symbols at t_k+1:\n ";
    for (const auto& [t, s] : demand.next_symbol) std::cout << " T" << t << "->S" << s;
    std::cout << "\n\n";

    const auto static_plan = bbma::static_assign(state, demand);
    std::cout << "static allocation (" << mapping_text(static_plan.new_symbol_of_class) << "): "
              << static_plan.moves.size() << " moves\n";
    print_moves(static_plan, 2);

    const auto dynamic_plan = bbma::dynamic_assign(state, demand);
    std::cout << "\ndynamic allocation: " << mapping_text(dynamic_plan.new_symbol_of_class)
              << ", " << dynamic_plan.moves.size() << " moves\n";
    print_moves(dynamic_plan, 2);

    const auto next = bbma::apply_plan(state, dynamic_plan);
    std::cout << "\nclasses after dynamic apply:\n";
    for (int c = 1; c <= 2; ++c)
        std::cout << "  Class" << c << " (S" << next.symbol_of_class.at(c)
                  << "): " << class_list(next, c) << "\n";

    manifest.finished_at = std::chrono::system_clock::now();
    const fs::path meta = opts.out_path.empty()
                              ? fs::path(cfg.out_dir) / ("table1-demo-" + timestamp_utc() + ".meta")
                              : meta_path_for(fs::path(opts.out_path));
    bbma::write_manifest(meta, manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bbma: symbol-class broadcast power allocation link simulator"};
    app.set_version_flag("--version", bbma::kVersion);
    app.require_subcommand(1);

    CommonOpts fig3_opts, fig4_opts, fig5_opts, check_opts, table_opts;
    int check_n = 100, check_seeds = 30;

    add_common(app.add_subcommand("fig3", "transmit power vs number of terminals"), fig3_opts);
    add_common(app.add_subcommand("fig4", "BER from weight-solve numerical error"), fig4_opts);
    add_common(app.add_subcommand("fig5", "error probability vs spectral efficiency"), fig5_opts);
    auto* check = app.add_subcommand("check-weights", "null-steering residual verification");
    add_common(check, check_opts);
    check->add_option("--n", check_n, "terminals per drop")->check(CLI::PositiveNumber);
    check->add_option("--seeds", check_seeds, "number of drops")->check(CLI::PositiveNumber);
    add_common(app.add_subcommand("table1-demo", "print the class-scheduling worked example"),
               table_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (app.got_subcommand("fig3")) return run_figure("fig3", fig3_opts);
        if (app.got_subcommand("fig4")) return run_figure("fig4", fig4_opts);
        if (app.got_subcommand("fig5")) return run_figure("fig5", fig5_opts);
        if (app.got_subcommand("check-weights"))
            return run_check_weights_cmd(check_opts, check_n, check_seeds);
        if (app.got_subcommand("table1-demo")) return run_table1_demo(table_opts);
        std::cerr << app.help();
        return 1;
    } catch (const bbma::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const bbma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
