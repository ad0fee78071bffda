#include <catch2/catch_amalgamated.hpp>

#include "bbma/config.hpp"

using namespace bbma;

TEST_CASE("empty config yields the documented defaults", "[config]") {
    const auto cfg = parse_experiment_config("");
    CHECK(cfg.cell.target_sinr_db == 15.0);
    CHECK(cfg.cell.shadowing_sigma_db == 8.0);
    CHECK(cfg.cell.bandwidth_hz == 10e6);
    CHECK(cfg.cell.noise_figure_db == 10.0);
    CHECK(cfg.array.nx == 64);
    CHECK(cfg.array.ny == 64);
    CHECK(cfg.array.spacing_wavelengths == 0.5);
    CHECK(cfg.profile == "paper");
    CHECK(cfg.master_seed == 1);
    CHECK(cfg.solver.kind == SolverKind::orthogonal_factorization);
    CHECK(cfg.fig3.p_max_w == Catch::Approx(19.952623149688797));
    CHECK(cfg.fig3.n_values == std::vector<int>{10, 25, 50, 100, 150, 200, 250, 300});
    CHECK(cfg.fig5.n_bits_values == std::vector<int>{1, 2, 4, 8, 16, 32});
}

TEST_CASE("values are parsed and validated", "[config]") {
    SECTION("numbers, booleans, strings and arrays") {
        const auto cfg = parse_experiment_config(R"(
[run]
master_seed = 42
raw = true
out_dir = "results"

[cell]
target_sinr_db = 12.5   # trailing comment
bandwidth_hz = 5e6

[fig3]
n_values = [5, 10, 20]
trials = 7
)");
        CHECK(cfg.master_seed == 42);
        CHECK(cfg.raw);
        CHECK(cfg.out_dir == "results");
        CHECK(cfg.cell.target_sinr_db == 12.5);
        CHECK(cfg.cell.bandwidth_hz == 5e6);
        CHECK(cfg.fig3.n_values == std::vector<int>{5, 10, 20});
        CHECK(cfg.fig3.trials == 7);
    }

    SECTION("a non-numeric value names the key and line") {
        try {
            parse_experiment_config("[cell]\ntarget_sinr_db = \"abc\"\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("cell.target_sinr_db") != std::string::npos);
            CHECK(msg.find("line 2") != std::string::npos);
        }
    }

    SECTION("unknown keys are rejected") {
        try {
            parse_experiment_config("[cell]\nsidelength_m = 100\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("cell.sidelength_m") != std::string::npos);
        }
    }

    SECTION("range violations name the key") {
        CHECK_THROWS_AS(parse_experiment_config("[cell]\nside_m = -5\n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment_config("[fig3]\ntrials = 0\n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment_config("[fig5]\nn_bits_values = [0]\n"), ConfigError);
    }

    SECTION("malformed lines carry line numbers") {
        CHECK_THROWS_AS(parse_experiment_config("[cell\nside_m = 10\n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment_config("side_m\n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment_config("[cell]\nside_m = [1, \n"), ConfigError);
        CHECK_THROWS_AS(parse_experiment_config("[cell]\nside_m = 10\nside_m = 11\n"),
                        ConfigError);
    }
}

TEST_CASE("profiles and overrides", "[config]") {
    SECTION("desk profile shrinks the array") {
        const auto cfg = parse_experiment_config("", std::string("desk"));
        CHECK(cfg.array.nx == 16);
        CHECK(cfg.array.ny == 16);
        CHECK(cfg.profile == "desk");
    }

    SECTION("profile can come from the file") {
        const auto cfg = parse_experiment_config("[run]\nprofile = \"desk\"\n");
        CHECK(cfg.array.nx == 16);
    }

    SECTION("the flag wins over the file profile") {
        const auto cfg = parse_experiment_config("[run]\nprofile = \"desk\"\n",
                                                 std::string("paper"));
        CHECK(cfg.array.nx == 64);
    }

    SECTION("explicit array keys win over the profile") {
        const auto cfg = parse_experiment_config("[array]\nnx = 16\nny = 16\n");
        CHECK(cfg.array.nx == 16);
        CHECK(cfg.array.ny == 16);
        CHECK(cfg.profile == "paper");
    }

    SECTION("unknown profile is rejected") {
        CHECK_THROWS(parse_experiment_config("", std::string("pocket")));
    }
}

TEST_CASE("solver and experiment enums", "[config]") {
    CHECK(parse_experiment_config("[solver]\nkind = \"explicit_inverse\"\n").solver.kind ==
          SolverKind::explicit_inverse);
    CHECK(parse_experiment_config("[fig3]\nalloc_gains = \"shadowed\"\n").fig3.alloc_gains ==
          GainBasis::shadowed);
    CHECK(parse_experiment_config("[fig4]\ndrops = \"uniform\"\n").fig4.drops ==
          DropStyle::uniform);
    CHECK_THROWS_AS(parse_experiment_config("[solver]\nkind = \"qr\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("[fig4]\ndrops = \"ring\"\n"), ConfigError);
}
