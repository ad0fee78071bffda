#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bbma/channel.hpp"
#include "bbma/p2p.hpp"
#include "bbma/power.hpp"
#include "bbma/rng.hpp"
#include "bbma/scheduler.hpp"
#include "bbma/steering.hpp"

namespace bbma {

/// Which gains the power allocators see in the fig3 sweep. Eq.-5-style mean
/// gains (path loss only) keep the per-class power pinned to the cell-border
/// loss; the shadowed variant feeds the per-drop frozen shadowing through the
/// allocation as well.
enum class GainBasis { path_loss, shadowed };

enum class DropStyle { uniform, clustered };

struct Fig3Config {
    std::vector<int> n_values{10, 25, 50, 100, 150, 200, 250, 300};
    int trials = 50;
    GainBasis alloc_gains = GainBasis::path_loss;
    double p_max_w = 19.952623149688797; // 43 dBm
};

struct Fig4Config {
    std::vector<int> n_values{10, 25, 50, 100, 150, 200};
    int trials = 50;
    DropStyle drops = DropStyle::clustered;
    double cluster_radius_m = 2.0;
    double cluster_min_separation_m = 1.2;
    int clusters_min = 8;
    int clusters_max = 16;
    double condition_ceiling = 1e30;
    double p_max_w = 19.952623149688797;
};

struct Fig5Config {
    std::vector<int> n_bits_values{1, 2, 4, 8, 16, 32};
    std::uint64_t min_bits_per_point = 1000000;
    double es_joules = 1.0;
    double es_over_n0 = 10.0;
    int tx_nx = 128;
    int tx_ny = 1;
    double rx_range_m = 2.0;
};

struct SolverConfig {
    SolverKind kind = SolverKind::orthogonal_factorization;
    double condition_ceiling = 1e12;
    bool refine = false;
};

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    int threads = 0; // 0 = auto
    std::string out_dir = "out";
    std::string profile = "paper";
    bool raw = false;
    CellConfig cell;
    ArrayGeometry array;
    SolverConfig solver;
    Fig3Config fig3;
    Fig4Config fig4;
    Fig5Config fig5;

    void validate() const {
        cell.validate();
        array.validate();
        if (fig3.trials < 1 || fig4.trials < 1)
            throw std::invalid_argument("trials must be >= 1");
        if (fig3.n_values.empty() || fig4.n_values.empty() || fig5.n_bits_values.empty())
            throw std::invalid_argument("sweep lists must be non-empty");
        if (fig5.min_bits_per_point < 1)
            throw std::invalid_argument("fig5.min_bits_per_point must be >= 1");
        for (int n : fig3.n_values)
            if (n < 1) throw std::invalid_argument("fig3.n_values entries must be >= 1");
        for (int n : fig4.n_values)
            if (n < 1) throw std::invalid_argument("fig4.n_values entries must be >= 1");
        for (int n : fig5.n_bits_values)
            if (n < 1 || n > 62)
                throw std::invalid_argument("fig5.n_bits_values entries must be in 1..62");
    }
};

/// "paper" = the full-size array; "desk" = a 16x16 array sized for quick runs.
inline void apply_profile(ExperimentConfig& cfg, const std::string& profile) {
    if (profile == "paper") {
        cfg.array.nx = 64;
        cfg.array.ny = 64;
    } else if (profile == "desk") {
        cfg.array.nx = 16;
        cfg.array.ny = 16;
    } else {
        throw std::invalid_argument("unknown profile '" + profile + "' (paper|desk)");
    }
    cfg.profile = profile;
}

/// Effective worker count: config value if positive, else hardware
/// concurrency; BBMA_THREADS (when > 0) caps the result.
inline int worker_count(int configured) {
    int n = configured > 0 ? configured
                           : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("BBMA_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return n;
}

/// Runs fn(0..count-1) on up to `threads` workers. Callers write results into
/// preallocated slots indexed by the argument, so aggregation stays
/// independent of scheduling order.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    const int workers = static_cast<int>(
        std::min<std::size_t>(count, static_cast<std::size_t>(worker_count(threads))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// One Monte Carlo trial's outputs; fields not produced by a given experiment
/// stay NaN (doubles) or zero (counters).
struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    int n = 0;
    double conventional_total_w = std::numeric_limits<double>::quiet_NaN();
    double bbma_total_w = std::numeric_limits<double>::quiet_NaN();
    double condition_number = std::numeric_limits<double>::quiet_NaN();
    double max_null_residual = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_simulated = 0;
    double capacity_bps_hz = std::numeric_limits<double>::quiet_NaN();
    double ber = std::numeric_limits<double>::quiet_NaN();
    bool flagged = false;
};

struct SweepStats {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_mean = 0.0;
    int count = 0;
};

inline SweepStats summarize(const std::vector<double>& xs) {
    SweepStats s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

/// Random binary demands -> two-class state (class c carries symbol c).
inline ClassState random_binary_classes(Rng& rng, std::span<const Terminal> terminals) {
    ClassState state;
    state.symbol_of_class = {{1, 1}, {2, 2}};
    for (const auto& t : terminals)
        state.membership[t.id] = 1 + static_cast<int>(rng.next_u64() & 1);
    return state;
}

/// Stress drop: terminals land in randomly placed tight clusters, driving the
/// steering columns toward collinearity. A minimum intra-cluster separation
/// bounds the worst pair so the conditioning spread stays measurable instead
/// of collapsing to rank deficiency.
inline std::vector<Terminal> clustered_drop(Rng& rng, int n, const CellConfig& cell,
                                            const Fig4Config& fig4) {
    cell.validate();
    if (n < 1) throw std::invalid_argument("clustered_drop: n must be >= 1");
    const int span = fig4.clusters_max - fig4.clusters_min + 1;
    int k = fig4.clusters_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    k = std::min(k, n);
    const double half = cell.side_m / 2.0 - fig4.cluster_radius_m;
    std::vector<std::array<double, 2>> centers;
    for (int c = 0; c < k; ++c) {
        double x, y;
        do {
            x = rng.uniform(-half, half);
            y = rng.uniform(-half, half);
        } while (std::hypot(x, y) < cell.min_distance_m + fig4.cluster_radius_m);
        centers.push_back({x, y});
    }
    std::vector<std::vector<std::array<double, 2>>> placed(static_cast<std::size_t>(k));
    std::vector<Terminal> out;
    const double min_sep2 = fig4.cluster_min_separation_m * fig4.cluster_min_separation_m;
    for (int i = 0; i < n; ++i) {
        double px = 0.0, py = 0.0;
        std::size_t ci = 0;
        for (int attempt = 0; attempt < 200; ++attempt) {
            ci = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)));
            const double ang = rng.uniform(0.0, 2.0 * kPi);
            const double rr = fig4.cluster_radius_m * std::sqrt(rng.uniform());
            px = centers[ci][0] + rr * std::cos(ang);
            py = centers[ci][1] + rr * std::sin(ang);
            bool clear = true;
            for (const auto& q : placed[ci])
                if ((px - q[0]) * (px - q[0]) + (py - q[1]) * (py - q[1]) < min_sep2) {
                    clear = false;
                    break;
                }
            if (clear) break;
        }
        placed[ci].push_back({px, py});
        Terminal t;
        t.id = i;
        t.position = {px, py, -cell.ap_height_m};
        t.shadowing_db = rng.normal(0.0, cell.shadowing_sigma_db);
        out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fig. 3: required transmit power vs number of terminals
// ---------------------------------------------------------------------------

struct Fig3Row {
    int n_terminals = 0;
    SweepStats conv;
    SweepStats bbma;
};

struct Fig3Result {
    std::vector<Fig3Row> rows;
    std::vector<TrialRecord> raw;
};

inline TrialRecord fig3_trial(const ExperimentConfig& cfg, int n, int trial) {
    const std::uint64_t seed =
        derive_trial_seed(cfg.master_seed, "fig3/N=" + std::to_string(n),
                          static_cast<std::uint64_t>(trial));
    Rng rng(seed);
    const auto terminals = drop_terminals(rng, n, cfg.cell);
    const double noise = noise_power_w(cfg.cell);
    const double target = cfg.cell.target_sinr_linear();

    std::map<int, LinkGain> alloc_gains, inst_gains;
    for (const auto& t : terminals) {
        inst_gains[t.id] = channel_gain(cfg.cell, t);
        alloc_gains[t.id] = cfg.fig3.alloc_gains == GainBasis::path_loss
                                ? mean_path_gain(cfg.cell, t.distance_m())
                                : inst_gains[t.id];
    }
    const auto conv = conventional_alloc(alloc_gains, target, noise, cfg.fig3.p_max_w);
    const auto classes = random_binary_classes(rng, terminals);
    const auto bbma = bbma_alloc(classes, alloc_gains, target, noise, cfg.fig3.p_max_w);

    // capacity sample of the conventional allocation under full orthogonality,
    // evaluated on the drop's shadowed gains
    const auto report =
        sinr(conv, inst_gains, OrthogonalityModel::constant(0.0), noise, target);
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = seed;
    rec.n = n;
    rec.conventional_total_w = conv.total_w;
    rec.bbma_total_w = bbma.total_w;
    rec.capacity_bps_hz = ergodic_capacity(std::span<const SinrReport>{&report, 1});
    return rec;
}

inline Fig3Result run_fig3(const ExperimentConfig& cfg) {
    cfg.validate();
    Fig3Result result;
    for (const int n : cfg.fig3.n_values) {
        std::vector<TrialRecord> recs(static_cast<std::size_t>(cfg.fig3.trials));
        parallel_for(recs.size(), cfg.threads,
                     [&](std::size_t t) { recs[t] = fig3_trial(cfg, n, static_cast<int>(t)); });
        std::vector<double> conv, bbma;
        for (const auto& r : recs) {
            conv.push_back(r.conventional_total_w);
            bbma.push_back(r.bbma_total_w);
        }
        Fig3Row row;
        row.n_terminals = n;
        row.conv = summarize(conv);
        row.bbma = summarize(bbma);
        result.rows.push_back(row);
        if (cfg.raw) result.raw.insert(result.raw.end(), recs.begin(), recs.end());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Fig. 4: BER from weight-solve numerical error vs number of terminals
// ---------------------------------------------------------------------------

struct Fig4Row {
    int n_terminals = 0;
    SolverKind solver = SolverKind::explicit_inverse;
    int trials = 0;
    int flagged = 0;
    double mean_condition_number = std::numeric_limits<double>::quiet_NaN();
    double mean_max_residual = std::numeric_limits<double>::quiet_NaN();
    double mean_ber = std::numeric_limits<double>::quiet_NaN();
    double stderr_ber = std::numeric_limits<double>::quiet_NaN();
};

struct Fig4Result {
    std::vector<Fig4Row> rows;
    // raw records per solver, aligned by (n, trial) so seeds pair up
    std::vector<TrialRecord> raw_explicit_inverse;
    std::vector<TrialRecord> raw_orthogonal_factorization;
};

/// Paired evaluation of one drop under both solver routes.
struct Fig4TrialPair {
    TrialRecord explicit_inverse;
    TrialRecord orthogonal_factorization;
};

inline Fig4TrialPair fig4_trial(const ExperimentConfig& cfg, int n, int trial) {
    const std::uint64_t seed =
        derive_trial_seed(cfg.master_seed, "fig4/N=" + std::to_string(n),
                          static_cast<std::uint64_t>(trial));
    Rng rng(seed);
    const auto terminals = cfg.fig4.drops == DropStyle::clustered
                               ? clustered_drop(rng, n, cfg.cell, cfg.fig4)
                               : drop_terminals(rng, n, cfg.cell);
    const double noise = noise_power_w(cfg.cell);
    const double target = cfg.cell.target_sinr_linear();
    std::map<int, LinkGain> gains;
    for (const auto& t : terminals) gains[t.id] = channel_gain(cfg.cell, t);

    const auto classes = random_binary_classes(rng, terminals);
    std::vector<ClassSelectorRow> selectors(2);
    std::vector<int> class_of_row{1, 2};
    for (int c = 0; c < 2; ++c) {
        selectors[static_cast<std::size_t>(c)].entries.resize(terminals.size());
        for (const auto& t : terminals)
            selectors[static_cast<std::size_t>(c)].entries[static_cast<std::size_t>(t.id)] =
                classes.membership.at(t.id) == c + 1 ? 1 : 0;
    }
    verify_partition(selectors, terminals.size());
    const auto a = build_steering_matrix(cfg.array, terminals);
    const auto alloc = bbma_alloc(classes, gains, target, noise, cfg.fig4.p_max_w);
    const double condition = condition_number_of(a);

    Fig4TrialPair pair;
    for (const SolverKind kind :
         {SolverKind::explicit_inverse, SolverKind::orthogonal_factorization}) {
        TrialRecord rec;
        rec.trial = trial;
        rec.seed = seed;
        rec.n = n;
        rec.condition_number = condition;
        try {
            if (!(condition <= cfg.fig4.condition_ceiling))
                throw ConditionCeilingExceeded(condition, cfg.fig4.condition_ceiling);
            // ceiling already enforced on the shared estimate
            NullSolver solver(a, kind, std::numeric_limits<double>::infinity(),
                              cfg.solver.refine);
            std::vector<WeightVector> weights;
            std::vector<ClassSelectorRow> used;
            std::vector<int> used_class;
            for (int c = 0; c < 2; ++c)
                if (selectors[static_cast<std::size_t>(c)].count_selected() > 0) {
                    weights.push_back(solver.weights(selectors[static_cast<std::size_t>(c)]));
                    used.push_back(selectors[static_cast<std::size_t>(c)]);
                    used_class.push_back(c + 1);
                }
            rec.max_null_residual = response_residuals(a, weights, used).max_null_residual;

            std::map<std::pair<int, int>, double> leakage;
            for (std::size_t c = 0; c < weights.size(); ++c) {
                const Eigen::VectorXcd resp = a.entries.adjoint() * weights[c].entries;
                for (const auto& t : terminals)
                    leakage[{t.id, used_class[c]}] = std::norm(resp(t.id));
            }
            const auto report = sinr(alloc, gains,
                                     OrthogonalityModel::from_class_leakage(std::move(leakage)),
                                     noise, target);
            double ber_sum = 0.0;
            for (const auto& [t, gamma] : report.sinr_linear) ber_sum += antipodal_ber(gamma);
            rec.ber = ber_sum / static_cast<double>(terminals.size());
        } catch (const NumericalFailure&) {
            rec.flagged = true;
        }
        (kind == SolverKind::explicit_inverse ? pair.explicit_inverse
                                              : pair.orthogonal_factorization) = rec;
    }
    return pair;
}

inline Fig4Result run_fig4(const ExperimentConfig& cfg) {
    cfg.validate();
    for (const int n : cfg.fig4.n_values)
        if (n > cfg.array.size())
            throw std::invalid_argument("fig4 needs N <= antenna count (N=" + std::to_string(n) +
                                        ", s=" + std::to_string(cfg.array.size()) + ")");
    Fig4Result result;
    for (const int n : cfg.fig4.n_values) {
        std::vector<Fig4TrialPair> pairs(static_cast<std::size_t>(cfg.fig4.trials));
        parallel_for(pairs.size(), cfg.threads,
                     [&](std::size_t t) { pairs[t] = fig4_trial(cfg, n, static_cast<int>(t)); });
        for (const SolverKind kind :
             {SolverKind::explicit_inverse, SolverKind::orthogonal_factorization}) {
            Fig4Row row;
            row.n_terminals = n;
            row.solver = kind;
            row.trials = cfg.fig4.trials;
            std::vector<double> conds, resids, bers;
            for (const auto& pair : pairs) {
                const TrialRecord& rec = kind == SolverKind::explicit_inverse
                                             ? pair.explicit_inverse
                                             : pair.orthogonal_factorization;
                if (rec.flagged) {
                    ++row.flagged;
                    continue;
                }
                conds.push_back(rec.condition_number);
                resids.push_back(rec.max_null_residual);
                bers.push_back(rec.ber);
            }
            row.mean_condition_number = summarize(conds).mean;
            row.mean_max_residual = summarize(resids).mean;
            const auto ber_stats = summarize(bers);
            row.mean_ber = ber_stats.mean;
            row.stderr_ber = ber_stats.stderr_mean;
            result.rows.push_back(row);
        }
        for (const auto& pair : pairs) {
            result.raw_explicit_inverse.push_back(pair.explicit_inverse);
            result.raw_orthogonal_factorization.push_back(pair.orthogonal_factorization);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Fig. 5: error probability vs spectral efficiency at fixed Es/N0
// ---------------------------------------------------------------------------

struct Fig5Row {
    WordErrorRow bbma;
    std::uint64_t mpsk_order = 0;
    double mpsk_ser_analytic = 0.0;
};

inline std::vector<Fig5Row> run_fig5(const ExperimentConfig& cfg) {
    cfg.validate();
    ArrayGeometry tx;
    tx.nx = cfg.fig5.tx_nx;
    tx.ny = cfg.fig5.tx_ny;
    tx.spacing_wavelengths = cfg.array.spacing_wavelengths;
    const double n0 = cfg.fig5.es_joules / cfg.fig5.es_over_n0;
    const auto rows = word_error_curve(
        tx, cfg.cell.wavelength_m(), cfg.fig5.rx_range_m, cfg.fig5.n_bits_values,
        cfg.fig5.es_joules, n0, cfg.fig5.min_bits_per_point, cfg.master_seed,
        cfg.solver.kind, cfg.solver.condition_ceiling);
    std::vector<Fig5Row> out;
    for (const auto& row : rows) {
        Fig5Row r;
        r.bbma = row;
        r.mpsk_order = std::uint64_t{1} << row.n_bits;
        r.mpsk_ser_analytic = mpsk_ser(r.mpsk_order, cfg.fig5.es_over_n0);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// check-weights: residual verification on uniform drops
// ---------------------------------------------------------------------------

struct WeightCheckRow {
    std::uint64_t seed = 0;
    double condition_number = 0.0;
    double max_error_explicit_inverse = 0.0;
    double max_error_orthogonal_factorization = 0.0;
};

/// Max |w^H a_n - D(n)| over both classes for both solver routes on uniform
/// drops; the worst response deviation a correct solve should keep tiny.
inline std::vector<WeightCheckRow> run_check_weights(const ExperimentConfig& cfg, int n_terminals,
                                                     int n_seeds) {
    cfg.validate();
    if (n_terminals < 1 || n_terminals > cfg.array.size())
        throw std::invalid_argument("check-weights needs 1 <= N <= antenna count");
    if (n_seeds < 1) throw std::invalid_argument("check-weights needs at least one seed");
    std::vector<WeightCheckRow> rows(static_cast<std::size_t>(n_seeds));
    parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_trial_seed(cfg.master_seed, "check-weights", i);
        Rng rng(seed);
        const auto terminals = drop_terminals(rng, n_terminals, cfg.cell);
        const auto classes = random_binary_classes(rng, terminals);
        std::vector<ClassSelectorRow> selectors(2);
        for (int c = 0; c < 2; ++c) {
            selectors[static_cast<std::size_t>(c)].entries.resize(terminals.size());
            for (const auto& t : terminals)
                selectors[static_cast<std::size_t>(c)]
                    .entries[static_cast<std::size_t>(t.id)] =
                    classes.membership.at(t.id) == c + 1 ? 1 : 0;
        }
        const auto a = build_steering_matrix(cfg.array, terminals);
        WeightCheckRow row;
        row.seed = seed;
        row.condition_number = condition_number_of(a);
        for (const SolverKind kind :
             {SolverKind::explicit_inverse, SolverKind::orthogonal_factorization}) {
            NullSolver solver(a, kind, cfg.solver.condition_ceiling, cfg.solver.refine);
            std::vector<WeightVector> weights;
            std::vector<ClassSelectorRow> used;
            for (const auto& sel : selectors)
                if (sel.count_selected() > 0) {
                    weights.push_back(solver.weights(sel));
                    used.push_back(sel);
                }
            const auto resid = response_residuals(a, weights, used);
            const double worst = std::max(resid.max_in_class_error, resid.max_null_residual);
            if (kind == SolverKind::explicit_inverse)
                row.max_error_explicit_inverse = worst;
            else
                row.max_error_orthogonal_factorization = worst;
        }
        rows[i] = row;
    });
    return rows;
}

} // namespace bbma
