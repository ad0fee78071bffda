#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "bbma/channel.hpp"
#include "bbma/scheduler.hpp"

namespace bbma {

enum class AllocMode { per_terminal, per_class };

/// Transmit power allocation with its budget verdict. In per_class mode the
/// powers map is keyed by class index and membership records which class each
/// terminal draws from; in per_terminal mode powers are keyed by terminal id
/// and membership is empty.
struct PowerAllocation {
    AllocMode mode = AllocMode::per_terminal;
    std::map<int, double> powers;
    std::map<int, int> membership;
    double total_w = 0.0;
    double p_max_w = 0.0;
    bool feasible = true;
};

/// Cross-interference factors. The constant and pairwise forms model a
/// multiple-access technique's orthogonality; the class-leakage form carries
/// measured null residuals |w_c^H a_i|^2, which may exceed 1 when the weight
/// solve has broken down numerically.
class OrthogonalityModel {
public:
    static OrthogonalityModel constant(double alpha) {
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("orthogonality factor must be in [0, 1]");
        OrthogonalityModel m;
        m.constant_ = alpha;
        return m;
    }

    /// alpha[(victim terminal, interfering terminal)] for per-terminal SINR.
    static OrthogonalityModel from_pairs(std::map<std::pair<int, int>, double> alpha) {
        for (const auto& [key, a] : alpha)
            if (a < 0.0 || a > 1.0)
                throw std::invalid_argument("orthogonality factor must be in [0, 1]");
        OrthogonalityModel m;
        m.table_ = std::move(alpha);
        m.tabular_ = true;
        return m;
    }

    /// leakage[(victim terminal, interfering class)] for per-class SINR.
    static OrthogonalityModel from_class_leakage(std::map<std::pair<int, int>, double> leakage) {
        OrthogonalityModel m;
        m.table_ = std::move(leakage);
        m.tabular_ = true;
        return m;
    }

    double alpha(int victim, int interferer) const {
        if (!tabular_) return constant_;
        auto it = table_.find({victim, interferer});
        if (it == table_.end())
            throw std::invalid_argument("no orthogonality factor for pair (" +
                                        std::to_string(victim) + ", " +
                                        std::to_string(interferer) + ")");
        return it->second;
    }

private:
    double constant_ = 0.0;
    bool tabular_ = false;
    std::map<std::pair<int, int>, double> table_;
};

struct SinrReport {
    std::map<int, double> sinr_linear; // terminal id -> SINR
    bool all_meet_target = false;
};

/// Instantaneous SINR per terminal:
///   gamma_i = P_i G_i / (G_i * sum_{j != i} P_j alpha_ij + noise).
/// In per_class mode P_i is the terminal's class power and the interfering
/// sum runs over the other classes' powers.
inline SinrReport sinr(const PowerAllocation& alloc, const std::map<int, LinkGain>& gains,
                       const OrthogonalityModel& alpha, double noise_w, double target_linear) {
    SinrReport report;
    report.all_meet_target = true;
    if (alloc.mode == AllocMode::per_terminal) {
        for (const auto& [i, p_i] : alloc.powers) {
            auto g_it = gains.find(i);
            if (g_it == gains.end())
                throw std::invalid_argument("sinr: no gain for terminal " + std::to_string(i));
            const double g = g_it->second.gain_linear;
            double interference = 0.0;
            for (const auto& [j, p_j] : alloc.powers)
                if (j != i) interference += p_j * alpha.alpha(i, j);
            const double gamma = p_i * g / (g * interference + noise_w);
            report.sinr_linear[i] = gamma;
            report.all_meet_target &= (gamma >= target_linear);
        }
    } else {
        for (const auto& [i, c] : alloc.membership) {
            auto g_it = gains.find(i);
            if (g_it == gains.end())
                throw std::invalid_argument("sinr: no gain for terminal " + std::to_string(i));
            const double g = g_it->second.gain_linear;
            const double p_own = alloc.powers.at(c);
            double interference = 0.0;
            for (const auto& [c2, p_c2] : alloc.powers)
                if (c2 != c && p_c2 > 0.0) interference += p_c2 * alpha.alpha(i, c2);
            const double gamma = p_own * g / (g * interference + noise_w);
            report.sinr_linear[i] = gamma;
            report.all_meet_target &= (gamma >= target_linear);
        }
    }
    return report;
}

/// Conventional per-terminal allocation: P_i = noise * target / G_i, so each
/// terminal hits the target exactly under perfect orthogonality. Infeasible
/// totals are returned with feasible=false rather than raised.
inline PowerAllocation conventional_alloc(const std::map<int, LinkGain>& gains,
                                          double target_linear, double noise_w, double p_max_w) {
    PowerAllocation alloc;
    alloc.mode = AllocMode::per_terminal;
    alloc.p_max_w = p_max_w;
    for (const auto& [i, g] : gains) {
        if (g.gain_linear <= 0.0)
            throw std::invalid_argument("conventional_alloc: non-positive gain for terminal " +
                                        std::to_string(i));
        const double p = noise_w * target_linear / g.gain_linear;
        alloc.powers[i] = p;
        alloc.total_w += p;
    }
    alloc.feasible = alloc.total_w <= p_max_w;
    return alloc;
}

/// Per-class broadcast allocation: each class transmits the power its worst
/// (lowest gain) member needs, so every member reaches the target under
/// perfect orthogonality. Empty classes get zero power.
inline PowerAllocation bbma_alloc(const ClassState& classes, const std::map<int, LinkGain>& gains,
                                  double target_linear, double noise_w, double p_max_w) {
    classes.validate();
    PowerAllocation alloc;
    alloc.mode = AllocMode::per_class;
    alloc.p_max_w = p_max_w;
    alloc.membership = classes.membership;
    for (const auto& [c, s] : classes.symbol_of_class) alloc.powers[c] = 0.0;
    std::map<int, double> worst; // class -> min gain
    for (const auto& [t, c] : classes.membership) {
        auto g_it = gains.find(t);
        if (g_it == gains.end())
            throw std::invalid_argument("bbma_alloc: no gain for terminal " + std::to_string(t));
        if (g_it->second.gain_linear <= 0.0)
            throw std::invalid_argument("bbma_alloc: non-positive gain for terminal " +
                                        std::to_string(t));
        auto [it, inserted] = worst.try_emplace(c, g_it->second.gain_linear);
        if (!inserted) it->second = std::min(it->second, g_it->second.gain_linear);
    }
    for (const auto& [c, g_min] : worst) {
        const double p = noise_w * target_linear / g_min;
        alloc.powers[c] = p;
        alloc.total_w += p;
    }
    alloc.feasible = alloc.total_w <= p_max_w;
    return alloc;
}

/// Feasibility of an allocation over Monte Carlo SINR trials: the power budget
/// must hold and every terminal's mean SINR must reach the target.
inline bool feasibility(const PowerAllocation& alloc, std::span<const SinrReport> trials,
                        double target_linear) {
    if (trials.empty()) throw std::invalid_argument("feasibility: need at least one trial");
    if (!alloc.feasible) return false;
    std::map<int, double> mean;
    for (const auto& trial : trials)
        for (const auto& [t, gamma] : trial.sinr_linear) mean[t] += gamma;
    for (auto& [t, sum] : mean)
        if (sum / static_cast<double>(trials.size()) < target_linear) return false;
    return true;
}

/// Monte Carlo total ergodic capacity: mean over trials of sum_i log2(1 + gamma_i).
inline double ergodic_capacity(std::span<const SinrReport> trials) {
    if (trials.empty()) throw std::invalid_argument("ergodic_capacity: need at least one trial");
    double total = 0.0;
    for (const auto& trial : trials)
        for (const auto& [t, gamma] : trial.sinr_linear) total += std::log2(1.0 + gamma);
    return total / static_cast<double>(trials.size());
}

} // namespace bbma
