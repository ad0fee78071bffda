#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbma {

/// Modulation order: symbols are indexed 1..M, classes likewise.
struct SymbolAlphabet {
    int order = 2;

    void validate() const {
        if (order < 2) throw std::invalid_argument("modulation order must be >= 2");
    }
};

/// Partition of the active terminals into symbol classes, plus the current
/// class -> symbol assignment (a bijection over 1..M).
struct ClassState {
    std::map<int, int> membership;      // terminal id -> class index
    std::map<int, int> symbol_of_class; // class index -> symbol index

    int classes() const { return static_cast<int>(symbol_of_class.size()); }

    int class_of_symbol(int symbol) const {
        for (const auto& [c, s] : symbol_of_class)
            if (s == symbol) return c;
        throw std::invalid_argument("no class carries symbol " + std::to_string(symbol));
    }

    void validate() const {
        const int m = classes();
        std::vector<char> seen(static_cast<std::size_t>(m) + 1, 0);
        for (const auto& [c, s] : symbol_of_class) {
            if (c < 1 || c > m || s < 1 || s > m)
                throw std::invalid_argument("class/symbol indices must lie in 1..M");
            if (seen[static_cast<std::size_t>(s)]++)
                throw std::invalid_argument("symbol_of_class is not a bijection");
        }
        for (const auto& [t, c] : membership)
            if (!symbol_of_class.count(c))
                throw std::invalid_argument("terminal " + std::to_string(t) +
                                            " assigned to unknown class");
    }
};

/// Demanded symbol per terminal for the next symbol-time.
struct DemandVector {
    std::map<int, int> next_symbol; // terminal id -> symbol index
};

struct Move {
    int terminal = 0;
    int from_class = 0;
    int to_class = 0;

    friend bool operator==(const Move&, const Move&) = default;
};

struct MovePlan {
    std::vector<Move> moves;
    std::map<int, int> new_symbol_of_class;
};

namespace detail {

inline void check_consistent(const ClassState& state, const DemandVector& demand) {
    state.validate();
    const int m = state.classes();
    if (demand.next_symbol.size() != state.membership.size())
        throw std::invalid_argument("demand does not cover exactly the active terminals");
    for (const auto& [t, s] : demand.next_symbol) {
        if (!state.membership.count(t))
            throw std::invalid_argument("demand for unknown terminal " + std::to_string(t));
        if (s < 1 || s > m)
            throw std::invalid_argument("demanded symbol out of range for terminal " +
                                        std::to_string(t));
    }
}

/// kept[c-1][s-1] = number of terminals currently in class c demanding symbol s,
/// i.e. the terminals that stay put if class c is assigned symbol s.
inline std::vector<std::vector<long long>> kept_counts(const ClassState& state,
                                                       const DemandVector& demand) {
    const int m = state.classes();
    std::vector<std::vector<long long>> kept(static_cast<std::size_t>(m),
                                             std::vector<long long>(static_cast<std::size_t>(m), 0));
    for (const auto& [t, c] : state.membership)
        ++kept[static_cast<std::size_t>(c - 1)]
              [static_cast<std::size_t>(demand.next_symbol.at(t) - 1)];
    return kept;
}

/// Square min-cost assignment (Hungarian with potentials), 0-indexed result:
/// row i is matched to column result[i].
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<long long>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<long long> u(static_cast<std::size_t>(n) + 1, 0),
        v(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0),
        way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<long long> minv(static_cast<std::size_t>(n) + 1, LLONG_MAX);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            long long delta = LLONG_MAX;
            for (int j = 1; j <= n; ++j)
                if (!used[static_cast<std::size_t>(j)]) {
                    const long long cur = cost[static_cast<std::size_t>(i0 - 1)]
                                              [static_cast<std::size_t>(j - 1)] -
                                          u[static_cast<std::size_t>(i0)] -
                                          v[static_cast<std::size_t>(j)];
                    if (cur < minv[static_cast<std::size_t>(j)]) {
                        minv[static_cast<std::size_t>(j)] = cur;
                        way[static_cast<std::size_t>(j)] = j0;
                    }
                    if (minv[static_cast<std::size_t>(j)] < delta) {
                        delta = minv[static_cast<std::size_t>(j)];
                        j1 = j;
                    }
                }
            for (int j = 0; j <= n; ++j)
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> result(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)])
            result[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return result;
}

inline long long kept_under(const std::vector<std::vector<long long>>& kept,
                            const std::map<int, int>& mapping) {
    long long total = 0;
    for (const auto& [c, s] : mapping)
        total += kept[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(s - 1)];
    return total;
}

/// Moves needed to realize the given class -> symbol mapping.
inline MovePlan plan_for_mapping(const ClassState& state, const DemandVector& demand,
                                 std::map<int, int> mapping) {
    std::map<int, int> class_of_symbol;
    for (const auto& [c, s] : mapping) class_of_symbol[s] = c;
    MovePlan plan;
    plan.new_symbol_of_class = std::move(mapping);
    for (const auto& [t, c] : state.membership) {
        const int wanted = demand.next_symbol.at(t);
        if (plan.new_symbol_of_class.at(c) != wanted)
            plan.moves.push_back({t, c, class_of_symbol.at(wanted)});
    }
    return plan;
}

} // namespace detail

/// Static allocation: the class -> symbol mapping is permanent; every terminal
/// whose demanded symbol differs from its class's symbol moves to the class
/// that owns that symbol.
inline MovePlan static_assign(const ClassState& state, const DemandVector& demand) {
    detail::check_consistent(state, demand);
    return detail::plan_for_mapping(state, demand, state.symbol_of_class);
}

/// Dynamic allocation: choose the class -> symbol bijection minimizing the
/// number of moved terminals. Exhaustive over the M! bijections for M <= 6;
/// linear assignment on the kept-terminal count matrix above that. Ties keep
/// the current mapping when it attains the minimum.
inline MovePlan dynamic_assign(const ClassState& state, const DemandVector& demand) {
    detail::check_consistent(state, demand);
    const int m = state.classes();
    const auto kept = detail::kept_counts(state, demand);

    std::map<int, int> best;
    long long best_kept = -1;
    if (m <= 6) {
        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 1);
        do {
            long long total = 0;
            for (int c = 1; c <= m; ++c)
                total += kept[static_cast<std::size_t>(c - 1)]
                             [static_cast<std::size_t>(perm[static_cast<std::size_t>(c - 1)] - 1)];
            if (total > best_kept) {
                best_kept = total;
                best.clear();
                for (int c = 1; c <= m; ++c)
                    best[c] = perm[static_cast<std::size_t>(c - 1)];
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // minimize (-kept) as a square assignment problem
        std::vector<std::vector<long long>> cost(static_cast<std::size_t>(m),
                                                 std::vector<long long>(static_cast<std::size_t>(m)));
        for (int c = 0; c < m; ++c)
            for (int s = 0; s < m; ++s)
                cost[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] =
                    -kept[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
        const auto match = detail::min_cost_assignment(cost);
        for (int c = 1; c <= m; ++c)
            best[c] = match[static_cast<std::size_t>(c - 1)] + 1;
        best_kept = detail::kept_under(kept, best);
    }

    if (detail::kept_under(kept, state.symbol_of_class) == best_kept)
        best = state.symbol_of_class; // stability on ties
    return detail::plan_for_mapping(state, demand, std::move(best));
}

/// Applies a plan produced from exactly this state. A stale plan (whose moves
/// no longer match the membership) is rejected.
inline ClassState apply_plan(const ClassState& state, const MovePlan& plan) {
    state.validate();
    if (plan.new_symbol_of_class.size() != state.symbol_of_class.size())
        throw std::invalid_argument("plan class count does not match state");
    ClassState next = state;
    next.symbol_of_class = plan.new_symbol_of_class;
    for (const auto& mv : plan.moves) {
        auto it = next.membership.find(mv.terminal);
        if (it == next.membership.end())
            throw std::invalid_argument("plan moves unknown terminal " +
                                        std::to_string(mv.terminal));
        if (it->second != mv.from_class)
            throw std::invalid_argument("stale plan: terminal " + std::to_string(mv.terminal) +
                                        " is not in class " + std::to_string(mv.from_class));
        it->second = mv.to_class;
    }
    next.validate();
    return next;
}

} // namespace bbma
