#ifndef VMPBROKER_SELECTION_HPP
#define VMPBROKER_SELECTION_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "placement.hpp"
#include "rng.hpp"
#include "solver.hpp"

namespace vmpbroker {

enum class SelectionStrategy {
    S1_Random,
    S2_MinDistance,
    S3_Preferred,
    S4_MaxTicpu,
    S5_MaxTimem,
    S6_MinTip,
};

inline const std::vector<SelectionStrategy>& all_strategies() {
    static const std::vector<SelectionStrategy> all = {
        SelectionStrategy::S1_Random,   SelectionStrategy::S2_MinDistance,
        SelectionStrategy::S3_Preferred, SelectionStrategy::S4_MaxTicpu,
        SelectionStrategy::S5_MaxTimem, SelectionStrategy::S6_MinTip,
    };
    return all;
}

inline std::string strategy_name(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::S1_Random: return "random";
        case SelectionStrategy::S2_MinDistance: return "distance";
        case SelectionStrategy::S3_Preferred: return "preferred";
        case SelectionStrategy::S4_MaxTicpu: return "max-ticpu";
        case SelectionStrategy::S5_MaxTimem: return "max-timem";
        case SelectionStrategy::S6_MinTip: return "min-tip";
    }
    return "?";
}

inline std::string strategy_label(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::S1_Random: return "S1";
        case SelectionStrategy::S2_MinDistance: return "S2";
        case SelectionStrategy::S3_Preferred: return "S3";
        case SelectionStrategy::S4_MaxTicpu: return "S4";
        case SelectionStrategy::S5_MaxTimem: return "S5";
        case SelectionStrategy::S6_MinTip: return "S6";
    }
    return "?";
}

inline std::optional<SelectionStrategy> parse_strategy(const std::string& name) {
    for (SelectionStrategy s : all_strategies())
        if (strategy_name(s) == name || strategy_label(s) == name) return s;
    return std::nullopt;
}

struct SelectionOptions {
    /// Compute the S2 distance over raw units instead of range-normalized
    /// axes (strict replication variant).
    bool raw_distance = false;
};

namespace detail {

inline std::size_t pick_uniform(const std::vector<std::size_t>& tied, Rng& rng) {
    return tied.size() == 1 ? tied[0] : tied[rng.below(tied.size())];
}

inline std::size_t select_min_distance(const ParetoArchive& archive, Rng& rng,
                                       bool raw) {
    double max1 = archive.entries[0].objectives.f1_ticpu;
    double min1 = max1;
    double max2 = archive.entries[0].objectives.f2_timem;
    double min2 = max2;
    double max3 = archive.entries[0].objectives.f3_tip;
    double min3 = max3;
    for (const auto& e : archive.entries) {
        max1 = std::max(max1, e.objectives.f1_ticpu);
        min1 = std::min(min1, e.objectives.f1_ticpu);
        max2 = std::max(max2, e.objectives.f2_timem);
        min2 = std::min(min2, e.objectives.f2_timem);
        max3 = std::max(max3, e.objectives.f3_tip);
        min3 = std::min(min3, e.objectives.f3_tip);
    }
    const double r1 = max1 - min1, r2 = max2 - min2, r3 = max3 - min3;

    std::vector<std::size_t> best;
    double best_d = 0.0;
    for (std::size_t i = 0; i < archive.size(); ++i) {
        const auto& v = archive.entries[i].objectives;
        // All three axes re-expressed in a minimization context.
        double a1 = max1 - v.f1_ticpu;
        double a2 = max2 - v.f2_timem;
        double a3 = v.f3_tip;
        if (!raw) {
            a1 = r1 > 0 ? a1 / r1 : 0.0;
            a2 = r2 > 0 ? a2 / r2 : 0.0;
            a3 = r3 > 0 ? a3 / r3 : 0.0;
        }
        const double d = a1 * a1 + a2 * a2 + a3 * a3;
        if (best.empty() || d < best_d) {
            best_d = d;
            best.assign(1, i);
        } else if (d == best_d) {
            best.push_back(i);
        }
    }
    return pick_uniform(best, rng);
}

inline std::vector<int> preference_win_counts(const ParetoArchive& archive) {
    std::vector<int> wins(archive.size(), 0);
    for (std::size_t i = 0; i < archive.size(); ++i)
        for (std::size_t j = i + 1; j < archive.size(); ++j) {
            switch (preference(archive.entries[i].objectives,
                               archive.entries[j].objectives)) {
                case Preference::APreferred: ++wins[i]; break;
                case Preference::BPreferred: ++wins[j]; break;
                case Preference::Tie: break;
            }
        }
    return wins;
}

inline std::size_t select_preferred(const ParetoArchive& archive) {
    const std::vector<int> wins = preference_win_counts(archive);
    std::size_t best = 0;
    for (std::size_t i = 1; i < archive.size(); ++i) {
        if (wins[i] < wins[best]) continue;
        const auto& a = archive.entries[i].objectives;
        const auto& b = archive.entries[best].objectives;
        if (wins[i] > wins[best]) { best = i; continue; }
        // Tie rule: higher f1, then higher f2, then lower f3, then index.
        if (a.f1_ticpu != b.f1_ticpu) {
            if (a.f1_ticpu > b.f1_ticpu) best = i;
        } else if (a.f2_timem != b.f2_timem) {
            if (a.f2_timem > b.f2_timem) best = i;
        } else if (a.f3_tip < b.f3_tip) {
            best = i;
        }
    }
    return best;
}

template <typename Key, typename Better>
std::size_t select_extreme(const ParetoArchive& archive, Rng& rng, Key key,
                           Better better) {
    std::vector<std::size_t> best{0};
    double best_v = key(archive.entries[0].objectives);
    for (std::size_t i = 1; i < archive.size(); ++i) {
        const double v = key(archive.entries[i].objectives);
        if (better(v, best_v)) {
            best_v = v;
            best.assign(1, i);
        } else if (v == best_v) {
            best.push_back(i);
        }
    }
    return pick_uniform(best, rng);
}

} // namespace detail

inline std::size_t select_index(const ParetoArchive& archive,
                                SelectionStrategy strategy, Rng& rng,
                                const SelectionOptions& options = {}) {
    if (archive.empty()) throw Error("select: empty archive");
    switch (strategy) {
        case SelectionStrategy::S1_Random:
            return rng.below(archive.size());
        case SelectionStrategy::S2_MinDistance:
            return detail::select_min_distance(archive, rng, options.raw_distance);
        case SelectionStrategy::S3_Preferred:
            return detail::select_preferred(archive);
        case SelectionStrategy::S4_MaxTicpu:
            return detail::select_extreme(
                archive, rng, [](const ObjectiveVector& v) { return v.f1_ticpu; },
                [](double a, double b) { return a > b; });
        case SelectionStrategy::S5_MaxTimem:
            return detail::select_extreme(
                archive, rng, [](const ObjectiveVector& v) { return v.f2_timem; },
                [](double a, double b) { return a > b; });
        case SelectionStrategy::S6_MinTip:
            return detail::select_extreme(
                archive, rng, [](const ObjectiveVector& v) { return v.f3_tip; },
                [](double a, double b) { return a < b; });
    }
    throw Error("select: unknown strategy");
}

inline const ArchiveEntry& select(const ParetoArchive& archive,
                                  SelectionStrategy strategy, Rng& rng,
                                  const SelectionOptions& options = {}) {
    return archive.entries[select_index(archive, strategy, rng, options)];
}

} // namespace vmpbroker

#endif
