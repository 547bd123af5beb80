#ifndef VMPBROKER_PLACEMENT_HPP
#define VMPBROKER_PLACEMENT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "market.hpp"
#include "rng.hpp"

namespace vmpbroker {

/// One VM's (instance type, provider) assignment; 0-based indices into the
/// MarketState the placement is evaluated against.
struct Assignment {
    int type_id = 0;
    int provider_id = 0;

    bool operator==(const Assignment&) const = default;
};

/// The chromosome: a column-wise reading of the 2 x n assignment matrix.
/// Unique placement holds by construction (one pair per VM).
struct Placement {
    std::vector<Assignment> assignments;

    std::size_t size() const { return assignments.size(); }

    bool operator==(const Placement&) const = default;
};

inline std::uint64_t placement_hash(const Placement& p) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (const auto& a : p.assignments) {
        std::uint64_t s = h ^ (static_cast<std::uint64_t>(a.type_id) << 32 |
                               static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.provider_id)));
        h = splitmix64(s);
    }
    return h;
}

struct ObjectiveVector {
    double f1_ticpu = 0.0;  // raw_ticpu - ro_cpu (maximize)
    double f2_timem = 0.0;  // raw_timem - ro_mem (maximize)
    double f3_tip = 0.0;    // currency over the horizon (minimize)
    double raw_ticpu = 0.0; // core-hours
    double raw_timem = 0.0; // GB-hours
    double ro_cpu = 0.0;    // reconfiguration overhead, core-hours
    double ro_mem = 0.0;    // reconfiguration overhead, GB-hours

    bool operator==(const ObjectiveVector&) const = default;
};

struct ObjectiveBounds {
    std::optional<double> l1; // lower bound on f1
    std::optional<double> l2; // lower bound on f2
    std::optional<double> u3; // upper bound on f3
    double margin = 0.0;      // tolerance fraction
};

inline ObjectiveBounds bounds_of(const TenantRequest& request) {
    ObjectiveBounds b;
    b.l1 = request.expected_ticpu;
    b.l2 = request.expected_timem;
    b.u3 = request.expected_tip;
    b.margin = request.tolerance_margin;
    return b;
}

/// Evaluates a candidate next placement against the market, charging
/// reconfiguration overhead for every VM whose (j, k) pair changed relative
/// to prev. Grown VMs incur only the allocation term, shrunk VMs only the
/// release term.
inline ObjectiveVector evaluate_objectives(const Placement* prev,
                                           const Placement& next,
                                           const MarketState& state,
                                           const TenantRequest& request) {
    const double H = request.horizon_hours;
    ObjectiveVector v;
    long long cores = 0, gbs = 0;
    std::int64_t price_micros = 0;
    const std::size_t n_prev = prev ? prev->size() : 0;

    for (std::size_t i = 0; i < next.size(); ++i) {
        const Assignment& a = next.assignments[i];
        const InstanceTypeSpec& t = state.instance_types[a.type_id];
        const ProviderOffer& o = state.offer(a.type_id, a.provider_id);
        cores += t.cpu_cores;
        gbs += t.memory_gb;
        price_micros += o.price_micros;

        const bool persisted = i < n_prev;
        const bool changed = !persisted || prev->assignments[i] != a;
        if (!changed) continue;
        if (!o.available)
            throw ValidationError("placement assigns VM " + std::to_string(i + 1) +
                                  " to an unavailable offer (j=" +
                                  std::to_string(a.type_id + 1) + ", k=" +
                                  std::to_string(a.provider_id + 1) + ")");
        if (prev) {
            // Allocation of the new offer; release of the old one, if any.
            v.ro_cpu += t.cpu_cores * o.allocation_hours;
            v.ro_mem += t.memory_gb * o.allocation_hours;
            if (persisted) {
                const Assignment& old = prev->assignments[i];
                const InstanceTypeSpec& ot = state.instance_types[old.type_id];
                const ProviderOffer& oo = state.offer(old.type_id, old.provider_id);
                v.ro_cpu += ot.cpu_cores * oo.release_hours;
                v.ro_mem += ot.memory_gb * oo.release_hours;
            }
        }
    }
    if (prev) {
        for (std::size_t i = next.size(); i < n_prev; ++i) {
            const Assignment& old = prev->assignments[i];
            const InstanceTypeSpec& ot = state.instance_types[old.type_id];
            const ProviderOffer& oo = state.offer(old.type_id, old.provider_id);
            v.ro_cpu += ot.cpu_cores * oo.release_hours;
            v.ro_mem += ot.memory_gb * oo.release_hours;
        }
    }

    v.raw_ticpu = H * static_cast<double>(cores);
    v.raw_timem = H * static_cast<double>(gbs);
    v.f3_tip = H * static_cast<double>(price_micros) / 1e6;
    v.f1_ticpu = v.raw_ticpu - v.ro_cpu;
    v.f2_timem = v.raw_timem - v.ro_mem;
    return v;
}

inline int count_reconfigured(const Placement* prev, const Placement& next) {
    if (!prev) return 0;
    const std::size_t shared = std::min(prev->size(), next.size());
    int changed = 0;
    for (std::size_t i = 0; i < shared; ++i)
        if (prev->assignments[i] != next.assignments[i]) ++changed;
    changed += static_cast<int>(prev->size() + next.size() - 2 * shared);
    return changed;
}

inline bool check_load_balancing(const Placement& p, int provider_count,
                                 double loc_min) {
    std::vector<int> counts(static_cast<std::size_t>(provider_count), 0);
    for (const auto& a : p.assignments) ++counts[a.provider_id];
    const double n = static_cast<double>(p.size());
    for (int c : counts)
        if (static_cast<double>(c) / n < loc_min) return false;
    return true;
}

/// Pareto dominance: f1 and f2 maximized, f3 minimized. Exact comparison.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.f1_ticpu < b.f1_ticpu || a.f2_timem < b.f2_timem || a.f3_tip > b.f3_tip)
        return false;
    return a.f1_ticpu > b.f1_ticpu || a.f2_timem > b.f2_timem || a.f3_tip < b.f3_tip;
}

enum class Preference { APreferred, BPreferred, Tie };

/// Count-based preference: whoever wins more objectives; equal axes count
/// for neither side.
inline Preference preference(const ObjectiveVector& a, const ObjectiveVector& b) {
    int a_wins = 0, b_wins = 0;
    if (a.f1_ticpu > b.f1_ticpu) ++a_wins;
    else if (a.f1_ticpu < b.f1_ticpu) ++b_wins;
    if (a.f2_timem > b.f2_timem) ++a_wins;
    else if (a.f2_timem < b.f2_timem) ++b_wins;
    if (a.f3_tip < b.f3_tip) ++a_wins;
    else if (a.f3_tip > b.f3_tip) ++b_wins;
    if (a_wins > b_wins) return Preference::APreferred;
    if (b_wins > a_wins) return Preference::BPreferred;
    return Preference::Tie;
}

inline bool within_bounds(const ObjectiveVector& v, const ObjectiveBounds& b) {
    if (b.l1 && v.f1_ticpu < *b.l1 * (1.0 - b.margin)) return false;
    if (b.l2 && v.f2_timem < *b.l2 * (1.0 - b.margin)) return false;
    if (b.u3 && v.f3_tip > *b.u3 * (1.0 + b.margin)) return false;
    return true;
}

} // namespace vmpbroker

#endif
