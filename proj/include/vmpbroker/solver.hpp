#ifndef VMPBROKER_SOLVER_HPP
#define VMPBROKER_SOLVER_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "market.hpp"
#include "placement.hpp"
#include "rng.hpp"

namespace vmpbroker {

struct SolverParams {
    int population_size = 50;
    int generations = 200;
    std::uint64_t seed = 0;
    std::optional<double> mutation_rate; // default 1/n(t)
};

/// Precomputed lookup tables over a MarketState's available offers.
struct MarketIndex {
    const MarketState* state;
    std::vector<Assignment> available_pairs;
    std::vector<std::vector<int>> types_by_provider;

    explicit MarketIndex(const MarketState& s) : state(&s) {
        types_by_provider.resize(static_cast<std::size_t>(s.provider_count()));
        for (int j = 0; j < s.type_count(); ++j)
            for (int k = 0; k < s.provider_count(); ++k)
                if (s.offer(j, k).available) {
                    available_pairs.push_back({j, k});
                    types_by_provider[k].push_back(j);
                }
    }
};

inline Placement random_placement(int n, const MarketIndex& index, Rng& rng) {
    Placement p;
    p.assignments.reserve(static_cast<std::size_t>(n));
    const std::uint64_t choices = index.available_pairs.size();
    for (int i = 0; i < n; ++i)
        p.assignments.push_back(index.available_pairs[rng.below(choices)]);
    return p;
}

inline Placement random_placement(int n, const MarketState& state, Rng& rng) {
    MarketIndex index(state);
    return random_placement(n, index, rng);
}

struct RepairResult {
    Placement placement;
    int iterations = 0;
};

/// Moves one random VM at a time from the most loaded provider to the least
/// loaded one until the LOC_min floor holds; ties resolved by lowest
/// provider index. The moved VM's type is re-drawn among the destination
/// provider's available types.
inline RepairResult repair_with_stats(Placement p, double loc_min,
                                      const MarketIndex& index, Rng& rng) {
    const int m = index.state->provider_count();
    const std::size_t n = p.size();
    std::vector<std::vector<int>> vms_at(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < n; ++i)
        vms_at[p.assignments[i].provider_id].push_back(static_cast<int>(i));

    const auto feasible = [&] {
        for (int k = 0; k < m; ++k)
            if (static_cast<double>(vms_at[k].size()) / static_cast<double>(n) < loc_min)
                return false;
        return true;
    };

    int iterations = 0;
    while (!feasible()) {
        int c_max = 0, c_min = 0;
        for (int k = 1; k < m; ++k) {
            if (vms_at[k].size() > vms_at[c_max].size()) c_max = k;
            if (vms_at[k].size() < vms_at[c_min].size()) c_min = k;
        }
        auto& from = vms_at[c_max];
        // Once the spread is <= 1 VM the distribution cannot get any more
        // even; a still-unsatisfied floor is unsatisfiable for this n.
        if (from.size() <= vms_at[c_min].size() + 1)
            throw ValidationError(
                "loc_min " + std::to_string(loc_min) + " is infeasible for " +
                std::to_string(n) + " VMs across " + std::to_string(m) + " providers");
        const std::uint64_t pos = rng.below(from.size());
        const int vm = from[pos];
        from[pos] = from.back();
        from.pop_back();
        vms_at[c_min].push_back(vm);
        const auto& types = index.types_by_provider[c_min];
        p.assignments[vm] = {types[rng.below(types.size())], c_min};
        ++iterations;
    }
    return {std::move(p), iterations};
}

inline Placement repair(Placement p, double loc_min, const MarketIndex& index,
                        Rng& rng) {
    return repair_with_stats(std::move(p), loc_min, index, rng).placement;
}

/// Single-point cross-cut; both chromosome rows are cut together.
inline std::pair<Placement, Placement> crossover(const Placement& a,
                                                 const Placement& b, Rng& rng) {
    if (a.size() != b.size()) throw Error("crossover: parent length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw Error("crossover: parents must have length >= 2");
    const std::size_t cut = 1 + rng.below(n - 1);
    Placement c1 = a, c2 = b;
    for (std::size_t i = cut; i < n; ++i) {
        c1.assignments[i] = b.assignments[i];
        c2.assignments[i] = a.assignments[i];
    }
    return {std::move(c1), std::move(c2)};
}

/// Per-cell mutation over the 2 x n gene matrix: the provider row is
/// resolved first, then the type row draws from the (possibly new)
/// provider's available types.
inline Placement mutate(Placement p, const MarketIndex& index, double rate,
                        Rng& rng) {
    const int m = index.state->provider_count();
    for (auto& a : p.assignments) {
        if (rng.unit() < rate) a.provider_id = static_cast<int>(rng.below(m));
        const auto& types = index.types_by_provider[a.provider_id];
        if (rng.unit() < rate ||
            !index.state->offer(a.type_id, a.provider_id).available)
            a.type_id = types[rng.below(types.size())];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Non-dominated sorting (fast NDS with crowding distance)

struct FrontInfo {
    std::vector<int> rank;        // 0-based; 0 = best front
    std::vector<double> crowding; // boundary points get +inf
    int front_count = 0;
};

inline FrontInfo rank_population(const std::vector<ObjectiveVector>& objs) {
    const int n = static_cast<int>(objs.size());
    FrontInfo info;
    info.rank.assign(objs.size(), 0);
    info.crowding.assign(objs.size(), 0.0);
    if (n == 0) return info;

    std::vector<int> domination_count(objs.size(), 0);
    std::vector<std::vector<int>> dominated_by(objs.size());
    std::vector<int> current;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (dominates(objs[i], objs[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(objs[j], objs[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    for (int i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);

    int front = 0;
    std::vector<std::vector<int>> fronts;
    while (!current.empty()) {
        std::vector<int> next;
        for (int i : current) {
            info.rank[i] = front;
            for (int j : dominated_by[i])
                if (--domination_count[j] == 0) next.push_back(j);
        }
        fronts.push_back(current);
        current = std::move(next);
        ++front;
    }
    info.front_count = front;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<int> order;
    for (const auto& f : fronts) {
        for (int axis = 0; axis < 3; ++axis) {
            order = f;
            const auto key = [&](int i) -> double {
                const auto& v = objs[i];
                return axis == 0 ? v.f1_ticpu : axis == 1 ? v.f2_timem : v.f3_tip;
            };
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (key(a) != key(b)) return key(a) < key(b);
                return a < b;
            });
            info.crowding[order.front()] = inf;
            info.crowding[order.back()] = inf;
            const double range = key(order.back()) - key(order.front());
            if (range <= 0.0) continue;
            for (std::size_t p = 1; p + 1 < order.size(); ++p) {
                if (info.crowding[order[p]] == inf) continue;
                info.crowding[order[p]] += (key(order[p + 1]) - key(order[p - 1])) / range;
            }
        }
    }
    return info;
}

struct RankedIndividual {
    Placement placement;
    ObjectiveVector objectives;
    int rank = 0;
    double crowding = 0.0;
};

struct RankedPopulation {
    std::vector<RankedIndividual> individuals;
};

inline RankedPopulation non_dominated_sort(
    const std::vector<std::pair<Placement, ObjectiveVector>>& pop) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(pop.size());
    for (const auto& [p, v] : pop) objs.push_back(v);
    const FrontInfo info = rank_population(objs);
    RankedPopulation ranked;
    ranked.individuals.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i)
        ranked.individuals.push_back(
            {pop[i].first, pop[i].second, info.rank[i], info.crowding[i]});
    return ranked;
}

/// Winner by lower rank, then larger crowding distance, then a coin flip.
inline std::size_t tournament_pick(std::size_t i, std::size_t j,
                                   const std::vector<int>& rank,
                                   const std::vector<double>& crowding,
                                   Rng& rng) {
    if (rank[i] != rank[j]) return rank[i] < rank[j] ? i : j;
    if (crowding[i] != crowding[j]) return crowding[i] > crowding[j] ? i : j;
    return rng.coin() ? i : j;
}

inline const Placement& binary_tournament(const RankedPopulation& ranked, Rng& rng) {
    if (ranked.individuals.empty())
        throw Error("binary_tournament: empty population");
    std::vector<int> rank;
    std::vector<double> crowding;
    for (const auto& ind : ranked.individuals) {
        rank.push_back(ind.rank);
        crowding.push_back(ind.crowding);
    }
    const std::size_t i = rng.below(ranked.individuals.size());
    const std::size_t j = rng.below(ranked.individuals.size());
    return ranked.individuals[tournament_pick(i, j, rank, crowding, rng)].placement;
}

// ---------------------------------------------------------------------------
// Pareto archive (P_known)

struct ArchiveEntry {
    Placement placement;
    ObjectiveVector objectives;
};

/// Mutually non-dominated, bound-filtered solution set. bounds_met records
/// whether any admitted entry ever satisfied the relaxed bounds; when false
/// the archive holds the unfiltered non-dominated fallback set.
struct ParetoArchive {
    std::vector<ArchiveEntry> entries;
    bool bounds_met = false;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

namespace detail {

/// Merges candidates into an entry list, keeping only the non-dominated,
/// assignment-unique union.
inline void merge_nondominated(std::vector<ArchiveEntry>& entries,
                               const std::vector<const ArchiveEntry*>& candidates) {
    if (candidates.empty()) return;

    // Dominated candidates cannot survive against their dominator, so only
    // the candidates' own first front needs merging.
    std::vector<const ArchiveEntry*> front;
    for (const ArchiveEntry* c : candidates) {
        bool dominated = false;
        for (const ArchiveEntry* d : candidates)
            if (d != c && dominates(d->objectives, c->objectives)) {
                dominated = true;
                break;
            }
        if (!dominated) front.push_back(c);
    }

    std::vector<std::size_t> displaced;
    for (const ArchiveEntry* c : front) {
        bool rejected = false;
        displaced.clear();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const ObjectiveVector& e = entries[i].objectives;
            // Equal objective triples gate the (expensive) duplicate check.
            if (e.f1_ticpu == c->objectives.f1_ticpu &&
                e.f2_timem == c->objectives.f2_timem &&
                e.f3_tip == c->objectives.f3_tip &&
                entries[i].placement == c->placement) {
                rejected = true;
                break;
            }
            if (dominates(e, c->objectives)) {
                rejected = true;
                break;
            }
            if (dominates(c->objectives, e)) displaced.push_back(i);
        }
        if (rejected) continue;
        if (!displaced.empty()) {
            // Compact around the displaced (now dominated) entries.
            std::size_t kept = 0, d = 0;
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (d < displaced.size() && displaced[d] == i) {
                    ++d;
                    continue;
                }
                if (kept != i) entries[kept] = std::move(entries[i]);
                ++kept;
            }
            entries.resize(kept);
        }
        entries.push_back(*c);
    }
}

} // namespace detail

inline ParetoArchive update_archive(ParetoArchive archive,
                                    const std::vector<ArchiveEntry>& candidates,
                                    const ObjectiveBounds& bounds) {
    std::vector<const ArchiveEntry*> admitted;
    for (const auto& c : candidates)
        if (within_bounds(c.objectives, bounds)) admitted.push_back(&c);

    if (!admitted.empty()) {
        // A bound-satisfying solution exists: out-of-bound entries and
        // candidates are excluded from here on.
        if (!archive.bounds_met) archive.entries.clear();
        archive.bounds_met = true;
        detail::merge_nondominated(archive.entries, admitted);
    } else if (!archive.bounds_met) {
        // Fallback: no solution has ever met the bounds; keep the
        // unfiltered non-dominated set so the broker can still answer.
        std::vector<const ArchiveEntry*> all;
        for (const auto& c : candidates) all.push_back(&c);
        detail::merge_nondominated(archive.entries, all);
    }
    // Otherwise nothing admissible arrived; the archive stands.
    return archive;
}

// ---------------------------------------------------------------------------
// Main loop

inline ParetoArchive solve(const Placement* prev, const MarketState& state,
                           const TenantRequest& request,
                           const SolverParams& params, Rng& rng) {
    require_valid(state);
    validate_request(request, state.provider_count());
    if (params.population_size < 2) throw Error("population_size must be >= 2");
    if (params.generations < 1) throw Error("generations must be >= 1");

    const MarketIndex index(state);
    const int n = request.vm_count;
    const int pop_size = params.population_size;
    const double rate = params.mutation_rate.value_or(1.0 / n);
    const ObjectiveBounds bounds = bounds_of(request);
    const double inf = std::numeric_limits<double>::infinity();

    const auto evaluate = [&](const Placement& p) {
        return evaluate_objectives(prev, p, state, request);
    };

    std::vector<Placement> pop;
    std::vector<ObjectiveVector> objs;
    pop.reserve(static_cast<std::size_t>(pop_size));
    for (int i = 0; i < pop_size; ++i)
        pop.push_back(repair(random_placement(n, index, rng), request.loc_min,
                             index, rng));
    for (const auto& p : pop) objs.push_back(evaluate(p));

    std::vector<ArchiveEntry> seed_entries;
    for (std::size_t i = 0; i < pop.size(); ++i)
        seed_entries.push_back({pop[i], objs[i]});
    ParetoArchive archive = update_archive(ParetoArchive{}, seed_entries, bounds);

    FrontInfo info = rank_population(objs);

    std::vector<int> pool_rank;
    std::vector<double> pool_crowding;
    std::vector<Placement> offspring;
    std::vector<ObjectiveVector> offspring_objs;
    std::vector<ArchiveEntry> offspring_entries;

    for (int gen = 0; gen < params.generations; ++gen) {
        // Mating pool via binary tournaments over P_u and P_known; archive
        // members compete with best rank and infinite crowding.
        const std::size_t pool_n = pop.size() + archive.size();
        pool_rank.assign(pool_n, 0);
        pool_crowding.assign(pool_n, inf);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            pool_rank[i] = info.rank[i];
            pool_crowding[i] = info.crowding[i];
        }
        const auto parent = [&]() -> const Placement& {
            const std::size_t i = rng.below(pool_n);
            const std::size_t j = rng.below(pool_n);
            const std::size_t w = tournament_pick(i, j, pool_rank, pool_crowding, rng);
            return w < pop.size() ? pop[w] : archive.entries[w - pop.size()].placement;
        };

        offspring.clear();
        while (static_cast<int>(offspring.size()) < pop_size) {
            const Placement& a = parent();
            const Placement& b = parent();
            if (n >= 2) {
                auto [c1, c2] = crossover(a, b, rng);
                offspring.push_back(std::move(c1));
                if (static_cast<int>(offspring.size()) < pop_size)
                    offspring.push_back(std::move(c2));
            } else {
                offspring.push_back(a);
            }
        }
        for (auto& c : offspring)
            c = repair(mutate(std::move(c), index, rate, rng), request.loc_min,
                       index, rng);

        offspring_objs.clear();
        offspring_entries.clear();
        for (const auto& c : offspring) offspring_objs.push_back(evaluate(c));
        for (std::size_t i = 0; i < offspring.size(); ++i)
            offspring_entries.push_back({offspring[i], offspring_objs[i]});
        archive = update_archive(std::move(archive), offspring_entries, bounds);

        // Environmental selection over P_u and the repaired offspring.
        std::vector<Placement> combined = pop;
        std::vector<ObjectiveVector> combined_objs = objs;
        combined.insert(combined.end(), offspring.begin(), offspring.end());
        combined_objs.insert(combined_objs.end(), offspring_objs.begin(),
                             offspring_objs.end());
        const FrontInfo cinfo = rank_population(combined_objs);
        std::vector<std::size_t> order(combined.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cinfo.rank[a] != cinfo.rank[b]) return cinfo.rank[a] < cinfo.rank[b];
            return cinfo.crowding[a] > cinfo.crowding[b];
        });
        std::vector<Placement> next_pop;
        std::vector<ObjectiveVector> next_objs;
        for (int i = 0; i < pop_size; ++i) {
            next_pop.push_back(std::move(combined[order[i]]));
            next_objs.push_back(combined_objs[order[i]]);
        }
        pop = std::move(next_pop);
        objs = std::move(next_objs);
        info = rank_population(objs);
    }
    return archive;
}

inline ParetoArchive solve(const Placement* prev, const MarketState& state,
                           const TenantRequest& request,
                           const SolverParams& params) {
    Rng rng(params.seed);
    return solve(prev, state, request, params, rng);
}

} // namespace vmpbroker

#endif
