#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace vmpbroker;

namespace {

std::vector<int> provider_counts(const Placement& p, int m) {
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (const auto& a : p.assignments) ++counts[a.provider_id];
    return counts;
}

Placement with_provider_counts(const std::vector<int>& counts) {
    Placement p;
    for (std::size_t k = 0; k < counts.size(); ++k)
        for (int i = 0; i < counts[k]; ++i)
            p.assignments.push_back({0, static_cast<int>(k)});
    return p;
}

} // namespace

TEST_CASE("random placement draws uniformly over available pairs") {
    const MarketState market = fixtures::full_market();
    const MarketIndex index(market);
    Rng rng(5);

    const Placement shaped = random_placement(13, index, rng);
    REQUIRE(shaped.size() == 13);
    for (const auto& a : shaped.assignments) {
        CHECK(a.type_id >= 0);
        CHECK(a.type_id < market.type_count());
        CHECK(a.provider_id >= 0);
        CHECK(a.provider_id < market.provider_count());
    }

    // Chi-square style check: each of the 15 pairs within 5 sigma of uniform.
    const int draws = 10000;
    std::map<std::pair<int, int>, int> freq;
    for (int i = 0; i < draws; ++i) {
        const Placement p = random_placement(1, index, rng);
        ++freq[{p.assignments[0].type_id, p.assignments[0].provider_id}];
    }
    const double expected = draws / 15.0;
    const double sigma = std::sqrt(draws * (1.0 / 15.0) * (14.0 / 15.0));
    REQUIRE(freq.size() == 15);
    for (const auto& [pair, count] : freq)
        CHECK(std::abs(count - expected) < 5.0 * sigma);
}

TEST_CASE("single-option market admits one placement") {
    MarketState market = fixtures::tiny_market();
    market.providers.resize(1);
    market.instance_types.resize(1);
    market.offers.resize(1);
    Rng rng(1);
    const Placement p = random_placement(4, market, rng);
    for (const auto& a : p.assignments) CHECK(a == Assignment{0, 0});
}

TEST_CASE("repair enforces the load balancing floor") {
    MarketState market = fixtures::full_market();
    const MarketIndex index(market);
    Rng rng(17);

    SECTION("skewed counts are rebalanced") {
        Placement p = with_provider_counts({8, 1, 1});
        const Placement r = repair(std::move(p), 0.30, index, rng);
        for (int c : provider_counts(r, 3)) CHECK(c >= 3);
    }

    SECTION("feasible input is returned unchanged") {
        const Placement p = with_provider_counts({4, 3, 3});
        const RepairResult r = repair_with_stats(p, 0.30, index, rng);
        CHECK(r.iterations == 0);
        CHECK(r.placement == p);
    }

    SECTION("loc_min = 1/m with divisible n balances perfectly") {
        Placement p = with_provider_counts({12, 0, 0});
        const Placement r = repair(std::move(p), 1.0 / 3.0, index, rng);
        CHECK(provider_counts(r, 3) == std::vector<int>{4, 4, 4});
    }

    SECTION("an unsatisfiable floor is reported, not looped on") {
        // n = 11 needs ceil(3.3) = 4 VMs on each of 3 providers: 12 > 11.
        Placement p = with_provider_counts({11, 0, 0});
        CHECK_THROWS_AS(repair(std::move(p), 0.30, index, rng), ValidationError);
    }

    SECTION("iteration count never exceeds n") {
        const auto feasible = [](int n) {
            return 3 * static_cast<int>(std::ceil(0.30 * n)) <= n;
        };
        for (int trial = 0; trial < 200; ++trial) {
            int n = 10 + static_cast<int>(rng.below(90));
            while (!feasible(n)) ++n;
            Placement p = random_placement(n, index, rng);
            // Skew: everything onto provider 0.
            for (auto& a : p.assignments) a.provider_id = 0;
            const RepairResult r = repair_with_stats(std::move(p), 0.30, index, rng);
            REQUIRE(check_load_balancing(r.placement, 3, 0.30));
            REQUIRE(r.iterations <= n);
        }
    }
}

TEST_CASE("single point crossover") {
    const MarketState market = fixtures::full_market();
    const MarketIndex index(market);
    Rng rng(23);

    SECTION("identical parents reproduce themselves") {
        const Placement a = random_placement(10, index, rng);
        const auto [c1, c2] = crossover(a, a, rng);
        CHECK(c1 == a);
        CHECK(c2 == a);
    }

    SECTION("each child column comes from exactly one parent") {
        for (int trial = 0; trial < 1000; ++trial) {
            const Placement a = random_placement(8, index, rng);
            const Placement b = random_placement(8, index, rng);
            const auto [c1, c2] = crossover(a, b, rng);
            for (std::size_t i = 0; i < a.size(); ++i) {
                const bool swapped = c1.assignments[i] == b.assignments[i] &&
                                     c2.assignments[i] == a.assignments[i];
                const bool kept = c1.assignments[i] == a.assignments[i] &&
                                  c2.assignments[i] == b.assignments[i];
                REQUIRE((swapped || kept));
            }
            // The first column is never swapped, the cut is in [1, n-1].
            REQUIRE(c1.assignments[0] == a.assignments[0]);
            REQUIRE(c2.assignments[0] == b.assignments[0]);
        }
    }

    SECTION("length mismatch is rejected") {
        const Placement a = random_placement(3, index, rng);
        const Placement b = random_placement(4, index, rng);
        CHECK_THROWS_AS(crossover(a, b, rng), Error);
    }
}

TEST_CASE("per-cell mutation statistics") {
    const MarketState market = fixtures::full_market();
    const MarketIndex index(market);
    Rng rng(31);

    SECTION("rate zero is the identity") {
        const Placement p = random_placement(20, index, rng);
        CHECK(mutate(p, index, 0.0, rng) == p);
    }

    SECTION("rate one re-draws every cell") {
        // Under full re-draw a type cell stays equal with probability 1/l.
        const int trials = 4000;
        int unchanged_types = 0;
        const Placement p = random_placement(10, index, rng);
        for (int t = 0; t < trials; ++t) {
            const Placement q = mutate(p, index, 1.0, rng);
            for (std::size_t i = 0; i < p.size(); ++i)
                if (q.assignments[i].type_id == p.assignments[i].type_id)
                    ++unchanged_types;
        }
        const double cells = trials * 10.0;
        const double rate = unchanged_types / cells;
        const double expected = 1.0 / market.type_count();
        const double sigma = std::sqrt(expected * (1 - expected) / cells);
        CHECK(std::abs(rate - expected) < 5.0 * sigma);
    }

    SECTION("rate 1/n mutates about two cells per chromosome") {
        const int n = 100;
        const int trials = 10000;
        const Placement p = random_placement(n, index, rng);
        long long mutated = 0;
        for (int t = 0; t < trials; ++t) {
            const Placement q = mutate(p, index, 1.0 / n, rng);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (q.assignments[i].type_id != p.assignments[i].type_id) ++mutated;
                if (q.assignments[i].provider_id != p.assignments[i].provider_id) ++mutated;
            }
        }
        // A flipped cell can land on its old value, so the observable mean
        // is 2n * rate * (1 - 1/choices) at most; just require 5 sigma of
        // the Bernoulli count around the analytic mean.
        const double p_type = (1.0 / n) * (1.0 - 1.0 / market.type_count());
        const double p_prov = (1.0 / n) * (1.0 - 1.0 / market.provider_count());
        const double mean = trials * n * (p_type + p_prov);
        const double var = trials * n *
                           (p_type * (1 - p_type) + p_prov * (1 - p_prov));
        CHECK(std::abs(static_cast<double>(mutated) - mean) < 5.0 * std::sqrt(var));
    }

    SECTION("mutation never produces an unavailable pair") {
        MarketState removed = market;
        for (int k = 0; k < removed.provider_count(); ++k)
            removed.offer(0, k).available = false;
        const MarketIndex ridx(removed);
        for (int t = 0; t < 200; ++t) {
            const Placement q =
                mutate(random_placement(10, ridx, rng), ridx, 0.5, rng);
            for (const auto& a : q.assignments)
                REQUIRE(removed.offer(a.type_id, a.provider_id).available);
        }
    }
}

TEST_CASE("non-dominated sorting") {
    SECTION("identical vectors form a single front") {
        std::vector<std::pair<Placement, ObjectiveVector>> pop(
            5, {Placement{}, fixtures::objectives(1, 1, 1)});
        const RankedPopulation ranked = non_dominated_sort(pop);
        for (const auto& ind : ranked.individuals) CHECK(ind.rank == 0);
    }

    SECTION("a dominance chain yields singleton fronts") {
        std::vector<std::pair<Placement, ObjectiveVector>> pop = {
            {Placement{}, fixtures::objectives(3, 3, 1)},
            {Placement{}, fixtures::objectives(2, 2, 2)},
            {Placement{}, fixtures::objectives(1, 1, 3)},
        };
        const RankedPopulation ranked = non_dominated_sort(pop);
        CHECK(ranked.individuals[0].rank == 0);
        CHECK(ranked.individuals[1].rank == 1);
        CHECK(ranked.individuals[2].rank == 2);
    }

    SECTION("front 1 matches the brute-force oracle") {
        Rng rng(47);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t size = 1 + rng.below(50);
            std::vector<ObjectiveVector> objs;
            for (std::size_t i = 0; i < size; ++i)
                objs.push_back(fixtures::objectives(
                    static_cast<double>(rng.below(8)),
                    static_cast<double>(rng.below(8)),
                    static_cast<double>(rng.below(8))));
            const FrontInfo info = rank_population(objs);
            std::set<std::size_t> front1;
            for (std::size_t i = 0; i < size; ++i)
                if (info.rank[i] == 0) front1.insert(i);
            const auto expected = oracle::brute_force_front(objs);
            REQUIRE(front1 == std::set<std::size_t>(expected.begin(), expected.end()));
        }
    }

    SECTION("boundary individuals carry infinite crowding") {
        std::vector<ObjectiveVector> objs = {
            fixtures::objectives(1, 4, 1), fixtures::objectives(2, 3, 1),
            fixtures::objectives(3, 2, 1), fixtures::objectives(4, 1, 1)};
        const FrontInfo info = rank_population(objs);
        const double inf = std::numeric_limits<double>::infinity();
        CHECK(info.crowding[0] == inf);
        CHECK(info.crowding[3] == inf);
        CHECK(info.crowding[1] < inf);
        CHECK(info.crowding[2] < inf);
    }
}

TEST_CASE("binary tournament ordering") {
    Rng rng(53);
    RankedPopulation pop;
    pop.individuals.push_back({Placement{{{0, 0}}}, fixtures::objectives(1, 1, 1), 0, 5.0});

    SECTION("singleton population always wins") {
        for (int t = 0; t < 20; ++t)
            CHECK(binary_tournament(pop, rng) == pop.individuals[0].placement);
    }

    SECTION("lower rank always beats higher rank") {
        pop.individuals.push_back({Placement{{{1, 1}}}, fixtures::objectives(0, 0, 9), 1, 99.0});
        std::vector<int> rank = {0, 1};
        std::vector<double> crowding = {5.0, 99.0};
        for (int t = 0; t < 100; ++t)
            CHECK(tournament_pick(0, 1, rank, crowding, rng) == 0);
    }

    SECTION("equal rank resolves by crowding") {
        std::vector<int> rank = {0, 0};
        std::vector<double> crowding = {5.0, 1.0};
        for (int t = 0; t < 100; ++t)
            CHECK(tournament_pick(0, 1, rank, crowding, rng) == 0);
    }
}

TEST_CASE("archive update") {
    const ObjectiveBounds no_bounds;
    const auto entry = [](int tag, double f1, double f2, double f3) {
        return ArchiveEntry{Placement{{{tag, 0}}}, fixtures::objectives(f1, f2, f3)};
    };

    SECTION("first insertion") {
        const ParetoArchive a = update_archive({}, {entry(0, 1, 1, 1)}, no_bounds);
        REQUIRE(a.size() == 1);
        CHECK(a.bounds_met);
    }

    SECTION("dominated candidate leaves the archive unchanged") {
        ParetoArchive a = update_archive({}, {entry(0, 5, 5, 1)}, no_bounds);
        const ParetoArchive b = update_archive(a, {entry(1, 4, 4, 2)}, no_bounds);
        REQUIRE(b.size() == 1);
        CHECK(b.entries[0].objectives.f1_ticpu == 5);
    }

    SECTION("dominating candidate displaces everything it dominates") {
        ParetoArchive a = update_archive(
            {}, {entry(0, 5, 5, 5), entry(1, 4, 6, 5)}, no_bounds);
        REQUIRE(a.size() == 2);
        const ParetoArchive b = update_archive(a, {entry(2, 6, 7, 4)}, no_bounds);
        REQUIRE(b.size() == 1);
        CHECK(b.entries[0].objectives.f1_ticpu == 6);
    }

    SECTION("duplicate assignment sequences collapse") {
        ParetoArchive a = update_archive({}, {entry(0, 5, 5, 5)}, no_bounds);
        const ParetoArchive b = update_archive(a, {entry(0, 5, 5, 5)}, no_bounds);
        CHECK(b.size() == 1);
    }

    SECTION("bound-violating candidates are excluded once any admissible exists") {
        ObjectiveBounds bounds;
        bounds.u3 = 3.0;
        // Fallback first: nothing meets the bound.
        ParetoArchive a = update_archive({}, {entry(0, 9, 9, 8)}, bounds);
        CHECK_FALSE(a.bounds_met);
        CHECK(a.size() == 1);
        // An admissible candidate flips the archive to filtered mode.
        const ParetoArchive b = update_archive(a, {entry(1, 1, 1, 2)}, bounds);
        CHECK(b.bounds_met);
        REQUIRE(b.size() == 1);
        CHECK(b.entries[0].objectives.f3_tip == 2);
        // Later violators stay out.
        const ParetoArchive c = update_archive(b, {entry(2, 99, 99, 9)}, bounds);
        CHECK(c.size() == 1);
        CHECK(c.entries[0].objectives.f3_tip == 2);
    }

    SECTION("pairwise non-dominance invariant") {
        Rng rng(61);
        ParetoArchive a;
        ObjectiveBounds bounds;
        bounds.l1 = 2.0;
        for (int round = 0; round < 50; ++round) {
            std::vector<ArchiveEntry> cands;
            for (int i = 0; i < 10; ++i)
                cands.push_back(entry(static_cast<int>(rng.below(1000)),
                                      static_cast<double>(rng.below(10)),
                                      static_cast<double>(rng.below(10)),
                                      static_cast<double>(rng.below(10))));
            a = update_archive(a, cands, bounds);
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = 0; j < a.size(); ++j)
                    if (i != j)
                        REQUIRE_FALSE(dominates(a.entries[i].objectives,
                                                a.entries[j].objectives));
            if (a.bounds_met)
                for (const auto& e : a.entries)
                    REQUIRE(within_bounds(e.objectives, bounds));
        }
    }
}

TEST_CASE("solve recovers the exhaustive Pareto front on tiny instances") {
    MarketState market = fixtures::tiny_market();
    TenantRequest req;
    req.vm_count = 3;
    req.horizon_hours = 24.0;
    const auto truth = oracle::exhaustive_pareto_front(market, req);

    SolverParams params;
    params.population_size = 50;
    params.generations = 200;

    int exact = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const ParetoArchive archive = solve(nullptr, market, req, params, rng);
        std::set<oracle::ObjectiveTriple> found;
        for (const auto& e : archive.entries) {
            found.insert(oracle::triple(e.objectives));
            REQUIRE(truth.count(oracle::triple(e.objectives)) == 1);
        }
        if (found == truth) ++exact;
    }
    CHECK(exact >= 9);
}

TEST_CASE("minimal solver run produces a feasible archive") {
    const MarketState market = fixtures::full_market();
    TenantRequest req;
    req.vm_count = 4;
    req.loc_min = 0.25;
    SolverParams params;
    params.population_size = 2;
    params.generations = 1;
    Rng rng(3);
    const ParetoArchive archive = solve(nullptr, market, req, params, rng);
    REQUIRE_FALSE(archive.empty());
    for (const auto& e : archive.entries)
        CHECK(check_load_balancing(e.placement, 3, req.loc_min));
}

TEST_CASE("solve is deterministic under a fixed seed") {
    const MarketState market = fixtures::full_market();
    TenantRequest req;
    req.vm_count = 12;
    req.loc_min = 0.30;
    req.expected_tip = 5.0;
    req.tolerance_margin = 0.10;
    SolverParams params;
    params.population_size = 20;
    params.generations = 30;

    Rng rng1(77), rng2(77);
    const ParetoArchive a = solve(nullptr, market, req, params, rng1);
    const ParetoArchive b = solve(nullptr, market, req, params, rng2);
    REQUIRE(a.size() == b.size());
    CHECK(a.bounds_met == b.bounds_met);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.entries[i].placement == b.entries[i].placement);
        CHECK(a.entries[i].objectives == b.entries[i].objectives);
    }
}

TEST_CASE("solve rejects infeasible configurations") {
    const MarketState market = fixtures::full_market();
    TenantRequest req;
    req.vm_count = 10;
    req.loc_min = 0.5; // 0.5 x 3 > 1
    SolverParams params;
    Rng rng(1);
    CHECK_THROWS_AS(solve(nullptr, market, req, params, rng), ValidationError);
}
