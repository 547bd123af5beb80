#ifndef VMPBROKER_SCENARIO_HPP
#define VMPBROKER_SCENARIO_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <fstream>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "market.hpp"
#include "placement.hpp"
#include "selection.hpp"
#include "solver.hpp"

namespace vmpbroker {

/// Scenario events keep symbolic names; they are resolved against the
/// market state current at their instant (types added by earlier events
/// must be referenceable).
struct RawEvent {
    int at_instant = 1;
    nlohmann::json body;
};

struct Scenario {
    MarketState market; // state at t = 1
    int instants = 1;
    double hours_per_instant = 24.0;
    std::string time_unit = "hours"; // unit for event time payloads
    TenantRequest initial_request;
    std::vector<RawEvent> events;
};

inline MarketEvent resolve_event(const RawEvent& raw, const MarketState& state,
                                 const std::string& time_unit) {
    MarketEvent ev;
    ev.at_instant = raw.at_instant;
    const std::string kind = raw.body.at("kind").get<std::string>();
    const auto& b = raw.body;

    const auto provider = [&](const nlohmann::json& v) {
        const std::string name = v.get<std::string>();
        auto k = state.provider_index(name);
        if (!k) throw ValidationError("event references unknown provider '" + name + "'");
        return *k;
    };
    const auto type_of = [&](const nlohmann::json& v) {
        const std::string name = v.get<std::string>();
        auto j = state.type_index(name);
        if (!j) throw ValidationError("event references unknown instance type '" + name + "'");
        return *j;
    };

    if (kind == "add_instance_type") {
        events::AddInstanceType add;
        const auto& t = b.at("instance_type");
        add.type_spec.name = t.at("name").get<std::string>();
        add.type_spec.cpu_cores = t.at("cpu_cores").get<int>();
        add.type_spec.memory_gb = t.at("memory_gb").get<int>();
        for (const auto& o : b.at("offers")) {
            OfferQuote q;
            q.provider_id = provider(o.at("provider"));
            q.price_micros = price_to_micros(o.at("price_per_hour").get<double>());
            q.allocation_hours = time_to_hours(o.at("allocation_time").get<double>(), time_unit);
            q.release_hours = time_to_hours(o.at("release_time").get<double>(), time_unit);
            add.offers.push_back(q);
        }
        ev.payload = std::move(add);
    } else if (kind == "remove_instance_type") {
        ev.payload = events::RemoveInstanceType{type_of(b.at("instance_type"))};
    } else if (kind == "price_set") {
        events::PriceSet ps;
        ps.instance_type_id = type_of(b.at("instance_type"));
        ps.provider_id = provider(b.at("provider"));
        ps.price_micros = price_to_micros(b.at("price_per_hour").get<double>());
        ev.payload = ps;
    } else if (kind == "price_multiply") {
        events::PriceMultiply pm;
        if (b.contains("provider")) pm.provider_id = provider(b.at("provider"));
        pm.factor = b.at("factor").get<double>();
        ev.payload = pm;
    } else if (kind == "demand_set") {
        ev.payload = events::DemandSet{b.at("vm_count").get<int>()};
    } else if (kind == "bounds_set") {
        events::BoundsSet bs;
        if (b.contains("expected_ticpu")) bs.expected_ticpu = b.at("expected_ticpu").get<double>();
        if (b.contains("expected_timem")) bs.expected_timem = b.at("expected_timem").get<double>();
        if (b.contains("expected_tip")) bs.expected_tip = b.at("expected_tip").get<double>();
        if (b.contains("tolerance_margin")) bs.tolerance_margin = b.at("tolerance_margin").get<double>();
        ev.payload = bs;
    } else if (kind == "horizon_set") {
        ev.payload = events::HorizonSet{b.at("horizon_hours").get<double>()};
    } else {
        throw ParseError("unknown event kind '" + kind + "'");
    }
    return ev;
}

inline TenantRequest parse_request(const nlohmann::json& r, double default_horizon) {
    TenantRequest req;
    req.vm_count = r.at("vm_count").get<int>();
    req.horizon_hours = r.value("horizon_hours", default_horizon);
    req.loc_min = r.value("loc_min", 0.0);
    if (r.contains("expected_ticpu")) req.expected_ticpu = r.at("expected_ticpu").get<double>();
    if (r.contains("expected_timem")) req.expected_timem = r.at("expected_timem").get<double>();
    if (r.contains("expected_tip")) req.expected_tip = r.at("expected_tip").get<double>();
    req.tolerance_margin = r.value("tolerance_margin", 0.0);
    return req;
}

inline Scenario load_scenario(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {}) {
    Scenario sc;
    const auto& market = doc.at("market");
    nlohmann::json market_doc;
    if (market.is_string()) {
        const std::filesystem::path path = base_dir / market.get<std::string>();
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open market file " + path.string());
        try {
            market_doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("market JSON parse error: ") + e.what());
        }
    } else {
        market_doc = market;
    }
    sc.market = load_market(market_doc);
    sc.time_unit = market_doc.value("time_unit", std::string("hours"));
    sc.instants = doc.at("instants").get<int>();
    if (sc.instants < 1) throw ParseError("instants must be >= 1");
    sc.hours_per_instant = doc.value("hours_per_instant", 24.0);
    sc.initial_request = parse_request(doc.at("initial_request"), sc.hours_per_instant);
    validate_request(sc.initial_request, sc.market.provider_count());

    for (const auto& e : doc.value("events", nlohmann::json::array())) {
        RawEvent raw;
        raw.at_instant = e.at("at_instant").get<int>();
        if (raw.at_instant < 1 || raw.at_instant > sc.instants)
            throw ParseError("event at_instant " + std::to_string(raw.at_instant) +
                             " outside [1, " + std::to_string(sc.instants) + "]");
        raw.body = e;
        sc.events.push_back(std::move(raw));
    }
    std::stable_sort(sc.events.begin(), sc.events.end(),
                     [](const RawEvent& a, const RawEvent& b) {
                         return a.at_instant < b.at_instant;
                     });
    return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario JSON parse error: ") + e.what());
    }
    return load_scenario(doc, path.parent_path());
}

/// Market state after every market event has fired. Instance type ids are
/// append-only and removal is soft, so this cumulative catalog can name
/// every (type, provider) pair any instant's placement may reference.
inline MarketState final_market(const Scenario& scenario) {
    MarketState market = scenario.market;
    for (const auto& raw : scenario.events) {
        const MarketEvent ev = resolve_event(raw, market, scenario.time_unit);
        if (ev.is_market_event()) market = apply_event(market, ev);
    }
    return market;
}

/// Dry-runs the event timeline (no solving) and reports every problem.
inline std::vector<Violation> scenario_violations(const Scenario& scenario) {
    std::vector<Violation> out;
    for (const auto& v : validate_market(scenario.market)) out.push_back(v);
    MarketState market = scenario.market;
    TenantRequest request = scenario.initial_request;
    for (const auto& raw : scenario.events) {
        try {
            MarketEvent ev = resolve_event(raw, market, scenario.time_unit);
            if (ev.is_market_event()) {
                market = apply_event(market, ev);
                for (const auto& v : validate_market(market)) out.push_back(v);
            } else {
                request = apply_request_event(request, ev);
                validate_request(request, market.provider_count());
            }
        } catch (const Error& e) {
            out.push_back({"event", "t=" + std::to_string(raw.at_instant) + ": " + e.what()});
        }
    }
    return out;
}

struct InstantRecord {
    int t = 1;
    int vm_count = 0;
    Placement placement;
    ObjectiveVector objectives;
    std::size_t archive_size = 0;
    bool bounds_met = false;
    int reconfigured = 0;

    bool operator==(const InstantRecord&) const = default;
};

struct TimelineResult {
    SelectionStrategy strategy = SelectionStrategy::S1_Random;
    std::uint64_t seed = 0;
    std::vector<InstantRecord> per_instant;

    bool operator==(const TimelineResult&) const = default;
};

struct RunOptions {
    bool force_resolve = false; // re-solve every instant even without events
    SelectionOptions selection;
    int workers = 0; // 0 = hardware concurrency
};

inline TimelineResult run_timeline(const Scenario& scenario,
                                   const SolverParams& params,
                                   SelectionStrategy strategy,
                                   std::uint64_t seed,
                                   const RunOptions& options = {}) {
    TimelineResult result;
    result.strategy = strategy;
    result.seed = seed;

    MarketState market = scenario.market;
    TenantRequest request = scenario.initial_request;
    std::optional<Placement> prev;

    for (int t = 1; t <= scenario.instants; ++t) {
        bool fired = false;
        for (const auto& raw : scenario.events) {
            if (raw.at_instant != t) continue;
            MarketEvent ev = resolve_event(raw, market, scenario.time_unit);
            if (ev.is_market_event())
                market = apply_event(market, ev);
            else
                request = apply_request_event(request, ev);
            fired = true;
        }
        market.instant = t;

        InstantRecord rec;
        rec.t = t;
        rec.vm_count = request.vm_count;
        if (t == 1 || fired || options.force_resolve) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            try {
                const ParetoArchive archive =
                    solve(prev ? &*prev : nullptr, market, request, params, rng);
                const ArchiveEntry& chosen =
                    select(archive, strategy, rng, options.selection);
                rec.placement = chosen.placement;
                rec.objectives = chosen.objectives;
                rec.archive_size = archive.size();
                rec.bounds_met = archive.bounds_met;
                rec.reconfigured =
                    count_reconfigured(prev ? &*prev : nullptr, chosen.placement);
            } catch (const Error& e) {
                throw Error("instant t=" + std::to_string(t) + ": " + e.what());
            }
        } else {
            // No change detected: carry the previous selection forward with
            // zero reconfiguration overhead.
            rec.placement = *prev;
            rec.objectives = evaluate_objectives(&*prev, *prev, market, request);
            rec.archive_size = result.per_instant.back().archive_size;
            rec.bounds_met = result.per_instant.back().bounds_met;
            rec.reconfigured = 0;
        }
        prev = rec.placement;
        result.per_instant.push_back(std::move(rec));
    }
    return result;
}

struct StrategySummary {
    SelectionStrategy strategy = SelectionStrategy::S1_Random;
    double avg_ticpu = 0.0;
    double avg_timem = 0.0;
    double avg_tip = 0.0;

    ObjectiveVector as_objectives() const {
        ObjectiveVector v;
        v.f1_ticpu = avg_ticpu;
        v.f2_timem = avg_timem;
        v.f3_tip = avg_tip;
        return v;
    }

    bool operator==(const StrategySummary&) const = default;
};

enum class MatrixCell { NotApplicable, Succ, Dash };

using RelationMatrix = std::vector<std::vector<MatrixCell>>;

struct ExperimentReport {
    std::vector<SelectionStrategy> strategies;
    int runs = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::vector<TimelineResult>> timelines; // [strategy][run]
    std::vector<StrategySummary> summaries;
    RelationMatrix dominance;
    RelationMatrix preference;

    bool operator==(const ExperimentReport&) const = default;
};

/// Pairwise dominance and preference over strategy-level averaged vectors.
inline std::pair<RelationMatrix, RelationMatrix> compare_strategies(
    const ExperimentReport& report) {
    const std::size_t s = report.summaries.size();
    RelationMatrix dom(s, std::vector<MatrixCell>(s, MatrixCell::Dash));
    RelationMatrix pref(s, std::vector<MatrixCell>(s, MatrixCell::Dash));
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b) {
            if (a == b) {
                dom[a][b] = MatrixCell::NotApplicable;
                pref[a][b] = MatrixCell::NotApplicable;
                continue;
            }
            const ObjectiveVector va = report.summaries[a].as_objectives();
            const ObjectiveVector vb = report.summaries[b].as_objectives();
            if (dominates(va, vb)) dom[a][b] = MatrixCell::Succ;
            if (preference(va, vb) == Preference::APreferred)
                pref[a][b] = MatrixCell::Succ;
        }
    return {dom, pref};
}

namespace detail {

inline std::uint64_t timeline_seed(std::uint64_t master, int run,
                                   SelectionStrategy strategy) {
    // Keyed by the strategy's canonical ordinal so a strategy's streams do
    // not depend on which subset of strategies was requested.
    std::uint64_t ordinal = 0;
    for (std::size_t i = 0; i < all_strategies().size(); ++i)
        if (all_strategies()[i] == strategy) ordinal = i + 1;
    return derive_seed(master, static_cast<std::uint64_t>(run + 1), ordinal);
}

} // namespace detail

inline ExperimentReport run_experiment(const Scenario& scenario,
                                       const SolverParams& params,
                                       const std::vector<SelectionStrategy>& strategies,
                                       int runs, std::uint64_t master_seed,
                                       const RunOptions& options = {}) {
    if (runs < 1) throw Error("runs must be >= 1");
    if (strategies.empty()) throw Error("no strategies given");

    ExperimentReport report;
    report.strategies = strategies;
    report.runs = runs;
    report.master_seed = master_seed;
    report.timelines.assign(strategies.size(), std::vector<TimelineResult>(runs));

    struct Task {
        std::size_t strategy_index;
        int run;
    };
    std::vector<Task> tasks;
    for (std::size_t si = 0; si < strategies.size(); ++si)
        for (int r = 0; r < runs; ++r) tasks.push_back({si, r});

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || failed.load()) return;
            const Task& task = tasks[i];
            const SelectionStrategy strategy = strategies[task.strategy_index];
            try {
                report.timelines[task.strategy_index][task.run] = run_timeline(
                    scenario, params, strategy,
                    detail::timeline_seed(master_seed, task.run, strategy), options);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                failure = "strategy " + strategy_name(strategy) + ", run " +
                          std::to_string(task.run + 1) + ": " + e.what();
                return;
            }
        }
    };

    int workers = options.workers;
    if (workers <= 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error("experiment failed at " + failure);

    // Deterministic fold over the canonically ordered result grid.
    for (std::size_t si = 0; si < strategies.size(); ++si) {
        StrategySummary sum;
        sum.strategy = strategies[si];
        double c = 0;
        for (const auto& timeline : report.timelines[si])
            for (const auto& rec : timeline.per_instant) {
                sum.avg_ticpu += rec.objectives.f1_ticpu;
                sum.avg_timem += rec.objectives.f2_timem;
                sum.avg_tip += rec.objectives.f3_tip;
                c += 1.0;
            }
        sum.avg_ticpu /= c;
        sum.avg_timem /= c;
        sum.avg_tip /= c;
        report.summaries.push_back(sum);
    }
    auto [dom, pref] = compare_strategies(report);
    report.dominance = std::move(dom);
    report.preference = std::move(pref);
    return report;
}

} // namespace vmpbroker

#endif
