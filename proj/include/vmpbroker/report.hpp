#ifndef VMPBROKER_REPORT_HPP
#define VMPBROKER_REPORT_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenario.hpp"

namespace vmpbroker {

/// Round-half-even fixed formatting, two places by default (table precision).
inline std::string format_fixed(double value, int places = 2) {
    double scale = 1.0;
    for (int i = 0; i < places; ++i) scale *= 10.0;
    const double scaled = std::nearbyint(value * scale); // FE_TONEAREST: half-even
    long long units = static_cast<long long>(scaled);
    std::string sign;
    if (units < 0) {
        sign = "-";
        units = -units;
    }
    std::string digits = std::to_string(units);
    if (static_cast<int>(digits.size()) <= places)
        digits.insert(0, static_cast<std::size_t>(places + 1 - digits.size()), '0');
    if (places == 0) return sign + digits;
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    return sign + digits;
}

/// Shortest round-trip decimal form; platform-independent.
inline std::string format_full(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, end);
}

inline std::string cell_text(MatrixCell cell) {
    switch (cell) {
        case MatrixCell::NotApplicable: return "N/A";
        case MatrixCell::Succ: return "succ";
        case MatrixCell::Dash: return "-";
    }
    return "?";
}

inline const char* trace_csv_header() {
    return "run,strategy,t,n,f1,f2,f3,ro_cpu,ro_mem,archive_size,reconfigured,bounds_met\n";
}

inline std::string render_trace_row(int run, SelectionStrategy strategy,
                                    const InstantRecord& rec) {
    return std::to_string(run) + "," + strategy_name(strategy) + "," +
           std::to_string(rec.t) + "," + std::to_string(rec.vm_count) + "," +
           format_full(rec.objectives.f1_ticpu) + "," +
           format_full(rec.objectives.f2_timem) + "," +
           format_full(rec.objectives.f3_tip) + "," +
           format_full(rec.objectives.ro_cpu) + "," +
           format_full(rec.objectives.ro_mem) + "," +
           std::to_string(rec.archive_size) + "," +
           std::to_string(rec.reconfigured) + "," +
           (rec.bounds_met ? "true" : "false") + "\n";
}

inline std::string render_timeline_csv(const TimelineResult& timeline, int run = 1) {
    std::string out = trace_csv_header();
    for (const auto& rec : timeline.per_instant)
        out += render_trace_row(run, timeline.strategy, rec);
    return out;
}

inline std::string render_trace_csv(const ExperimentReport& report) {
    std::string out = trace_csv_header();
    for (std::size_t si = 0; si < report.strategies.size(); ++si)
        for (int r = 0; r < report.runs; ++r)
            for (const auto& rec : report.timelines[si][r].per_instant)
                out += render_trace_row(r + 1, report.strategies[si], rec);
    return out;
}

inline std::string render_summary_csv(const ExperimentReport& report) {
    std::string out = "no,strategy,ticpu,timem,tip\n";
    for (const auto& s : report.summaries)
        out += strategy_label(s.strategy) + "," + strategy_name(s.strategy) + "," +
               format_fixed(s.avg_ticpu) + "," + format_fixed(s.avg_timem) + "," +
               format_fixed(s.avg_tip) + "\n";
    return out;
}

inline std::string render_matrix_csv(const ExperimentReport& report,
                                     const RelationMatrix& matrix) {
    std::string out = "no,strategy";
    for (const auto& s : report.strategies) out += "," + strategy_label(s);
    out += "\n";
    for (std::size_t a = 0; a < report.strategies.size(); ++a) {
        out += strategy_label(report.strategies[a]) + "," +
               strategy_name(report.strategies[a]);
        for (std::size_t b = 0; b < report.strategies.size(); ++b)
            out += "," + cell_text(matrix[a][b]);
        out += "\n";
    }
    return out;
}

inline nlohmann::json objectives_to_json(const ObjectiveVector& v) {
    return {{"f1_ticpu", v.f1_ticpu}, {"f2_timem", v.f2_timem},
            {"f3_tip", v.f3_tip},     {"raw_ticpu", v.raw_ticpu},
            {"raw_timem", v.raw_timem}, {"ro_cpu", v.ro_cpu},
            {"ro_mem", v.ro_mem}};
}

inline ObjectiveVector objectives_from_json(const nlohmann::json& j) {
    ObjectiveVector v;
    v.f1_ticpu = j.at("f1_ticpu").get<double>();
    v.f2_timem = j.at("f2_timem").get<double>();
    v.f3_tip = j.at("f3_tip").get<double>();
    v.raw_ticpu = j.at("raw_ticpu").get<double>();
    v.raw_timem = j.at("raw_timem").get<double>();
    v.ro_cpu = j.at("ro_cpu").get<double>();
    v.ro_mem = j.at("ro_mem").get<double>();
    return v;
}

/// Placement wire form: array of [instance_type_name, provider_name] pairs,
/// index = VM ordinal.
inline nlohmann::json placement_to_json(const Placement& p, const MarketState& state) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : p.assignments) {
        if (a.type_id < 0 || a.type_id >= state.type_count() || a.provider_id < 0 ||
            a.provider_id >= state.provider_count())
            throw Error("placement references a type or provider outside this "
                        "market snapshot; use the scenario's cumulative market");
        arr.push_back({state.instance_types[a.type_id].name,
                       state.providers[a.provider_id]});
    }
    return arr;
}

inline Placement placement_from_json(const nlohmann::json& j, const MarketState& state) {
    Placement p;
    for (const auto& pair : j) {
        auto type_id = state.type_index(pair.at(0).get<std::string>());
        auto provider_id = state.provider_index(pair.at(1).get<std::string>());
        if (!type_id || !provider_id)
            throw ParseError("placement references unknown type or provider");
        p.assignments.push_back({*type_id, *provider_id});
    }
    return p;
}

inline nlohmann::json matrix_to_json(const ExperimentReport& report,
                                     const RelationMatrix& matrix) {
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t a = 0; a < report.strategies.size(); ++a) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t b = 0; b < report.strategies.size(); ++b)
            row[strategy_label(report.strategies[b])] = cell_text(matrix[a][b]);
        rows[strategy_label(report.strategies[a])] = row;
    }
    return rows;
}

inline nlohmann::json report_to_json(const ExperimentReport& report,
                                     const MarketState& market) {
    nlohmann::json doc;
    doc["master_seed"] = report.master_seed;
    doc["runs"] = report.runs;
    doc["strategies"] = nlohmann::json::array();
    for (const auto& s : report.strategies)
        doc["strategies"].push_back(strategy_name(s));
    doc["summaries"] = nlohmann::json::array();
    for (const auto& s : report.summaries)
        doc["summaries"].push_back({{"strategy", strategy_name(s.strategy)},
                                    {"avg_ticpu", s.avg_ticpu},
                                    {"avg_timem", s.avg_timem},
                                    {"avg_tip", s.avg_tip}});
    doc["dominance"] = matrix_to_json(report, report.dominance);
    doc["preference"] = matrix_to_json(report, report.preference);
    doc["timelines"] = nlohmann::json::array();
    for (std::size_t si = 0; si < report.strategies.size(); ++si)
        for (int r = 0; r < report.runs; ++r) {
            const auto& tl = report.timelines[si][r];
            nlohmann::json instants = nlohmann::json::array();
            for (const auto& rec : tl.per_instant)
                instants.push_back({{"t", rec.t},
                                    {"n", rec.vm_count},
                                    {"objectives", objectives_to_json(rec.objectives)},
                                    {"placement", placement_to_json(rec.placement, market)},
                                    {"archive_size", rec.archive_size},
                                    {"bounds_met", rec.bounds_met},
                                    {"reconfigured", rec.reconfigured}});
            doc["timelines"].push_back({{"strategy", strategy_name(tl.strategy)},
                                        {"run", r + 1},
                                        {"seed", tl.seed},
                                        {"instants", instants}});
        }
    return doc;
}

inline ExperimentReport report_from_json(const nlohmann::json& doc,
                                         const MarketState& market) {
    ExperimentReport report;
    report.master_seed = doc.at("master_seed").get<std::uint64_t>();
    report.runs = doc.at("runs").get<int>();
    for (const auto& s : doc.at("strategies")) {
        auto strategy = parse_strategy(s.get<std::string>());
        if (!strategy) throw ParseError("unknown strategy in report");
        report.strategies.push_back(*strategy);
    }
    for (const auto& s : doc.at("summaries")) {
        StrategySummary sum;
        sum.strategy = *parse_strategy(s.at("strategy").get<std::string>());
        sum.avg_ticpu = s.at("avg_ticpu").get<double>();
        sum.avg_timem = s.at("avg_timem").get<double>();
        sum.avg_tip = s.at("avg_tip").get<double>();
        report.summaries.push_back(sum);
    }
    report.timelines.assign(report.strategies.size(),
                            std::vector<TimelineResult>(report.runs));
    for (const auto& t : doc.at("timelines")) {
        auto strategy = *parse_strategy(t.at("strategy").get<std::string>());
        std::size_t si = 0;
        for (std::size_t i = 0; i < report.strategies.size(); ++i)
            if (report.strategies[i] == strategy) si = i;
        const int run = t.at("run").get<int>() - 1;
        TimelineResult tl;
        tl.strategy = strategy;
        tl.seed = t.at("seed").get<std::uint64_t>();
        for (const auto& inst : t.at("instants")) {
            InstantRecord rec;
            rec.t = inst.at("t").get<int>();
            rec.vm_count = inst.at("n").get<int>();
            rec.objectives = objectives_from_json(inst.at("objectives"));
            rec.placement = placement_from_json(inst.at("placement"), market);
            rec.archive_size = inst.at("archive_size").get<std::size_t>();
            rec.bounds_met = inst.at("bounds_met").get<bool>();
            rec.reconfigured = inst.at("reconfigured").get<int>();
            tl.per_instant.push_back(std::move(rec));
        }
        report.timelines[si][run] = std::move(tl);
    }
    auto [dom, pref] = compare_strategies(report);
    report.dominance = std::move(dom);
    report.preference = std::move(pref);
    return report;
}

inline std::string render_report(const ExperimentReport& report,
                                 const MarketState& market,
                                 const std::string& format) {
    if (format == "json") return report_to_json(report, market).dump(2) + "\n";
    if (format == "csv") return render_summary_csv(report);
    throw Error("unknown report format '" + format + "'");
}

} // namespace vmpbroker

#endif
