// Command-line front end: market/scenario validation, single-instant
// solving, timeline simulation and full strategy-comparison experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <vmpbroker/vmpbroker.hpp>

namespace {

using namespace vmpbroker;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VMPBROKER_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 42;
}

std::vector<SelectionStrategy> resolve_strategies(const std::vector<std::string>& names) {
    std::vector<SelectionStrategy> out;
    for (const auto& name : names) {
        if (name == "all") {
            for (SelectionStrategy s : all_strategies()) out.push_back(s);
            continue;
        }
        auto s = parse_strategy(name);
        if (!s) throw CLI::ValidationError("--strategies", "unknown strategy '" + name + "'");
        out.push_back(*s);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

int run_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return kExitValidation;
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: JSON parse error: " << e.what() << "\n";
        return kExitValidation;
    }
    try {
        std::vector<Violation> violations;
        if (doc.contains("market")) {
            Scenario sc = load_scenario(doc, std::filesystem::path(path).parent_path());
            violations = scenario_violations(sc);
        } else {
            violations = validate_market(load_market(doc));
        }
        if (!violations.empty()) {
            for (const auto& v : violations)
                std::cerr << "violation [" << v.invariant << "] " << v.detail << "\n";
            return kExitValidation;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    std::cout << "ok\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective broker-oriented VM placement solver and simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string strategy_name_arg = "preferred";
    std::vector<std::string> strategy_names{"all"};
    std::string output_dir;
    std::string format = "csv";
    std::uint64_t seed = default_seed();
    int runs = 10;
    int population = 50;
    int generations = 200;
    int workers = 0;
    bool force_resolve = false;
    bool raw_distance = false;

    auto* validate = app.add_subcommand("validate", "Validate a market or scenario file");
    validate->add_option("file", scenario_path, "market or scenario JSON")->required();

    const auto add_solver_opts = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master RNG seed");
        cmd->add_option("--population", population, "population size");
        cmd->add_option("--generations", generations, "generation count");
        cmd->add_flag("--raw-distance", raw_distance,
                      "S2: Euclidean distance over raw units instead of normalized axes");
    };

    auto* solve_cmd = app.add_subcommand("solve", "Solve the scenario's first instant");
    solve_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
    solve_cmd->add_option("--strategy", strategy_name_arg,
                          "print only the entry this strategy selects");
    add_solver_opts(solve_cmd);
    bool whole_archive = false;
    solve_cmd->add_flag("--archive", whole_archive, "print the whole Pareto archive");

    auto* simulate = app.add_subcommand("simulate", "Replay one timeline with one strategy");
    simulate->add_option("scenario", scenario_path, "scenario JSON")->required();
    simulate->add_option("--strategy", strategy_name_arg, "selection strategy")->required();
    simulate->add_flag("--force-resolve", force_resolve, "re-solve every instant");
    add_solver_opts(simulate);

    auto* experiment = app.add_subcommand("experiment", "Run a multi-run strategy comparison");
    experiment->add_option("scenario", scenario_path, "scenario JSON")->required();
    experiment->add_option("--strategies", strategy_names, "strategy names or 'all'");
    experiment->add_option("--runs", runs, "runs per strategy");
    experiment->add_option("--output-dir,-o", output_dir, "directory for result files");
    experiment->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    experiment->add_option("--workers", workers, "worker pool size (0 = all processors)");
    experiment->add_flag("--force-resolve", force_resolve, "re-solve every instant");
    add_solver_opts(experiment);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return run_validate(scenario_path);

        const Scenario scenario = load_scenario_file(scenario_path);
        SolverParams params;
        params.population_size = population;
        params.generations = generations;
        RunOptions options;
        options.force_resolve = force_resolve;
        options.selection.raw_distance = raw_distance;
        options.workers = workers;

        if (solve_cmd->parsed()) {
            Rng rng(derive_seed(seed, 1));
            const ParetoArchive archive = solve(nullptr, scenario.market,
                                                scenario.initial_request, params, rng);
            nlohmann::json out;
            out["bounds_met"] = archive.bounds_met;
            out["archive_size"] = archive.size();
            if (whole_archive) {
                out["entries"] = nlohmann::json::array();
                for (const auto& e : archive.entries)
                    out["entries"].push_back(
                        {{"placement", placement_to_json(e.placement, scenario.market)},
                         {"objectives", objectives_to_json(e.objectives)}});
            } else {
                auto strategy = parse_strategy(strategy_name_arg);
                if (!strategy) {
                    std::cerr << "error: unknown strategy '" << strategy_name_arg << "'\n";
                    return kExitUsage;
                }
                const ArchiveEntry& chosen =
                    select(archive, *strategy, rng, options.selection);
                out["strategy"] = strategy_name(*strategy);
                out["placement"] = placement_to_json(chosen.placement, scenario.market);
                out["objectives"] = objectives_to_json(chosen.objectives);
            }
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (simulate->parsed()) {
            auto strategy = parse_strategy(strategy_name_arg);
            if (!strategy) {
                std::cerr << "error: unknown strategy '" << strategy_name_arg << "'\n";
                return kExitUsage;
            }
            const TimelineResult timeline =
                run_timeline(scenario, params, *strategy, seed, options);
            std::cout << render_timeline_csv(timeline);
            return kExitOk;
        }

        // experiment
        const std::vector<SelectionStrategy> strategies = resolve_strategies(strategy_names);
        params.seed = seed;
        const ExperimentReport report =
            run_experiment(scenario, params, strategies, runs, seed, options);
        // Placements from later instants may use types introduced by events,
        // so reports resolve names against the cumulative market.
        const MarketState report_market = final_market(scenario);
        if (output_dir.empty()) {
            std::cout << render_report(report, report_market, format);
        } else {
            const std::filesystem::path dir(output_dir);
            std::filesystem::create_directories(dir);
            if (format == "json") {
                write_file(dir / "report.json",
                           render_report(report, report_market, "json"));
            } else {
                write_file(dir / "summary.csv", render_summary_csv(report));
                write_file(dir / "trace.csv", render_trace_csv(report));
                write_file(dir / "dominance.csv",
                           render_matrix_csv(report, report.dominance));
                write_file(dir / "preference.csv",
                           render_matrix_csv(report, report.preference));
            }
        }
        return kExitOk;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
