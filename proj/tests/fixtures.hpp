#ifndef VMPBROKER_TESTS_FIXTURES_HPP
#define VMPBROKER_TESTS_FIXTURES_HPP

#include <filesystem>
#include <fstream>

#include <vmpbroker/vmpbroker.hpp>

namespace fixtures {

inline std::filesystem::path data_dir() { return VMPBROKER_DATA_DIR; }

inline vmpbroker::MarketState full_market() {
    std::ifstream in(data_dir() / "market.json");
    return vmpbroker::load_market(in);
}

inline vmpbroker::Scenario experiment1() {
    return vmpbroker::load_scenario_file(data_dir() / "experiment1.json");
}

inline vmpbroker::Scenario experiment2() {
    return vmpbroker::load_scenario_file(data_dir() / "experiment2.json");
}

// Small synthetic market: 2 providers x 2 types, hour-denominated times.
inline vmpbroker::MarketState tiny_market() {
    nlohmann::json doc = {
        {"time_unit", "hours"},
        {"providers", {"P1", "P2"}},
        {"instance_types",
         {{{"name", "a"}, {"cpu_cores", 1}, {"memory_gb", 2}},
          {{"name", "b"}, {"cpu_cores", 2}, {"memory_gb", 4}}}},
        {"offers",
         {{{"provider", "P1"}, {"instance_type", "a"}, {"price_per_hour", 0.01},
           {"allocation_time", 0.02}, {"release_time", 0.01}},
          {{"provider", "P1"}, {"instance_type", "b"}, {"price_per_hour", 0.05},
           {"allocation_time", 0.02}, {"release_time", 0.01}},
          {{"provider", "P2"}, {"instance_type", "a"}, {"price_per_hour", 0.02},
           {"allocation_time", 0.02}, {"release_time", 0.01}},
          {{"provider", "P2"}, {"instance_type", "b"}, {"price_per_hour", 0.04},
           {"allocation_time", 0.02}, {"release_time", 0.01}}}}};
    return vmpbroker::load_market(doc);
}

inline vmpbroker::ObjectiveVector objectives(double f1, double f2, double f3) {
    vmpbroker::ObjectiveVector v;
    v.f1_ticpu = v.raw_ticpu = f1;
    v.f2_timem = v.raw_timem = f2;
    v.f3_tip = f3;
    return v;
}

} // namespace fixtures

#endif
