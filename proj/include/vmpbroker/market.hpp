#ifndef VMPBROKER_MARKET_HPP
#define VMPBROKER_MARKET_HPP

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace vmpbroker {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// Hardware configuration of one instance type. Indices are 0-based
/// internally; diagnostics report 1-based (j, k) coordinates.
struct InstanceTypeSpec {
    int id = 0;
    std::string name;
    int cpu_cores = 0;
    int memory_gb = 0;

    bool operator==(const InstanceTypeSpec&) const = default;
};

/// One (instance type, provider) cell of the offer grid. Prices are held
/// as integer micro-currency units so that report totals are exact.
struct ProviderOffer {
    int provider_id = 0;
    int instance_type_id = 0;
    std::int64_t price_micros = 0;
    double allocation_hours = 0.0;
    double release_hours = 0.0;
    bool available = true;

    double price_per_hour() const {
        return static_cast<double>(price_micros) / 1e6;
    }

    bool operator==(const ProviderOffer&) const = default;
};

inline std::int64_t price_to_micros(double price_per_hour) {
    return static_cast<std::int64_t>(std::llround(price_per_hour * 1e6));
}

/// Snapshot of the provider/instance-type catalog at one instant.
/// Immutable after construction; events produce fresh states.
struct MarketState {
    int instant = 1;
    std::vector<std::string> providers;
    std::vector<InstanceTypeSpec> instance_types;
    std::vector<ProviderOffer> offers; // dense, row-major [j * m + k]

    int provider_count() const { return static_cast<int>(providers.size()); }
    int type_count() const { return static_cast<int>(instance_types.size()); }

    const ProviderOffer& offer(int type_id, int provider_id) const {
        return offers[static_cast<std::size_t>(type_id) * providers.size() +
                      static_cast<std::size_t>(provider_id)];
    }
    ProviderOffer& offer(int type_id, int provider_id) {
        return offers[static_cast<std::size_t>(type_id) * providers.size() +
                      static_cast<std::size_t>(provider_id)];
    }

    std::optional<int> provider_index(const std::string& name) const {
        for (std::size_t k = 0; k < providers.size(); ++k)
            if (providers[k] == name) return static_cast<int>(k);
        return std::nullopt;
    }

    std::optional<int> type_index(const std::string& name) const {
        for (std::size_t j = 0; j < instance_types.size(); ++j)
            if (instance_types[j].name == name) return static_cast<int>(j);
        return std::nullopt;
    }

    bool operator==(const MarketState&) const = default;
};

/// Per-instant tenant demand with soft objective bounds.
struct TenantRequest {
    int vm_count = 1;
    double horizon_hours = 24.0;
    double loc_min = 0.0;
    std::optional<double> expected_ticpu; // lower bound L1
    std::optional<double> expected_timem; // lower bound L2
    std::optional<double> expected_tip;   // upper bound U3
    double tolerance_margin = 0.0;

    bool operator==(const TenantRequest&) const = default;
};

struct OfferQuote {
    int provider_id = 0;
    std::int64_t price_micros = 0;
    double allocation_hours = 0.0;
    double release_hours = 0.0;
};

namespace events {

struct AddInstanceType {
    InstanceTypeSpec type_spec; // id assigned on application
    std::vector<OfferQuote> offers;
};

struct RemoveInstanceType {
    int instance_type_id = 0;
};

struct PriceSet {
    int instance_type_id = 0;
    int provider_id = 0;
    std::int64_t price_micros = 0;
};

struct PriceMultiply {
    std::optional<int> provider_id; // absent = all providers
    double factor = 1.0;
};

struct DemandSet {
    int vm_count = 1;
};

struct BoundsSet {
    std::optional<double> expected_ticpu;
    std::optional<double> expected_timem;
    std::optional<double> expected_tip;
    std::optional<double> tolerance_margin;
};

struct HorizonSet {
    double horizon_hours = 24.0;
};

} // namespace events

struct MarketEvent {
    int at_instant = 1;
    std::variant<events::AddInstanceType, events::RemoveInstanceType,
                 events::PriceSet, events::PriceMultiply, events::DemandSet,
                 events::BoundsSet, events::HorizonSet>
        payload;

    /// True for events that alter the offer catalog (as opposed to the
    /// tenant request).
    bool is_market_event() const {
        return std::holds_alternative<events::AddInstanceType>(payload) ||
               std::holds_alternative<events::RemoveInstanceType>(payload) ||
               std::holds_alternative<events::PriceSet>(payload) ||
               std::holds_alternative<events::PriceMultiply>(payload);
    }
};

struct Violation {
    std::string invariant;
    std::string detail;
};

inline std::vector<Violation> validate_market(const MarketState& state) {
    std::vector<Violation> out;
    const int m = state.provider_count();
    const int l = state.type_count();
    if (m < 1) out.push_back({"provider-count", "market has no providers"});
    if (l < 1) out.push_back({"type-count", "market has no instance types"});
    for (int j = 0; j < l; ++j) {
        const auto& it = state.instance_types[j];
        if (it.cpu_cores < 1)
            out.push_back({"cpu-cores",
                           "instance type " + it.name + " (j=" +
                               std::to_string(j + 1) + ") has cpu_cores < 1"});
        if (it.memory_gb < 1)
            out.push_back({"memory-gb",
                           "instance type " + it.name + " (j=" +
                               std::to_string(j + 1) + ") has memory_gb < 1"});
        if (it.id != j)
            out.push_back({"type-id",
                           "instance type ids not contiguous at j=" +
                               std::to_string(j + 1)});
    }
    if (state.offers.size() != static_cast<std::size_t>(l) * m)
        out.push_back({"offer-grid", "offer grid is not dense over (j, k)"});
    else {
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < m; ++k) {
                const auto& o = state.offer(j, k);
                const std::string at = " at (j=" + std::to_string(j + 1) +
                                       ", k=" + std::to_string(k + 1) + ")";
                if (o.instance_type_id != j || o.provider_id != k)
                    out.push_back({"offer-grid", "misplaced offer" + at});
                if (o.price_micros < 0)
                    out.push_back({"price-sign", "negative price" + at});
                if (o.allocation_hours < 0)
                    out.push_back({"allocation-sign", "negative allocation time" + at});
                if (o.release_hours < 0)
                    out.push_back({"release-sign", "negative release time" + at});
            }
        for (int k = 0; k < m; ++k) {
            bool any = false;
            for (int j = 0; j < l; ++j)
                if (state.offer(j, k).available) any = true;
            if (!any)
                out.push_back({"provider-availability",
                               "provider " +
                                   (k < m ? state.providers[k] : std::string()) +
                                   " (k=" + std::to_string(k + 1) +
                                   ") has no available offer"});
        }
    }
    return out;
}

inline void require_valid(const MarketState& state) {
    auto violations = validate_market(state);
    if (!violations.empty()) {
        std::string msg = "invalid market:";
        for (const auto& v : violations)
            msg += "\n  [" + v.invariant + "] " + v.detail;
        throw ValidationError(msg);
    }
}

inline double time_to_hours(double value, const std::string& unit) {
    if (unit == "hours") return value;
    if (unit == "seconds") return value / 3600.0;
    throw ParseError("unknown time_unit '" + unit + "' (expected \"seconds\" or \"hours\")");
}

inline MarketState load_market(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("market document must be a JSON object");
    MarketState state;
    state.instant = 1;
    const std::string unit = doc.value("time_unit", std::string("hours"));
    time_to_hours(0.0, unit); // unit sanity check

    for (const auto& p : doc.at("providers"))
        state.providers.push_back(p.get<std::string>());
    if (state.providers.empty()) throw ParseError("market has an empty provider list");

    int next_id = 0;
    for (const auto& t : doc.at("instance_types")) {
        InstanceTypeSpec spec;
        spec.id = next_id++;
        spec.name = t.at("name").get<std::string>();
        spec.cpu_cores = t.at("cpu_cores").get<int>();
        spec.memory_gb = t.at("memory_gb").get<int>();
        state.instance_types.push_back(spec);
    }
    if (state.instance_types.empty())
        throw ParseError("market has an empty instance type list");

    const int m = state.provider_count();
    const int l = state.type_count();
    state.offers.resize(static_cast<std::size_t>(l) * m);
    std::vector<bool> seen(state.offers.size(), false);
    for (const auto& o : doc.at("offers")) {
        const std::string pname = o.at("provider").get<std::string>();
        const std::string tname = o.at("instance_type").get<std::string>();
        auto k = state.provider_index(pname);
        auto j = state.type_index(tname);
        if (!k) throw ParseError("offer references unknown provider '" + pname + "'");
        if (!j) throw ParseError("offer references unknown instance type '" + tname + "'");
        ProviderOffer offer;
        offer.provider_id = *k;
        offer.instance_type_id = *j;
        offer.price_micros = price_to_micros(o.at("price_per_hour").get<double>());
        offer.allocation_hours = time_to_hours(o.at("allocation_time").get<double>(), unit);
        offer.release_hours = time_to_hours(o.at("release_time").get<double>(), unit);
        offer.available = o.value("available", true);
        const std::size_t idx = static_cast<std::size_t>(*j) * m + *k;
        if (seen[idx])
            throw ParseError("duplicate offer for (" + tname + ", " + pname + ")");
        seen[idx] = true;
        state.offer(*j, *k) = offer;
    }
    for (int j = 0; j < l; ++j)
        for (int k = 0; k < m; ++k)
            if (!seen[static_cast<std::size_t>(j) * m + k])
                throw ParseError("missing offer for (j=" + std::to_string(j + 1) +
                                 ", k=" + std::to_string(k + 1) + ")");
    require_valid(state);
    return state;
}

inline MarketState load_market(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("market JSON parse error: ") + e.what());
    }
    return load_market(doc);
}

/// Serializes with times in hours (the internal normalization).
inline nlohmann::json serialize_market(const MarketState& state) {
    nlohmann::json doc;
    doc["time_unit"] = "hours";
    doc["providers"] = state.providers;
    doc["instance_types"] = nlohmann::json::array();
    for (const auto& t : state.instance_types)
        doc["instance_types"].push_back({{"name", t.name},
                                         {"cpu_cores", t.cpu_cores},
                                         {"memory_gb", t.memory_gb}});
    doc["offers"] = nlohmann::json::array();
    for (const auto& o : state.offers)
        doc["offers"].push_back(
            {{"provider", state.providers[o.provider_id]},
             {"instance_type", state.instance_types[o.instance_type_id].name},
             {"price_per_hour", o.price_per_hour()},
             {"allocation_time", o.allocation_hours},
             {"release_time", o.release_hours},
             {"available", o.available}});
    return doc;
}

inline MarketState apply_event(const MarketState& state, const MarketEvent& event) {
    MarketState next = state;
    next.instant = event.at_instant;

    if (const auto* add = std::get_if<events::AddInstanceType>(&event.payload)) {
        InstanceTypeSpec spec = add->type_spec;
        spec.id = next.type_count();
        if (next.type_index(spec.name))
            throw ValidationError("instance type '" + spec.name + "' already exists");
        next.instance_types.push_back(spec);
        const int m = next.provider_count();
        std::vector<ProviderOffer> row(static_cast<std::size_t>(m));
        std::vector<bool> filled(static_cast<std::size_t>(m), false);
        for (const auto& q : add->offers) {
            if (q.provider_id < 0 || q.provider_id >= m)
                throw ValidationError("AddInstanceType offer for unknown provider index");
            ProviderOffer o;
            o.provider_id = q.provider_id;
            o.instance_type_id = spec.id;
            o.price_micros = q.price_micros;
            o.allocation_hours = q.allocation_hours;
            o.release_hours = q.release_hours;
            row[q.provider_id] = o;
            filled[q.provider_id] = true;
        }
        for (int k = 0; k < m; ++k)
            if (!filled[k])
                throw ValidationError("AddInstanceType missing offer for provider " +
                                      next.providers[k]);
        next.offers.insert(next.offers.end(), row.begin(), row.end());
    } else if (const auto* rem = std::get_if<events::RemoveInstanceType>(&event.payload)) {
        const int j = rem->instance_type_id;
        if (j < 0 || j >= next.type_count())
            throw ValidationError("RemoveInstanceType: unknown instance type id " +
                                  std::to_string(j + 1));
        for (int k = 0; k < next.provider_count(); ++k) {
            bool other = false;
            for (int jj = 0; jj < next.type_count(); ++jj)
                if (jj != j && next.offer(jj, k).available) other = true;
            if (!other)
                throw ValidationError("RemoveInstanceType would leave provider " +
                                      next.providers[k] + " with no offers");
        }
        // Soft removal keeps indices stable so old placements stay decodable.
        for (int k = 0; k < next.provider_count(); ++k)
            next.offer(j, k).available = false;
    } else if (const auto* ps = std::get_if<events::PriceSet>(&event.payload)) {
        if (ps->instance_type_id < 0 || ps->instance_type_id >= next.type_count() ||
            ps->provider_id < 0 || ps->provider_id >= next.provider_count())
            throw ValidationError("PriceSet on unknown (j=" +
                                  std::to_string(ps->instance_type_id + 1) + ", k=" +
                                  std::to_string(ps->provider_id + 1) + ")");
        next.offer(ps->instance_type_id, ps->provider_id).price_micros = ps->price_micros;
    } else if (const auto* pm = std::get_if<events::PriceMultiply>(&event.payload)) {
        if (pm->factor < 0) throw ValidationError("PriceMultiply with negative factor");
        if (pm->provider_id &&
            (*pm->provider_id < 0 || *pm->provider_id >= next.provider_count()))
            throw ValidationError("PriceMultiply on unknown provider index");
        for (auto& o : next.offers) {
            if (pm->provider_id && o.provider_id != *pm->provider_id) continue;
            o.price_micros = static_cast<std::int64_t>(
                std::llround(static_cast<double>(o.price_micros) * pm->factor));
        }
    }
    // Request-directed events (DemandSet, BoundsSet, HorizonSet) leave the
    // catalog untouched; only the instant advances.
    return next;
}

/// Applies a request-directed event; market events are ignored here.
inline TenantRequest apply_request_event(const TenantRequest& request,
                                         const MarketEvent& event) {
    TenantRequest next = request;
    if (const auto* d = std::get_if<events::DemandSet>(&event.payload)) {
        if (d->vm_count < 1) throw ValidationError("DemandSet with vm_count < 1");
        next.vm_count = d->vm_count;
    } else if (const auto* b = std::get_if<events::BoundsSet>(&event.payload)) {
        next.expected_ticpu = b->expected_ticpu;
        next.expected_timem = b->expected_timem;
        next.expected_tip = b->expected_tip;
        if (b->tolerance_margin) next.tolerance_margin = *b->tolerance_margin;
    } else if (const auto* h = std::get_if<events::HorizonSet>(&event.payload)) {
        if (h->horizon_hours <= 0) throw ValidationError("HorizonSet with horizon <= 0");
        next.horizon_hours = h->horizon_hours;
    }
    return next;
}

inline void validate_request(const TenantRequest& request, int provider_count) {
    if (request.vm_count < 1) throw ValidationError("vm_count must be >= 1");
    if (request.horizon_hours <= 0) throw ValidationError("horizon_hours must be > 0");
    if (request.tolerance_margin < 0 || request.tolerance_margin >= 1)
        throw ValidationError("tolerance_margin must be in [0, 1)");
    if (request.loc_min < 0) throw ValidationError("loc_min must be >= 0");
    if (request.loc_min * provider_count > 1.0)
        throw ValidationError("loc_min x provider count exceeds 1: load balancing infeasible");
}

} // namespace vmpbroker

#endif
