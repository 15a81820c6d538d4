#include "desvar/kernel/network.hpp"

#include "desvar/error.hpp"

#include <cmath>
#include <set>

namespace desvar {

void NetworkModel::validate() const {
    auto fail = [this](const std::string& what) {
        throw ValidationError("model '" + name + "': " + what);
    };

    if (stations.empty()) fail("no stations");
    if (entity_types.empty()) fail("no entity types");
    if (!(transfer_time >= 0) || !std::isfinite(transfer_time)) fail("transfer_time must be >= 0");

    std::set<std::string> station_ids;
    std::set<std::string> resource_ids;
    for (const auto& st : stations) {
        if (st.id.empty()) fail("station with empty id");
        if (!station_ids.insert(st.id).second) fail("duplicate station '" + st.id + "'");
        if (st.delay && !st.servers.empty()) fail("delay station '" + st.id + "' cannot own servers");
        if (!st.delay && st.servers.empty()) fail("station '" + st.id + "' has no servers");
        for (const auto& sv : st.servers) {
            if (sv.id.empty()) fail("server with empty id at station '" + st.id + "'");
            if (!resource_ids.insert(sv.id).second) fail("duplicate resource '" + sv.id + "'");
            if (!(sv.time_multiplier > 0) || !std::isfinite(sv.time_multiplier)) {
                fail("server '" + sv.id + "': time multiplier must be > 0");
            }
            if (sv.cost.busy_per_minute < 0 || sv.cost.idle_per_minute < 0 || sv.cost.per_use < 0) {
                fail("server '" + sv.id + "': negative cost rate");
            }
        }
    }
    if (admission) {
        if (admission->capacity < 0) fail("admission capacity must be >= 0");
        if (!resource_ids.insert(admission->id).second) fail("duplicate resource '" + admission->id + "'");
    }

    double total_p = 0;
    std::set<std::string> type_names;
    for (const auto& t : entity_types) {
        if (!type_names.insert(t.name).second) fail("duplicate entity type '" + t.name + "'");
        if (!(t.probability >= 0) || !std::isfinite(t.probability)) fail("bad probability for '" + t.name + "'");
        total_p += t.probability;
        if (t.route.empty()) fail("entity type '" + t.name + "' has an empty route");
        for (const auto& step : t.route) {
            if (step.station >= stations.size()) fail("route of '" + t.name + "' references a missing station");
        }
    }
    if (std::abs(total_p - 1.0) > 1e-9) fail("entity type probabilities must sum to 1");

    switch (arrivals.kind) {
        case ArrivalSpec::Kind::renewal:
            if (!(arrivals.first_at >= 0)) fail("first arrival time must be >= 0");
            break;
        case ArrivalSpec::Kind::schedule:
            if (arrivals.schedule.segments().empty()) fail("empty arrival schedule");
            break;
        case ArrivalSpec::Kind::fixed:
            for (std::size_t i = 0; i < arrivals.times.size(); ++i) {
                if (!(arrivals.times[i] >= 0) || (i > 0 && arrivals.times[i] < arrivals.times[i - 1])) {
                    fail("fixed arrival times must be non-negative and non-decreasing");
                }
            }
            break;
    }

    std::set<std::string> measure_ids;
    int controls = 0;
    for (const auto& m : measures) {
        if (m.id.empty()) fail("measure with empty id");
        if (!measure_ids.insert(m.id).second) fail("duplicate measure '" + m.id + "'");
        if (m.role == MeasureRole::control_variate) ++controls;
        for (const auto& r : m.resources) {
            bool found = false;
            for (const auto& st : stations) {
                for (const auto& sv : st.servers) found = found || sv.id == r;
            }
            if (!found) fail("measure '" + m.id + "' references unknown resource '" + r + "'");
        }
    }
    if (controls != 1) fail("exactly one measure must have role control_variate");
}

std::vector<std::string> NetworkModel::randomness_sources() const {
    std::vector<std::string> out;
    if (arrivals.kind != ArrivalSpec::Kind::fixed) out.emplace_back("arrivals");
    if (entity_types.size() > 1) out.push_back(routing_source);
    for (const auto& st : stations) {
        if (st.delay) {
            out.push_back("service." + st.id);
            continue;
        }
        for (const auto& sv : st.servers) {
            out.push_back("service." + sv.id);
            if (sv.failure) {
                out.push_back("failure." + sv.id);
                out.push_back("repair." + sv.id);
            }
        }
    }
    return out;
}

const MeasureSpec* NetworkModel::find_measure(std::string_view id) const {
    for (const auto& m : measures) {
        if (m.id == id) return &m;
    }
    return nullptr;
}

const MeasureSpec& NetworkModel::control_variate() const {
    for (const auto& m : measures) {
        if (m.role == MeasureRole::control_variate) return m;
    }
    throw ValidationError("model '" + name + "' has no control variate measure");
}

std::optional<std::size_t> NetworkModel::station_index(std::string_view id) const {
    for (std::size_t i = 0; i < stations.size(); ++i) {
        if (stations[i].id == id) return i;
    }
    return std::nullopt;
}

std::optional<double> ReplicationOutput::value(std::string_view measure_id) const {
    for (const auto& m : measures) {
        if (m.id == measure_id) return m.value;
    }
    throw ValidationError("unknown measure '" + std::string(measure_id) + "'");
}

std::uint64_t ReplicationOutput::draws_of(std::string_view source) const {
    for (const auto& d : draws) {
        if (d.source == source) return d.draws;
    }
    return 0;
}

}  // namespace desvar
