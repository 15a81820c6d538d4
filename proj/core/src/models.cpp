#include "desvar/models.hpp"

#include "desvar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace desvar {

using nlohmann::json;

namespace {

constexpr double kStrictArrivalMean = 13.0;   // minutes between part arrivals
constexpr double kStrictNewMachineFactor = 0.8;
constexpr int kStrictTrunkLines = 26;
constexpr double kStrictCallCenterHorizon = 660.0;
constexpr double kThirtyDays = 30.0 * 24.0 * 60.0;

[[noreturn]] void config_error(const std::string& what) {
    throw ValidationError("model config: " + what);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) config_error(std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            config_error("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& obj, const char* key, std::string_view where) {
    if (!obj.contains(key)) config_error("missing '" + std::string(key) + "' in " + std::string(where));
    return get_or<T>(obj, key, T{});
}

double duration(const json& node, std::string_view where) {
    if (node.is_number()) return node.get<double>();
    if (node.is_object()) {
        check_keys(node, {"value", "unit"}, where);
        return parse_duration_minutes(require<double>(node, "value", where),
                                      get_or<std::string>(node, "unit", "minutes"));
    }
    config_error(std::string(where) + " must be a number of minutes or {value, unit}");
}

Distribution distribution(const json& node, std::string_view where) {
    if (!node.is_string()) config_error(std::string(where) + " must be a distribution literal");
    return Distribution::parse(node.get<std::string>());
}

CapacitySchedule capacity(const json& server, std::string_view where) {
    if (server.contains("capacity_schedule")) {
        if (server.contains("capacity")) config_error(std::string(where) + ": give capacity or capacity_schedule, not both");
        std::vector<CapacitySchedule::Segment> segs;
        for (const auto& s : server.at("capacity_schedule")) {
            check_keys(s, {"start", "capacity"}, "capacity_schedule entry");
            segs.push_back({duration(s.at("start"), "capacity_schedule.start"), require<int>(s, "capacity", where)});
        }
        return CapacitySchedule(std::move(segs));
    }
    return CapacitySchedule::fixed(get_or<int>(server, "capacity", 1));
}

ServerSpec server_spec(const json& node) {
    check_keys(node, {"id", "class", "capacity", "capacity_schedule", "time_multiplier", "failure", "cost"}, "server");
    ServerSpec sv;
    sv.id = require<std::string>(node, "id", "server");
    sv.resource_class = get_or<std::string>(node, "class", "");
    sv.capacity = capacity(node, "server '" + sv.id + "'");
    sv.time_multiplier = get_or<double>(node, "time_multiplier", 1.0);
    if (node.contains("failure")) {
        const auto& f = node.at("failure");
        check_keys(f, {"uptime", "downtime", "unit"}, "failure");
        const double scale = parse_duration_minutes(1.0, get_or<std::string>(f, "unit", "minutes"));
        sv.failure = FailureSpec{distribution(f.at("uptime"), "failure.uptime").scaled(scale),
                                 distribution(f.at("downtime"), "failure.downtime").scaled(scale)};
    }
    if (node.contains("cost")) {
        const auto& c = node.at("cost");
        check_keys(c, {"busy_per_hour", "idle_per_hour", "per_use"}, "cost");
        sv.cost.busy_per_minute = get_or<double>(c, "busy_per_hour", 0.0) / 60.0;
        sv.cost.idle_per_minute = get_or<double>(c, "idle_per_hour", 0.0) / 60.0;
        sv.cost.per_use = get_or<double>(c, "per_use", 0.0);
    }
    return sv;
}

ArrivalSpec arrival_spec(const json& node) {
    check_keys(node, {"interarrival", "first_at", "schedule", "times", "stop_at"}, "arrivals");
    ArrivalSpec a;
    const int forms = int(node.contains("interarrival")) + int(node.contains("schedule")) + int(node.contains("times"));
    if (forms != 1) config_error("arrivals need exactly one of interarrival, schedule, times");
    if (node.contains("interarrival")) {
        a.kind = ArrivalSpec::Kind::renewal;
        a.interarrival = distribution(node.at("interarrival"), "arrivals.interarrival");
        a.first_at = node.contains("first_at") ? duration(node.at("first_at"), "arrivals.first_at") : 0.0;
    } else if (node.contains("schedule")) {
        a.kind = ArrivalSpec::Kind::schedule;
        std::vector<RateSchedule::Segment> segs;
        for (const auto& s : node.at("schedule")) {
            check_keys(s, {"start", "end", "rate_per_hour"}, "arrival schedule entry");
            segs.push_back({duration(s.at("start"), "schedule.start"), duration(s.at("end"), "schedule.end"),
                            require<double>(s, "rate_per_hour", "arrival schedule entry") / 60.0});
        }
        a.schedule = RateSchedule(std::move(segs));
    } else {
        a.kind = ArrivalSpec::Kind::fixed;
        for (const auto& t : node.at("times")) a.times.push_back(duration(t, "arrivals.times"));
    }
    if (node.contains("stop_at")) a.stop_at = duration(node.at("stop_at"), "arrivals.stop_at");
    return a;
}

Statistic parse_statistic(const std::string& s) {
    if (s == "entity_total_time") return Statistic::entity_total_time;
    if (s == "entity_wait_time") return Statistic::entity_wait_time;
    if (s == "wip") return Statistic::wip;
    if (s == "utilization_instantaneous") return Statistic::utilization_instantaneous;
    if (s == "utilization_scheduled") return Statistic::utilization_scheduled;
    if (s == "resource_cost") return Statistic::resource_cost;
    config_error("unknown statistic '" + s + "'");
}

ModelKind parse_kind(const std::string& s) {
    if (s == "manufacturing") return ModelKind::manufacturing;
    if (s == "call_center") return ModelKind::call_center;
    if (s == "crossdock") return ModelKind::crossdock;
    if (s == "single_queue") return ModelKind::single_queue;
    config_error("unknown model_kind '" + s + "'");
}

void require_kind(const ModelConfig& config, ModelKind kind) {
    if (config.kind != kind) {
        throw ValidationError("config is a " + std::string(to_string(config.kind)) + " model, expected " +
                              std::string(to_string(kind)));
    }
}

Model finish(const ModelConfig& config) {
    config.network.validate();
    return Model{config.kind, config.network, config.horizon, config.stop_rule};
}

[[noreturn]] void strict_error(const std::string& what) {
    throw ValidationError("strict_paper: " + what);
}

std::vector<const ServerSpec*> servers_of_class(const NetworkModel& net, std::string_view klass) {
    std::vector<const ServerSpec*> out;
    for (const auto& st : net.stations) {
        for (const auto& sv : st.servers) {
            if (sv.resource_class == klass) out.push_back(&sv);
        }
    }
    return out;
}

void check_measure_shape(const NetworkModel& net) {
    int primary = 0;
    for (const auto& m : net.measures) primary += m.role == MeasureRole::primary ? 1 : 0;
    if (primary != 3) strict_error("expected 3 analyzed measures plus 1 control variate");
    if (net.control_variate().statistic != Statistic::entity_wait_time) {
        strict_error("control variate must be the entity wait time");
    }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::manufacturing: return "manufacturing";
        case ModelKind::call_center: return "call_center";
        case ModelKind::crossdock: return "crossdock";
        case ModelKind::single_queue: return "single_queue";
    }
    return "?";
}

double parse_duration_minutes(double value, std::string_view unit) {
    if (!std::isfinite(value)) throw ValidationError("duration must be finite");
    if (unit == "minutes" || unit == "min") return value;
    if (unit == "hours" || unit == "h") return value * 60.0;
    if (unit == "days" || unit == "d") return value * 24.0 * 60.0;
    throw ValidationError("unknown time unit '" + std::string(unit) + "'");
}

ModelConfig parse_model_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        config_error(std::string("parse error: ") + e.what());
    }
    check_keys(root, {"model_kind", "name", "note", "strict_paper", "horizon", "stop_rule", "transfer_time",
                      "routing_source", "arrivals", "admission", "stations", "entity_types", "measures"},
               "model config");

    ModelConfig cfg;
    cfg.kind = parse_kind(require<std::string>(root, "model_kind", "model config"));
    cfg.strict_paper = get_or<bool>(root, "strict_paper", false);
    if (!root.contains("horizon")) config_error("missing 'horizon'");
    cfg.horizon = duration(root.at("horizon"), "horizon");
    const auto stop = get_or<std::string>(root, "stop_rule", "at_horizon");
    if (stop == "at_horizon") cfg.stop_rule = StopRule::at_horizon;
    else if (stop == "horizon_then_drain") cfg.stop_rule = StopRule::horizon_then_drain;
    else config_error("unknown stop_rule '" + stop + "'");

    auto& net = cfg.network;
    net.name = get_or<std::string>(root, "name", std::string(to_string(cfg.kind)));
    net.transfer_time = root.contains("transfer_time") ? duration(root.at("transfer_time"), "transfer_time") : 0.0;
    net.routing_source = get_or<std::string>(root, "routing_source", "routing.type");
    if (!root.contains("arrivals")) config_error("missing 'arrivals'");
    net.arrivals = arrival_spec(root.at("arrivals"));
    if (root.contains("admission")) {
        const auto& a = root.at("admission");
        check_keys(a, {"id", "capacity"}, "admission");
        net.admission = AdmissionSpec{require<std::string>(a, "id", "admission"), require<int>(a, "capacity", "admission")};
    }

    for (const auto& st : root.value("stations", json::array())) {
        check_keys(st, {"id", "delay", "servers"}, "station");
        StationSpec spec;
        spec.id = require<std::string>(st, "id", "station");
        spec.delay = get_or<bool>(st, "delay", false);
        for (const auto& sv : st.value("servers", json::array())) spec.servers.push_back(server_spec(sv));
        net.stations.push_back(std::move(spec));
    }

    for (const auto& t : root.value("entity_types", json::array())) {
        check_keys(t, {"name", "probability", "route"}, "entity type");
        EntityType type;
        type.name = require<std::string>(t, "name", "entity type");
        type.probability = get_or<double>(t, "probability", 1.0);
        for (const auto& step : t.value("route", json::array())) {
            check_keys(step, {"station", "service"}, "route step");
            const auto station = require<std::string>(step, "station", "route step");
            const auto idx = net.station_index(station);
            if (!idx) config_error("route of '" + type.name + "' references unknown station '" + station + "'");
            type.route.push_back(RouteStep{*idx, step.contains("service") ? distribution(step.at("service"), "service")
                                                                          : Distribution::constant(0)});
        }
        net.entity_types.push_back(std::move(type));
    }

    for (const auto& m : root.value("measures", json::array())) {
        check_keys(m, {"id", "label", "statistic", "resources", "role"}, "measure");
        MeasureSpec spec;
        spec.id = require<std::string>(m, "id", "measure");
        spec.label = get_or<std::string>(m, "label", spec.id);
        spec.statistic = parse_statistic(require<std::string>(m, "statistic", "measure"));
        spec.resources = get_or<std::vector<std::string>>(m, "resources", {});
        const auto role = get_or<std::string>(m, "role", "primary");
        if (role == "primary") spec.role = MeasureRole::primary;
        else if (role == "control_variate") spec.role = MeasureRole::control_variate;
        else config_error("unknown measure role '" + role + "'");
        net.measures.push_back(std::move(spec));
    }
    return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_model_config(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

Model build_manufacturing(const ModelConfig& config) {
    require_kind(config, ModelKind::manufacturing);
    const auto& net = config.network;
    if (net.arrivals.kind != ArrivalSpec::Kind::renewal) {
        throw ValidationError("manufacturing: arrivals must be a renewal process");
    }
    if (config.strict_paper) {
        std::vector<const StationSpec*> cells;
        for (const auto& st : net.stations) {
            if (!st.delay) cells.push_back(&st);
        }
        if (cells.size() != 4) strict_error("manufacturing needs exactly 4 cells");
        const std::size_t expected[] = {1, 1, 2, 1};
        for (std::size_t i = 0; i < 4; ++i) {
            if (cells[i]->servers.size() != expected[i]) {
                strict_error("cells 1, 2 and 4 have one machine, cell 3 has two");
            }
            for (const auto& sv : cells[i]->servers) {
                if (!sv.failure || sv.failure->uptime.kind() != Distribution::Kind::expo ||
                    sv.failure->downtime.kind() != Distribution::Kind::expo) {
                    strict_error("every machine fails with exponential up and repair times");
                }
            }
        }
        const auto& cell3 = cells[2]->servers;
        if (cell3[0].time_multiplier != kStrictNewMachineFactor || cell3[1].time_multiplier != 1.0) {
            strict_error("cell 3 lists the new machine (factor 0.8) before the old one (factor 1.0)");
        }
        if (net.entity_types.size() != 3) strict_error("manufacturing needs exactly 3 part types");
        if (net.arrivals.interarrival != Distribution::expo(kStrictArrivalMean) || net.arrivals.first_at != 0.0) {
            strict_error("arrivals are EXPO(13) with the first part at t=0");
        }
        if (config.horizon != kThirtyDays || config.stop_rule != StopRule::at_horizon) {
            strict_error("manufacturing runs 30 days with no terminating condition");
        }
        for (const auto& t : net.entity_types) {
            for (const auto& step : t.route) {
                if (!net.stations[step.station].delay && step.service.kind() != Distribution::Kind::tria) {
                    strict_error("process times are triangular");
                }
            }
        }
        check_measure_shape(net);
    }
    return finish(config);
}

Model build_call_center(const ModelConfig& config) {
    require_kind(config, ModelKind::call_center);
    const auto& net = config.network;
    if (net.arrivals.kind != ArrivalSpec::Kind::schedule) {
        throw ValidationError("call center: arrivals must come from an arrival schedule");
    }
    if (!(net.arrivals.schedule.end() <= config.horizon)) {
        throw ValidationError("call center: arrival schedule must stop creating calls before the horizon");
    }
    if (!net.admission) throw ValidationError("call center: trunk-line admission resource required");
    if (config.strict_paper) {
        if (net.admission->capacity != kStrictTrunkLines) strict_error("26 trunk lines");
        if (config.horizon != kStrictCallCenterHorizon || config.stop_rule != StopRule::horizon_then_drain) {
            strict_error("660-minute day followed by drain");
        }
        if (net.entity_types.size() != 3) strict_error("three call classes");
        check_measure_shape(net);
    }
    return finish(config);
}

Model build_crossdock(const ModelConfig& config) {
    require_kind(config, ModelKind::crossdock);
    const auto& net = config.network;
    if (net.arrivals.kind != ArrivalSpec::Kind::renewal) {
        throw ValidationError("crossdock: order arrivals must be a renewal process");
    }
    if (config.strict_paper) {
        if (net.arrivals.interarrival.kind() != Distribution::Kind::expo) strict_error("exponential order arrivals");
        const auto automated = servers_of_class(net, "automated");
        const auto manual = servers_of_class(net, "manual");
        if (automated.size() != 2 || manual.size() != 2) {
            strict_error("two automated dispensers and two manual picker groups");
        }
        if (manual[0]->time_multiplier == manual[1]->time_multiplier) {
            strict_error("manual picker groups differ in proficiency");
        }
        for (const auto& t : net.entity_types) {
            for (const auto& step : t.route) {
                if (!net.stations[step.station].delay && step.service.kind() != Distribution::Kind::tria) {
                    strict_error("picking times are triangular");
                }
            }
        }
        if (config.horizon != kThirtyDays || config.stop_rule != StopRule::at_horizon) {
            strict_error("crossdock runs 30 days with no terminating condition");
        }
        check_measure_shape(net);
    }
    return finish(config);
}

Model build_single_queue(const ModelConfig& config) {
    require_kind(config, ModelKind::single_queue);
    if (config.network.stations.size() != 1) throw ValidationError("single_queue: exactly one station");
    return finish(config);
}

Model build_model(const ModelConfig& config) {
    switch (config.kind) {
        case ModelKind::manufacturing: return build_manufacturing(config);
        case ModelKind::call_center: return build_call_center(config);
        case ModelKind::crossdock: return build_crossdock(config);
        case ModelKind::single_queue: return build_single_queue(config);
    }
    throw ValidationError("unknown model kind");
}

std::vector<std::string> randomness_sources(const Model& model) {
    return model.network.randomness_sources();
}

}  // namespace desvar
