#pragma once

#include "desvar/distributions.hpp"
#include "desvar/kernel/calendar.hpp"
#include "desvar/kernel/schedule.hpp"
#include "desvar/kernel/statistics.hpp"
#include "desvar/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace desvar {

// Terminating queueing-network description interpreted by run_replication.
// Times are minutes.

struct FailureSpec {
    Distribution uptime;    // time to failure, measured from the end of the last repair
    Distribution downtime;  // repair time

    friend bool operator==(const FailureSpec&, const FailureSpec&) = default;
};

// One capacitated resource. A station lists its servers in preference order:
// an arriving entity takes the first server with a free unit.
struct ServerSpec {
    std::string id;
    std::string resource_class;  // free-form grouping ("machine", "automated", "manual", "staff")
    CapacitySchedule capacity;
    double time_multiplier = 1.0;  // applied to every sampled service time
    std::optional<FailureSpec> failure;
    CostRates cost;

    friend bool operator==(const ServerSpec&, const ServerSpec&) = default;
};

struct StationSpec {
    std::string id;
    bool delay = false;  // pure delay: unlimited capacity, no queue, no servers
    std::vector<ServerSpec> servers;

    friend bool operator==(const StationSpec&, const StationSpec&) = default;
};

struct RouteStep {
    std::size_t station = 0;
    Distribution service = Distribution::constant(0);

    friend bool operator==(const RouteStep&, const RouteStep&) = default;
};

struct EntityType {
    std::string name;
    double probability = 1.0;
    std::vector<RouteStep> route;

    friend bool operator==(const EntityType&, const EntityType&) = default;
};

struct ArrivalSpec {
    enum class Kind {
        renewal,   // first arrival at first_at, then i.i.d. interarrival gaps
        schedule,  // non-homogeneous Poisson over a rate schedule, one draw per arrival
        fixed,     // explicit arrival instants, no draws
    };
    Kind kind = Kind::renewal;
    Distribution interarrival = Distribution::expo(1.0);
    double first_at = 0;
    RateSchedule schedule;
    std::vector<double> times;
    std::optional<double> stop_at;  // no arrivals created after this time

    friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

// Admission resource held for an entity's whole stay (trunk lines).
// Arrivals finding it full balk.
struct AdmissionSpec {
    std::string id;
    int capacity = 0;

    friend bool operator==(const AdmissionSpec&, const AdmissionSpec&) = default;
};

enum class Statistic {
    entity_total_time,          // tally mean of time in system over disposed entities
    entity_wait_time,           // tally mean of total queue wait over disposed entities
    wip,                        // time-average number in system
    utilization_instantaneous,  // mean over resources of time-average busy/capacity
    utilization_scheduled,      // total busy time / total scheduled capacity time
    resource_cost,              // sum over resources of busy, idle and per-use cost
};

enum class MeasureRole { primary, control_variate };

struct MeasureSpec {
    std::string id;
    std::string label;
    Statistic statistic = Statistic::entity_total_time;
    std::vector<std::string> resources;  // resource ids; empty means all servers
    MeasureRole role = MeasureRole::primary;

    friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

enum class StopRule { at_horizon, horizon_then_drain };

struct NetworkModel {
    std::string name;
    std::vector<StationSpec> stations;
    std::vector<EntityType> entity_types;
    ArrivalSpec arrivals;
    std::optional<AdmissionSpec> admission;
    double transfer_time = 0;  // fixed delay before each station and before exit
    std::string routing_source = "routing.type";
    std::vector<MeasureSpec> measures;

    // Throws ValidationError on dangling references, bad probabilities,
    // duplicate ids, or a measure registry without exactly one control variate.
    void validate() const;

    // Stable, exhaustive list of named randomness sources, in draw-owner order:
    // arrivals, routing, then per station service / failure / repair.
    std::vector<std::string> randomness_sources() const;

    const MeasureSpec* find_measure(std::string_view id) const;
    const MeasureSpec& control_variate() const;
    std::optional<std::size_t> station_index(std::string_view id) const;
};

struct MeasureValue {
    std::string id;
    std::optional<double> value;  // absent = undefined (no observations)

    friend bool operator==(const MeasureValue&, const MeasureValue&) = default;
};

struct SourceDraws {
    std::string source;
    std::uint64_t draws = 0;

    friend bool operator==(const SourceDraws&, const SourceDraws&) = default;
};

struct ReplicationCounts {
    std::uint64_t created = 0;
    std::uint64_t disposed = 0;
    std::uint64_t balked = 0;
    std::uint64_t in_system = 0;

    friend bool operator==(const ReplicationCounts&, const ReplicationCounts&) = default;
};

struct ResourceUsage {
    std::string id;
    double busy_time = 0;
    double capacity_time = 0;
    double utilization = 0;  // time-average busy/capacity
    std::uint64_t uses = 0;
    double cost = 0;

    friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

struct ReplicationOutput {
    std::vector<MeasureValue> measures;  // registry order
    SeedManifest manifest;
    double end_time = 0;  // clock when statistics were closed
    ReplicationCounts counts;
    std::vector<SourceDraws> draws;  // randomness_sources() order
    std::vector<ResourceUsage> resources;
    std::uint64_t events = 0;

    std::optional<double> value(std::string_view measure_id) const;
    std::uint64_t draws_of(std::string_view source) const;

    friend bool operator==(const ReplicationOutput&, const ReplicationOutput&) = default;
};

struct RunOptions {
    double warmup = 0;
    std::uint64_t max_events = 200'000'000;
    // Drain phase may last at most this multiple of the horizon.
    double max_drain_factor = 10.0;
    // Called for every processed event, in processing order.
    std::function<void(const Event&)> on_event;
};

// Runs one replication. Every source in model.randomness_sources() must appear
// in the manifest ("unsynchronized source" otherwise).
ReplicationOutput run_replication(const NetworkModel& model, double horizon, StopRule stop_rule,
                                  const SeedManifest& manifest, const RunOptions& options = {});

}  // namespace desvar
