#include "desvar/error.hpp"
#include "desvar/kernel/calendar.hpp"
#include "desvar/kernel/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace desvar {

namespace {

enum Tag : std::uint32_t {
    kArrival,
    kStationArrive,
    kServiceEnd,
    kDelayEnd,
    kDepart,
    kCapacityChange,
    kFailure,
    kRepairEnd,
    kWarmup,
};

constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

struct Source {
    std::size_t stream = 0;
    std::uint64_t draws = 0;
};

struct ServerState {
    const ServerSpec* spec = nullptr;
    std::size_t station = 0;
    int capacity = 0;
    int busy = 0;
    bool down = false;
    bool failure_pending = false;
    TimeWeighted busy_level;
    TimeWeighted capacity_level;
    TimeWeighted busy_ratio;
    std::uint64_t uses = 0;
    std::size_t service_source = kNoSource;
    std::size_t failure_source = kNoSource;
    std::size_t repair_source = kNoSource;
};

struct StationState {
    std::deque<std::uint32_t> queue;
    std::vector<std::size_t> servers;  // preference order
    std::size_t delay_source = kNoSource;
};

struct EntityState {
    std::uint32_t type = 0;
    std::uint32_t step = 0;
    double created = 0;
    double wait = 0;
    double queue_enter = 0;
    bool admitted = false;
};

class Replication {
public:
    Replication(const NetworkModel& model, double horizon, StopRule stop_rule,
                const SeedManifest& manifest, const RunOptions& options)
        : model_(model), horizon_(horizon), stop_rule_(stop_rule), manifest_(manifest), options_(options) {
        bind_sources();
        build_state();
    }

    ReplicationOutput run();

private:
    void bind_sources();
    void build_state();

    double draw(std::size_t source) {
        Source& s = sources_[source];
        ++s.draws;
        return streams_[s.stream].next_uniform();
    }
    double sample(const Distribution& dist, std::size_t source) { return dist.inverse_cdf(draw(source)); }

    bool arrival_allowed(double t) const {
        if (model_.arrivals.stop_at && t > *model_.arrivals.stop_at) return false;
        return t <= horizon_;
    }
    void schedule_next_arrival();
    void on_arrival();
    void begin_step(std::uint32_t id);
    void enter_station(std::uint32_t id);
    void start_service(std::uint32_t id, std::size_t server);
    void on_service_end(std::uint32_t id, std::size_t server);
    void dispose(std::uint32_t id);
    void dispatch(std::size_t station);
    std::optional<std::size_t> available_server(std::size_t station) const;
    void set_busy(ServerState& s, int busy);
    void set_capacity(ServerState& s, int capacity);
    void go_down(std::size_t server);
    void on_warmup();

    double now() const { return calendar_.now(); }

    const NetworkModel& model_;
    double horizon_;
    StopRule stop_rule_;
    const SeedManifest& manifest_;
    const RunOptions& options_;

    std::vector<std::string> source_names_;
    std::vector<RandomStream> streams_;
    std::vector<Source> sources_;
    std::size_t arrival_source_ = kNoSource;
    std::size_t routing_source_ = kNoSource;

    EventCalendar calendar_;
    std::vector<ServerState> servers_;
    std::vector<StationState> stations_;
    std::vector<EntityState> entities_;
    std::vector<double> type_cumulative_;

    double arrival_level_ = 0;  // integrated rate consumed by scheduled arrivals
    std::size_t next_fixed_ = 0;
    int admitted_ = 0;

    ReplicationCounts counts_;
    Tally total_time_;
    Tally wait_time_;
    TimeWeighted wip_;
};

void Replication::bind_sources() {
    source_names_ = model_.randomness_sources();
    std::map<std::string, std::size_t, std::less<>> index;
    if (manifest_.sharing == SeedSharing::shared) {
        std::optional<StreamSeed> seed;
        for (const auto& [name, s] : manifest_.entries) {
            if (seed && *seed != s) throw ValidationError("manifest conflict: shared manifest with distinct seeds");
            seed = s;
        }
        if (seed) streams_.emplace_back(*seed, manifest_.mode);
    }
    for (std::size_t i = 0; i < source_names_.size(); ++i) {
        const auto& name = source_names_[i];
        const auto seed = manifest_.find(name);
        if (!seed) throw SimulationError("unsynchronized source '" + name + "': not in seed manifest");
        if (manifest_.sharing == SeedSharing::shared) {
            sources_.push_back(Source{0, 0});
        } else {
            sources_.push_back(Source{streams_.size(), 0});
            streams_.emplace_back(*seed, manifest_.mode);
        }
        index.emplace(name, i);
    }
    auto lookup = [&](const std::string& name) {
        auto it = index.find(name);
        return it == index.end() ? kNoSource : it->second;
    };
    arrival_source_ = lookup("arrivals");
    routing_source_ = model_.entity_types.size() > 1 ? lookup(model_.routing_source) : kNoSource;

    stations_.resize(model_.stations.size());
    for (std::size_t si = 0; si < model_.stations.size(); ++si) {
        const auto& st = model_.stations[si];
        if (st.delay) {
            stations_[si].delay_source = lookup("service." + st.id);
            continue;
        }
        for (const auto& sv : st.servers) {
            ServerState state;
            state.spec = &sv;
            state.station = si;
            state.service_source = lookup("service." + sv.id);
            if (sv.failure) {
                state.failure_source = lookup("failure." + sv.id);
                state.repair_source = lookup("repair." + sv.id);
            }
            stations_[si].servers.push_back(servers_.size());
            servers_.push_back(std::move(state));
        }
    }
}

void Replication::build_state() {
    double cum = 0;
    for (const auto& t : model_.entity_types) {
        cum += t.probability;
        type_cumulative_.push_back(cum);
    }
    for (auto& s : servers_) {
        s.capacity = s.spec->capacity.at(0.0);
        s.busy_level = TimeWeighted(0.0, 0.0);
        s.capacity_level = TimeWeighted(0.0, s.capacity);
        s.busy_ratio = TimeWeighted(0.0, 0.0);
    }
    wip_ = TimeWeighted(0.0, 0.0);
}

void Replication::schedule_next_arrival() {
    const auto& spec = model_.arrivals;
    switch (spec.kind) {
        case ArrivalSpec::Kind::renewal: {
            const double t = now() + sample(spec.interarrival, arrival_source_);
            if (arrival_allowed(t)) calendar_.schedule(t, kArrival);
            break;
        }
        case ArrivalSpec::Kind::schedule: {
            arrival_level_ -= std::log1p(-draw(arrival_source_));
            const auto t = spec.schedule.inverse_cumulative(arrival_level_);
            if (t && arrival_allowed(std::max(*t, now()))) calendar_.schedule(std::max(*t, now()), kArrival);
            break;
        }
        case ArrivalSpec::Kind::fixed:
            if (next_fixed_ < spec.times.size() && arrival_allowed(spec.times[next_fixed_])) {
                calendar_.schedule(spec.times[next_fixed_++], kArrival);
            }
            break;
    }
}

void Replication::on_arrival() {
    ++counts_.created;
    std::uint32_t type = 0;
    if (routing_source_ != kNoSource) {
        const double u = draw(routing_source_);
        while (type + 1 < type_cumulative_.size() && !(u < type_cumulative_[type])) ++type;
    }
    schedule_next_arrival();

    bool admitted = false;
    if (model_.admission) {
        if (admitted_ >= model_.admission->capacity) {
            ++counts_.balked;
            return;
        }
        ++admitted_;
        admitted = true;
    }
    const auto id = static_cast<std::uint32_t>(entities_.size());
    entities_.push_back(EntityState{type, 0, now(), 0.0, now(), admitted});
    ++counts_.in_system;
    wip_.update(static_cast<double>(counts_.in_system), now());
    begin_step(id);
}

void Replication::begin_step(std::uint32_t id) {
    const auto& e = entities_[id];
    const auto& route = model_.entity_types[e.type].route;
    const bool done = e.step >= route.size();
    if (model_.transfer_time > 0) {
        calendar_.schedule(now() + model_.transfer_time, done ? kDepart : kStationArrive, id);
    } else if (done) {
        dispose(id);
    } else {
        enter_station(id);
    }
}

void Replication::enter_station(std::uint32_t id) {
    auto& e = entities_[id];
    const auto& step = model_.entity_types[e.type].route[e.step];
    auto& st = stations_[step.station];
    if (model_.stations[step.station].delay) {
        calendar_.schedule(now() + sample(step.service, st.delay_source), kDelayEnd, id);
        return;
    }
    e.queue_enter = now();
    if (const auto server = available_server(step.station); server && st.queue.empty()) {
        start_service(id, *server);
    } else {
        st.queue.push_back(id);
    }
}

std::optional<std::size_t> Replication::available_server(std::size_t station) const {
    for (std::size_t s : stations_[station].servers) {
        const auto& sv = servers_[s];
        if (!sv.down && !sv.failure_pending && sv.busy < sv.capacity) return s;
    }
    return std::nullopt;
}

void Replication::start_service(std::uint32_t id, std::size_t server) {
    auto& e = entities_[id];
    auto& sv = servers_[server];
    e.wait += now() - e.queue_enter;
    set_busy(sv, sv.busy + 1);
    ++sv.uses;
    const auto& step = model_.entity_types[e.type].route[e.step];
    const double duration = sample(step.service, sv.service_source) * sv.spec->time_multiplier;
    calendar_.schedule(now() + duration, kServiceEnd, id, static_cast<std::uint32_t>(server));
}

void Replication::on_service_end(std::uint32_t id, std::size_t server) {
    auto& sv = servers_[server];
    set_busy(sv, sv.busy - 1);
    if (sv.failure_pending && sv.busy == 0) go_down(server);
    dispatch(sv.station);
    ++entities_[id].step;
    begin_step(id);
}

void Replication::dispose(std::uint32_t id) {
    const auto& e = entities_[id];
    total_time_.add(now() - e.created);
    wait_time_.add(e.wait);
    ++counts_.disposed;
    --counts_.in_system;
    wip_.update(static_cast<double>(counts_.in_system), now());
    if (e.admitted) --admitted_;
}

void Replication::dispatch(std::size_t station) {
    auto& st = stations_[station];
    while (!st.queue.empty()) {
        const auto server = available_server(station);
        if (!server) break;
        const auto id = st.queue.front();
        st.queue.pop_front();
        start_service(id, *server);
    }
}

void Replication::set_busy(ServerState& s, int busy) {
    s.busy = busy;
    s.busy_level.update(busy, now());
    const double ratio = s.capacity > 0 ? std::min(1.0, static_cast<double>(busy) / s.capacity)
                                        : (busy > 0 ? 1.0 : 0.0);
    s.busy_ratio.update(ratio, now());
}

void Replication::set_capacity(ServerState& s, int capacity) {
    s.capacity = capacity;
    s.capacity_level.update(capacity, now());
    set_busy(s, s.busy);
}

void Replication::go_down(std::size_t server) {
    auto& sv = servers_[server];
    sv.down = true;
    sv.failure_pending = false;
    calendar_.schedule(now() + sample(sv.spec->failure->downtime, sv.repair_source), kRepairEnd, 0,
                       static_cast<std::uint32_t>(server));
}

void Replication::on_warmup() {
    total_time_.reset();
    wait_time_.reset();
    wip_.reset(now());
    for (auto& s : servers_) {
        s.busy_level.reset(now());
        s.capacity_level.reset(now());
        s.busy_ratio.reset(now());
        s.uses = 0;
    }
}

ReplicationOutput Replication::run() {
    if (!(horizon_ > 0)) throw ValidationError("horizon must be > 0");
    if (options_.warmup < 0 || options_.warmup >= horizon_) {
        throw ValidationError("warm-up must lie in [0, horizon)");
    }

    // Initial events: arrivals, capacity changes, first failures, warm-up.
    switch (model_.arrivals.kind) {
        case ArrivalSpec::Kind::renewal:
            if (arrival_allowed(model_.arrivals.first_at)) calendar_.schedule(model_.arrivals.first_at, kArrival);
            break;
        case ArrivalSpec::Kind::schedule:
        case ArrivalSpec::Kind::fixed:
            schedule_next_arrival();
            break;
    }
    for (std::size_t i = 0; i < servers_.size(); ++i) {
        const auto& sv = servers_[i];
        if (const auto t = sv.spec->capacity.next_change_after(0.0)) {
            calendar_.schedule(*t, kCapacityChange, 0, static_cast<std::uint32_t>(i));
        }
        if (sv.spec->failure) {
            calendar_.schedule(sample(sv.spec->failure->uptime, sv.failure_source), kFailure, 0,
                               static_cast<std::uint32_t>(i));
        }
    }
    if (options_.warmup > 0) calendar_.schedule(options_.warmup, kWarmup);

    const bool drain = stop_rule_ == StopRule::horizon_then_drain;
    const double drain_limit = horizon_ * (1.0 + options_.max_drain_factor);
    std::uint64_t events = 0;
    while (!calendar_.empty()) {
        const double t = calendar_.next_time();
        if (!drain && t > horizon_) break;
        if (drain && t > horizon_ && counts_.in_system == 0) break;
        if (drain && t > drain_limit) {
            throw SimulationError("runaway model: drain did not complete by t=" + std::to_string(drain_limit));
        }
        const Event ev = calendar_.pop();
        if (++events > options_.max_events) {
            throw SimulationError("runaway model: more than " + std::to_string(options_.max_events) + " events");
        }
        if (options_.on_event) options_.on_event(ev);
        switch (ev.tag) {
            case kArrival: on_arrival(); break;
            case kStationArrive: enter_station(ev.entity); break;
            case kServiceEnd: on_service_end(ev.entity, ev.target); break;
            case kDelayEnd:
                ++entities_[ev.entity].step;
                begin_step(ev.entity);
                break;
            case kDepart: dispose(ev.entity); break;
            case kCapacityChange: {
                auto& sv = servers_[ev.target];
                set_capacity(sv, sv.spec->capacity.at(now()));
                if (const auto next = sv.spec->capacity.next_change_after(now())) {
                    calendar_.schedule(*next, kCapacityChange, 0, ev.target);
                }
                dispatch(sv.station);
                break;
            }
            case kFailure: {
                auto& sv = servers_[ev.target];
                if (sv.busy == 0) go_down(ev.target);
                else sv.failure_pending = true;
                break;
            }
            case kRepairEnd: {
                auto& sv = servers_[ev.target];
                sv.down = false;
                calendar_.schedule(now() + sample(sv.spec->failure->uptime, sv.failure_source), kFailure, 0,
                                   ev.target);
                dispatch(sv.station);
                break;
            }
            case kWarmup: on_warmup(); break;
            default: throw SimulationError("unknown event tag");
        }
    }
    if (drain && counts_.in_system > 0) {
        throw SimulationError("runaway model: " + std::to_string(counts_.in_system) +
                              " entities can never leave (drain cannot complete)");
    }

    const double end = drain ? std::max(horizon_, now()) : horizon_;

    ReplicationOutput out;
    out.manifest = manifest_;
    out.end_time = end;
    out.counts = counts_;
    out.events = events;
    for (std::size_t i = 0; i < source_names_.size(); ++i) {
        out.draws.push_back(SourceDraws{source_names_[i], sources_[i].draws});
    }

    wip_.advance(end);
    for (auto& s : servers_) {
        s.busy_level.advance(end);
        s.capacity_level.advance(end);
        s.busy_ratio.advance(end);
        ResourceUsage u;
        u.id = s.spec->id;
        u.busy_time = s.busy_level.integral();
        u.capacity_time = s.capacity_level.integral();
        u.utilization = s.busy_ratio.average().value_or(0.0);
        u.uses = s.uses;
        u.cost = resource_cost(s.spec->cost, u.busy_time, std::max(0.0, u.capacity_time - u.busy_time), u.uses);
        out.resources.push_back(std::move(u));
    }

    auto selected = [&](const MeasureSpec& m) {
        std::vector<const ResourceUsage*> picked;
        for (const auto& u : out.resources) {
            if (m.resources.empty() || std::find(m.resources.begin(), m.resources.end(), u.id) != m.resources.end()) {
                picked.push_back(&u);
            }
        }
        return picked;
    };

    for (const auto& m : model_.measures) {
        std::optional<double> value;
        switch (m.statistic) {
            case Statistic::entity_total_time: value = total_time_.mean(); break;
            case Statistic::entity_wait_time: value = wait_time_.mean(); break;
            case Statistic::wip: value = wip_.average(); break;
            case Statistic::utilization_instantaneous: {
                const auto picked = selected(m);
                if (!picked.empty()) {
                    double sum = 0;
                    for (const auto* u : picked) sum += u->utilization;
                    value = sum / static_cast<double>(picked.size());
                }
                break;
            }
            case Statistic::utilization_scheduled: {
                double busy = 0;
                double cap = 0;
                for (const auto* u : selected(m)) {
                    busy += u->busy_time;
                    cap += u->capacity_time;
                }
                if (cap > 0) value = busy / cap;
                break;
            }
            case Statistic::resource_cost: {
                double cost = 0;
                for (const auto* u : selected(m)) cost += u->cost;
                value = cost;
                break;
            }
        }
        out.measures.push_back(MeasureValue{m.id, value});
    }
    return out;
}

}  // namespace

ReplicationOutput run_replication(const NetworkModel& model, double horizon, StopRule stop_rule,
                                  const SeedManifest& manifest, const RunOptions& options) {
    Replication rep(model, horizon, stop_rule, manifest, options);
    return rep.run();
}

}  // namespace desvar
