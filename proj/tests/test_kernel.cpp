#include <desvar/error.hpp>
#include <desvar/harness.hpp>
#include <desvar/kernel/network.hpp>

#include <doctest.h>

#include <cmath>

using namespace desvar;

namespace {

MeasureSpec measure(std::string id, Statistic s, MeasureRole role = MeasureRole::primary) {
    return MeasureSpec{id, id, s, {}, role};
}

// One station, one server, fixed arrival instants.
NetworkModel single(std::vector<double> arrivals, Distribution service, CapacitySchedule capacity = CapacitySchedule::fixed(1)) {
    NetworkModel m;
    m.name = "single";
    ServerSpec sv;
    sv.id = "server";
    sv.capacity = std::move(capacity);
    m.stations.push_back(StationSpec{"queue", false, {sv}});
    m.entity_types.push_back(EntityType{"job", 1.0, {RouteStep{0, service}}});
    m.arrivals.kind = ArrivalSpec::Kind::fixed;
    m.arrivals.times = std::move(arrivals);
    m.measures = {measure("time", Statistic::entity_total_time),
                  measure("wait", Statistic::entity_wait_time, MeasureRole::control_variate),
                  measure("wip", Statistic::wip),
                  measure("util", Statistic::utilization_instantaneous),
                  measure("sched_util", Statistic::utilization_scheduled),
                  measure("cost", Statistic::resource_cost)};
    return m;
}

ReplicationOutput run(const NetworkModel& m, double horizon, StopRule rule = StopRule::at_horizon,
                      const RunOptions& options = {}, Scenario scenario = Scenario::crn, std::int64_t rep = 0) {
    m.validate();
    return run_replication(m, horizon, rule, manifest_for_scenario(m.randomness_sources(), scenario, StreamSeed{1}, rep),
                           options);
}

}  // namespace

TEST_CASE("calendar orders by time then insertion") {
    EventCalendar cal;
    cal.schedule(5, 1);
    cal.schedule(5, 2);
    cal.schedule(3, 3);
    CHECK(cal.pop().tag == 3);
    CHECK(cal.pop().tag == 1);
    auto last = cal.pop();
    CHECK(last.tag == 2);
    CHECK(cal.now() == 5);
    CHECK(cal.empty());
    CHECK_THROWS_WITH_AS(cal.schedule(4, 9), doctest::Contains("causality"), SimulationError);
    cal.schedule(5, 4);  // same instant is allowed
    CHECK(cal.size() == 1);
}

TEST_CASE("time-weighted averages") {
    TimeWeighted a(0, 1);
    a.update(0, 2);
    a.advance(4);
    CHECK(*a.average() == doctest::Approx(0.5));

    TimeWeighted b(0, 2);
    b.update(4, 1);
    b.advance(3);
    CHECK(*b.average() == doctest::Approx(10.0 / 3));

    TimeWeighted c(0, 7);
    c.advance(50);
    CHECK(*c.average() == doctest::Approx(7));
    CHECK_THROWS_AS(c.update(1, 49), SimulationError);

    TimeWeighted empty(3, 1);
    CHECK_FALSE(empty.average().has_value());
}

TEST_CASE("tally and cost arithmetic") {
    Tally t;
    CHECK_FALSE(t.mean().has_value());
    t.add(1);
    t.add(3);
    CHECK(*t.mean() == 2);
    CHECK(resource_cost(CostRates{10.0 / 60, 2.0 / 60, 1.0}, 120, 120, 3) == doctest::Approx(27));
}

TEST_CASE("capacity and rate schedules") {
    CapacitySchedule cs({{0, 2}, {10, 0}, {20, 5}});
    CHECK(cs.at(0) == 2);
    CHECK(cs.at(9.99) == 2);
    CHECK(cs.at(10) == 0);
    CHECK(cs.at(1e9) == 5);
    CHECK(*cs.next_change_after(10) == 20);
    CHECK_FALSE(cs.next_change_after(20).has_value());
    CHECK_THROWS_AS(CapacitySchedule({{1, 2}}), ValidationError);
    CHECK_THROWS_AS(CapacitySchedule({{0, 2}, {0, 3}}), ValidationError);
    CHECK_THROWS_AS(CapacitySchedule({{0, -1}}), ValidationError);

    RateSchedule rs({{0, 30, 1.0}, {30, 60, 0.0}, {60, 90, 2.0}});
    CHECK(rs.end() == 90);
    CHECK(rs.cumulative(30) == doctest::Approx(30));
    CHECK(rs.cumulative(45) == doctest::Approx(30));
    CHECK(rs.cumulative(90) == doctest::Approx(90));
    CHECK(*rs.inverse_cumulative(15) == doctest::Approx(15));
    CHECK(*rs.inverse_cumulative(40) == doctest::Approx(65));
    CHECK_FALSE(rs.inverse_cumulative(91).has_value());
    CHECK_THROWS_AS(RateSchedule({{0, 30, 1.0}, {40, 60, 1.0}}), ValidationError);
}

TEST_CASE("FIFO hand trace") {
    auto out = run(single({0, 0}, Distribution::constant(5)), 100);
    CHECK(*out.value("time") == doctest::Approx(7.5));  // 5 and 10
    CHECK(*out.value("wait") == doctest::Approx(2.5));

    auto m = single({0, 0}, Distribution::constant(5), CapacitySchedule::fixed(2));
    CHECK(*run(m, 100).value("time") == doctest::Approx(5));
}

TEST_CASE("capacity schedule gates service") {
    auto out = run(single({0}, Distribution::constant(2), CapacitySchedule({{0, 0}, {10, 1}})), 100);
    CHECK(*out.value("time") == doctest::Approx(12));
    CHECK(out.counts.disposed == 1);
}

TEST_CASE("a failing machine finishes its part, then repairs") {
    auto m = single({0, 11}, Distribution::constant(8));
    m.stations[0].servers[0].failure = FailureSpec{Distribution::constant(10), Distribution::constant(5)};
    // part 1: 0..8; failure due at 10, down 10..15; part 2 arrives 11, served 15..23
    CHECK(*run(m, 100).value("time") == doctest::Approx((8.0 + 12.0) / 2));

    auto busy = single({0, 1}, Distribution::constant(12));
    busy.stations[0].servers[0].failure = FailureSpec{Distribution::constant(10), Distribution::constant(5)};
    // failure due at 10 while busy: waits until 12, down 12..17, part 2 served 17..29
    CHECK(*run(busy, 100).value("time") == doctest::Approx((12.0 + 28.0) / 2));
}

TEST_CASE("utilization, scheduled utilization and cost") {
    auto m = single({0}, Distribution::constant(120));
    m.stations[0].servers[0].cost = CostRates{10.0 / 60, 2.0 / 60, 1.0};
    auto out = run(m, 240);
    CHECK(*out.value("util") == doctest::Approx(0.5));
    CHECK(*out.value("sched_util") == doctest::Approx(0.5));
    CHECK(*out.value("cost") == doctest::Approx(20 + 4 + 1));
    REQUIRE(out.resources.size() == 1);
    CHECK(out.resources[0].uses == 1);
    CHECK(out.resources[0].busy_time == doctest::Approx(120));
}

TEST_CASE("warm-up discards earlier statistics") {
    auto m = single({0, 200}, Distribution::constant(120));
    RunOptions o;
    o.warmup = 130;
    auto out = run(m, 240, StopRule::at_horizon, o);
    CHECK(*out.value("util") == doctest::Approx(40.0 / 110));
    CHECK_FALSE(out.value("time").has_value());  // nobody finished after the warm-up
}

TEST_CASE("empty system") {
    auto out = run(single({}, Distribution::constant(1)), 100);
    CHECK(out.counts == ReplicationCounts{});
    CHECK(*out.value("util") == 0);
    CHECK(*out.value("wip") == 0);
    CHECK_FALSE(out.value("time").has_value());
    CHECK_FALSE(out.value("wait").has_value());
    CHECK(out.draws_of("service.server") == 0);
    CHECK_THROWS_AS(out.value("nope"), ValidationError);
}

TEST_CASE("zero service times give zero time in system") {
    auto m = make_mm1_model(2, 1);
    m.entity_types[0].route[0].service = Distribution::constant(0);
    auto out = run(m, 5000);
    CHECK(*out.value("system_time") == 0);
    CHECK(*out.value("wip") == 0);
    CHECK(out.counts.disposed > 2000);
}

TEST_CASE("admission balks when full") {
    auto m = single({0, 0, 1, 6}, Distribution::constant(5));
    m.admission = AdmissionSpec{"trunks", 1};
    auto out = run(m, 100, StopRule::horizon_then_drain);
    CHECK(out.counts.created == 4);
    CHECK(out.counts.balked == 2);
    CHECK(out.counts.disposed == 2);
}

TEST_CASE("drain runs past the horizon") {
    auto m = single({0, 0}, Distribution::constant(50));
    auto out = run(m, 60, StopRule::horizon_then_drain);
    CHECK(out.counts.disposed == 2);
    CHECK(out.end_time == doctest::Approx(100));
    auto cut = run(m, 60, StopRule::at_horizon);
    CHECK(cut.counts.disposed == 1);
    CHECK(cut.counts.in_system == 1);
    CHECK(cut.end_time == 60);
}

TEST_CASE("scheduled arrivals follow the integrated rate") {
    NetworkModel m = make_mm1_model(1, 0.1);
    m.arrivals.kind = ArrivalSpec::Kind::schedule;
    m.arrivals.schedule = RateSchedule({{0, 100, 0.5}, {100, 200, 2.0}});
    double total = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const auto out = run(m, 300, StopRule::horizon_then_drain, {}, Scenario::crn, r);
        total += static_cast<double>(out.counts.created);
        // the last draw lands past the end of the schedule and creates nobody
        CHECK(out.draws_of("arrivals") == out.counts.created + 1);
    }
    // Poisson(250): standard error of the mean is sqrt(250/200)
    CHECK(std::abs(total / reps - 250) < 4 * std::sqrt(250.0 / reps));
}

TEST_CASE("determinism, conservation and event order") {
    const auto m = make_mm1_model(2, 1.5);
    std::vector<Event> seen;
    RunOptions o;
    o.on_event = [&](const Event& e) { seen.push_back(e); };
    const auto a = run(m, 5000, StopRule::at_horizon, o);
    const auto b = run(m, 5000);
    CHECK(a == b);
    CHECK(a.counts.created == a.counts.disposed + a.counts.in_system + a.counts.balked);
    REQUIRE(seen.size() == a.events);
    for (std::size_t i = 1; i < seen.size(); ++i) {
        REQUIRE(seen[i].time >= seen[i - 1].time);
        if (seen[i].time == seen[i - 1].time) REQUIRE(seen[i].sequence > seen[i - 1].sequence);
    }
    const auto base = run(m, 5000, StopRule::at_horizon, {}, Scenario::base);
    CHECK(base.manifest.sharing == SeedSharing::shared);
    CHECK(base.counts.created == base.counts.disposed + base.counts.in_system);
}

TEST_CASE("missing source and runaway guards") {
    const auto m = make_mm1_model(2, 1);
    SeedManifest partial = manifest_for_scenario(m.randomness_sources(), Scenario::crn, StreamSeed{1}, 0);
    partial.entries.pop_back();
    CHECK_THROWS_WITH_AS(run_replication(m, 100, StopRule::at_horizon, partial),
                         doctest::Contains("unsynchronized source"), SimulationError);

    RunOptions o;
    o.max_events = 100;
    CHECK_THROWS_WITH_AS(run(m, 5000, StopRule::at_horizon, o), doctest::Contains("runaway model"), SimulationError);

    // server never available: the drain cannot finish
    auto stuck = single({0}, Distribution::constant(1), CapacitySchedule::fixed(0));
    CHECK_THROWS_WITH_AS(run(stuck, 10, StopRule::horizon_then_drain), doctest::Contains("runaway model"),
                         SimulationError);
}

TEST_CASE("model validation") {
    auto m = single({0}, Distribution::constant(1));
    m.entity_types[0].probability = 0.5;
    CHECK_THROWS_AS(m.validate(), ValidationError);

    auto dup = single({0}, Distribution::constant(1));
    dup.stations.push_back(dup.stations[0]);
    CHECK_THROWS_AS(dup.validate(), ValidationError);

    auto two_cv = single({0}, Distribution::constant(1));
    two_cv.measures[0].role = MeasureRole::control_variate;
    CHECK_THROWS_AS(two_cv.validate(), ValidationError);

    auto bad_res = single({0}, Distribution::constant(1));
    bad_res.measures[3].resources = {"ghost"};
    CHECK_THROWS_AS(bad_res.validate(), ValidationError);
}

TEST_CASE("per-source draw attribution") {
    const auto m = make_mm1_model(2, 1);
    const auto out = run(m, 5000);
    CHECK(m.randomness_sources() == std::vector<std::string>{"arrivals", "service.server"});
    CHECK(out.draws_of("arrivals") == out.counts.created);
    const auto started = out.counts.disposed + (out.counts.in_system > 0 ? 1 : 0);
    CHECK(out.draws_of("service.server") <= started);
    CHECK(out.draws_of("service.server") >= out.counts.disposed);
}

TEST_CASE("M/M/1 closed forms") {
    const auto v = validate_mm1();
    CHECK(v.utilization == doctest::Approx(0.5).epsilon(0.04));
    CHECK(std::abs(v.queue_wait - 1.0) <= 0.1);
    CHECK(v.littles_law_error <= 0.05);
    CHECK(v.passed());
}
