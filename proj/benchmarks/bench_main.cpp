#include <desvar/distributions.hpp>
#include <desvar/harness.hpp>
#include <desvar/kernel/calendar.hpp>
#include <desvar/models.hpp>
#include <desvar/stats.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace desvar;

namespace {

void BM_Uniform(benchmark::State& state) {
    RandomStream s(StreamSeed{1});
    for (auto _ : state) benchmark::DoNotOptimize(s.next_uniform());
}
BENCHMARK(BM_Uniform);

void BM_TriaSample(benchmark::State& state) {
    RandomStream s(StreamSeed{1});
    const auto d = Distribution::tria(1, 3, 6);
    for (auto _ : state) benchmark::DoNotOptimize(d.sample(s));
}
BENCHMARK(BM_TriaSample);

void BM_CalendarHold(benchmark::State& state) {
    // classic hold model: pop one, schedule one, steady queue length
    EventCalendar cal;
    RandomStream s(StreamSeed{2});
    for (int i = 0; i < state.range(0); ++i) cal.schedule(s.next_uniform() * 100, 0);
    for (auto _ : state) {
        const auto e = cal.pop();
        cal.schedule(e.time + s.next_uniform() * 100, 0);
    }
}
BENCHMARK(BM_CalendarHold)->Arg(16)->Arg(1024)->Arg(65536);

void BM_Replication(benchmark::State& state, const char* config) {
    const auto model = build_model(load_model_config(std::string(DESVAR_CONFIG_DIR) + "/" + config));
    const auto manifest = manifest_for_scenario(model.network.randomness_sources(), Scenario::crn, StreamSeed{2010}, 0);
    std::uint64_t events = 0;
    for (auto _ : state) {
        auto out = run_replication(model.network, model.horizon, model.stop_rule, manifest);
        events += out.events;
        benchmark::DoNotOptimize(out);
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Replication, manufacturing, "manufacturing.cfg")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replication, callcenter, "callcenter.cfg")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replication, crossdock, "crossdock.cfg")->Unit(benchmark::kMillisecond);

void BM_Bartlett(benchmark::State& state) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z;
    std::vector<Group> groups(4);
    for (auto& g : groups)
        for (int i = 0; i < state.range(0); ++i) g.values.push_back(z(gen));
    for (auto _ : state) benchmark::DoNotOptimize(bartlett_test(groups));
}
BENCHMARK(BM_Bartlett)->Arg(10)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
