#include "desvar/harness.hpp"

#include "desvar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace desvar {

using nlohmann::json;

namespace {

[[noreturn]] void spec_error(const std::string& what) {
    throw ValidationError("experiment spec: " + what);
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. The exception of the
// lowest failing index is rethrown after all workers join.
template <typename Task>
void parallel_for(std::size_t n, int jobs, Task&& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    if (threads == 1 || n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<double> series_of(const std::vector<ReplicationOutput>& outputs, const std::string& measure) {
    std::vector<double> out;
    out.reserve(outputs.size());
    for (const auto& o : outputs) out.push_back(o.value(measure).value_or(std::nan("")));
    return out;
}

void fill_moments(GroupSummary& g, double alpha) {
    const auto m = sample_moments(g.series);
    g.n = m.n;
    g.mean = m.mean;
    g.variance = m.variance;
    g.stdev = m.stdev;
    g.ci_halfwidth = ci_halfwidth(g.series, alpha);
}

Model load_model(const std::filesystem::path& path) {
    return build_model(load_model_config(path));
}

}  // namespace

void ExperimentSpec::validate() const {
    if (replications < 2) spec_error("replications must be >= 2");
    if (!(alpha > 0 && alpha < 1)) spec_error("alpha must lie in (0,1)");
    if (!(horizon > 0)) spec_error("horizon must be > 0");
    if (warmup < 0 || warmup >= horizon) spec_error("warm-up must lie in [0, horizon)");
    if (groups.empty()) spec_error("no groups");
    std::set<Scenario> seen;
    for (auto g : groups) {
        if (!seen.insert(g).second) spec_error("duplicate group '" + std::string(to_string(g)) + "'");
    }
    if (seen.count(Scenario::av) && replications % 2 != 0) {
        spec_error("AV pairs replications, so replications must be even");
    }
    if (measures.empty()) spec_error("no measures to analyze");
    if (control_variate.empty()) spec_error("control_variate is required");
    if (!model.network.find_measure(control_variate)) {
        spec_error("control variate '" + control_variate + "' is not a measure of the model");
    }
    std::set<std::string> names;
    for (const auto& m : measures) {
        if (!model.network.find_measure(m)) spec_error("unknown measure '" + m + "'");
        if (m == control_variate) spec_error("control variate '" + m + "' cannot also be an analyzed measure");
        if (!names.insert(m).second) spec_error("duplicate measure '" + m + "'");
    }
    if (alternative) {
        for (const auto& m : measures) {
            if (!alternative->network.find_measure(m)) spec_error("alternative model lacks measure '" + m + "'");
        }
    }
    if (strict_paper) {
        if (replications != 10) spec_error("strict_paper: 10 replications");
        if (warmup != 0) spec_error("strict_paper: warm-up 0");
        if (alpha != 0.05) spec_error("strict_paper: alpha 0.05");
        if (groups.size() != 4) spec_error("strict_paper: groups Base, CRN, AV, CV");
        if (measures.size() != 3) spec_error("strict_paper: 3 analyzed measures");
        if (horizon != model.horizon || stop_rule != model.stop_rule) {
            spec_error("strict_paper: horizon and stop rule come from the model");
        }
    }
}

ExperimentSpec parse_experiment_spec(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        spec_error(std::string("parse error: ") + e.what());
    }
    if (!root.is_object()) spec_error("top level must be an object");
    static const std::set<std::string> allowed = {"name",     "note",    "model",           "alternative_model",
                                                  "replications", "warmup", "horizon",     "stop_rule",
                                                  "alpha",    "groups",  "measures",        "control_variate",
                                                  "base_seed", "strict_paper"};
    for (const auto& [key, _] : root.items()) {
        if (!allowed.count(key)) spec_error("unknown key '" + key + "'");
    }

    ExperimentSpec spec;
    try {
        spec.name = root.value("name", std::string("experiment"));
        if (!root.contains("model")) spec_error("missing 'model'");
        spec.model_path = base_dir / root.at("model").get<std::string>();
        spec.model = load_model(spec.model_path);
        if (root.contains("alternative_model")) {
            spec.alternative_path = base_dir / root.at("alternative_model").get<std::string>();
            spec.alternative = load_model(*spec.alternative_path);
        }
        spec.replications = root.value("replications", 10);
        spec.horizon = spec.model.horizon;
        if (root.contains("horizon")) {
            const auto& h = root.at("horizon");
            spec.horizon = h.is_number() ? h.get<double>()
                                         : parse_duration_minutes(h.at("value").get<double>(),
                                                                  h.value("unit", std::string("minutes")));
        }
        if (root.contains("warmup")) {
            const auto& w = root.at("warmup");
            spec.warmup = w.is_number() ? w.get<double>()
                                        : parse_duration_minutes(w.at("value").get<double>(),
                                                                 w.value("unit", std::string("minutes")));
        }
        spec.stop_rule = spec.model.stop_rule;
        if (root.contains("stop_rule")) {
            const auto s = root.at("stop_rule").get<std::string>();
            if (s == "at_horizon") spec.stop_rule = StopRule::at_horizon;
            else if (s == "horizon_then_drain") spec.stop_rule = StopRule::horizon_then_drain;
            else spec_error("unknown stop_rule '" + s + "'");
        }
        spec.alpha = root.value("alpha", 0.05);
        for (const auto& g : root.value("groups", json::array({"Base", "CRN", "AV", "CV"}))) {
            spec.groups.push_back(parse_scenario(g.get<std::string>()));
        }
        spec.measures = root.value("measures", std::vector<std::string>{});
        spec.control_variate = root.value("control_variate", std::string{});
        if (spec.control_variate.empty()) spec.control_variate = spec.model.network.control_variate().id;
        spec.base_seed = StreamSeed{root.value("base_seed", std::uint64_t{2010})};
        spec.strict_paper = root.value("strict_paper", false);
    } catch (const json::exception& e) {
        spec_error(std::string("bad value: ") + e.what());
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open experiment spec '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_spec(buf.str(), path.parent_path());
}

Ranking decide_and_rank(const std::map<Scenario, double>& variances, double p_value, double alpha) {
    Ranking r;
    r.decision = p_value < alpha ? Decision::reject : Decision::fail_to_reject;
    if (r.decision == Decision::fail_to_reject) {
        r.note = "no reduction in variance";
        return r;
    }
    std::optional<Scenario> best;
    double best_var = 0;
    for (auto g : {Scenario::crn, Scenario::av, Scenario::cv}) {
        const auto it = variances.find(g);
        if (it == variances.end()) continue;
        if (!best || it->second < best_var) {
            best = g;
            best_var = it->second;
        }
    }
    if (!best) {
        r.note = "no variance reduction group was run";
        return r;
    }
    const auto base = variances.find(Scenario::base);
    if (base != variances.end() && !(best_var < base->second)) {
        r.note = "variance increased";
        return r;
    }
    r.winner = best;
    r.note = "largest reduction in variance: " + std::string(to_string(*best));
    return r;
}

std::string manifest_file_name(Scenario group, int replication) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "manifests/%s_rep%02d.seeds", std::string(to_string(group)).c_str(), replication);
    return buf;
}

MeasureReport analyze_measure(std::string id, std::string label, std::vector<GroupSummary> groups, double alpha,
                              std::vector<std::string>* warnings) {
    MeasureReport mr;
    mr.id = std::move(id);
    mr.label = std::move(label);
    std::vector<Group> bartlett_groups;
    std::map<Scenario, double> variances;
    for (auto& g : groups) {
        fill_moments(g, alpha);
        bartlett_groups.push_back(Group{std::string(to_string(g.group)), g.series});
        variances[g.group] = g.variance;
    }
    BartlettResult bart;
    try {
        bart = bartlett_test(bartlett_groups);
    } catch (const DegenerateStatistics& e) {
        throw DegenerateStatistics("measure '" + mr.id + "': " + e.what());
    }
    if (warnings) {
        for (const auto& w : bart.warnings) warnings->push_back(mr.id + ": " + w);
    }
    mr.groups = std::move(groups);
    mr.bartlett_statistic = bart.statistic;
    mr.bartlett_df = bart.df;
    mr.p_value = bart.p_value;
    const auto ranking = decide_and_rank(variances, bart.p_value, alpha);
    mr.decision = ranking.decision;
    mr.winner = ranking.winner;
    mr.note = ranking.note;
    return mr;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs) {
    const auto started = std::chrono::steady_clock::now();
    spec.validate();
    const auto sources = spec.model.network.randomness_sources();
    const auto reps = static_cast<std::size_t>(spec.replications);

    ExperimentResult result;
    for (auto g : spec.groups) {
        GroupRuns runs;
        runs.group = g;
        runs.outputs.resize(reps);
        result.runs.push_back(std::move(runs));
    }

    RunOptions options;
    options.warmup = spec.warmup;
    parallel_for(spec.groups.size() * reps, jobs, [&](std::size_t task) {
        const std::size_t gi = task / reps;
        const auto r = static_cast<std::int64_t>(task % reps);
        const auto manifest = manifest_for_scenario(sources, spec.groups[gi], spec.base_seed, r);
        result.runs[gi].outputs[static_cast<std::size_t>(r)] =
            run_replication(spec.model.network, spec.horizon, spec.stop_rule, manifest, options);
    });

    // Undefined values abort the experiment before any statistics.
    for (const auto& runs : result.runs) {
        std::vector<std::string> needed = spec.measures;
        if (runs.group == Scenario::cv) needed.push_back(spec.control_variate);
        for (std::size_t r = 0; r < runs.outputs.size(); ++r) {
            for (const auto& m : needed) {
                if (!runs.outputs[r].value(m)) {
                    throw DegenerateStatistics("measure '" + m + "' is undefined in group " +
                                               std::string(to_string(runs.group)) + " replication " +
                                               std::to_string(r) + " (" +
                                               manifest_file_name(runs.group, static_cast<int>(r)) + ")\n" +
                                               runs.outputs[r].manifest.to_text());
                }
            }
        }
    }

    auto& report = result.report;
    report.name = spec.name;
    report.model_kind = std::string(to_string(spec.model.kind));
    report.replications = spec.replications;
    report.horizon = spec.horizon;
    report.stop_rule = spec.stop_rule == StopRule::at_horizon ? "at_horizon" : "horizon_then_drain";
    report.warmup = spec.warmup;
    report.alpha = spec.alpha;
    report.base_seed = spec.base_seed.value;
    report.generator_id = std::string(kGeneratorId);
    report.control_variate = spec.control_variate;

    for (const auto& measure : spec.measures) {
        std::vector<GroupSummary> groups;
        for (const auto& runs : result.runs) {
            GroupSummary g;
            g.group = runs.group;
            for (std::size_t r = 0; r < runs.outputs.size(); ++r) {
                g.manifests.push_back(manifest_file_name(runs.group, static_cast<int>(r)));
            }
            const auto raw = series_of(runs.outputs, measure);
            switch (runs.group) {
                case Scenario::base:
                case Scenario::crn:
                    g.series = raw;
                    break;
                case Scenario::av: {
                    PairedSeries pairs;
                    for (std::size_t r = 0; r + 1 < raw.size(); r += 2) {
                        pairs.x.push_back(raw[r]);
                        pairs.x_prime.push_back(raw[r + 1]);
                    }
                    g.series = av_pair_series(pairs).y_series;
                    break;
                }
                case Scenario::cv: {
                    const auto cv = cv_adjust(CvInput{raw, series_of(runs.outputs, spec.control_variate), std::nullopt});
                    for (const auto& w : cv.warnings) report.warnings.push_back(measure + " (CV): " + w);
                    g.series = cv.adjusted_series;
                    g.cv = CvDetail{cv.a_hat, cv.expected_x, cv.var_raw, cv.var_adjusted, sample_mean(raw),
                                    cv.correlation, raw};
                    break;
                }
            }
            groups.push_back(std::move(g));
        }
        const auto* spec_measure = spec.model.network.find_measure(measure);
        report.measures.push_back(
            analyze_measure(measure, spec_measure->label, std::move(groups), spec.alpha, &report.warnings));
    }

    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

CompareReport run_compare(const ExperimentSpec& spec, int jobs) {
    spec.validate();
    if (!spec.alternative) throw ValidationError("compare: experiment spec has no alternative_model");
    const auto& model_a = spec.model.network;
    const auto& model_b = spec.alternative->network;
    const auto sources_a = model_a.randomness_sources();
    const auto sources_b = model_b.randomness_sources();
    const StreamSeed independent_seed = derive_seed(spec.base_seed, "independent", "*", 0);
    const auto reps = static_cast<std::size_t>(spec.replications);

    std::vector<ReplicationOutput> a(reps);
    std::vector<ReplicationOutput> b_sync(reps);
    std::vector<ReplicationOutput> b_indep(reps);
    RunOptions options;
    options.warmup = spec.warmup;
    parallel_for(3 * reps, jobs, [&](std::size_t task) {
        const auto r = static_cast<std::int64_t>(task % reps);
        switch (task / reps) {
            case 0:
                a[task % reps] = run_replication(model_a, spec.horizon, spec.stop_rule,
                                                 manifest_for_scenario(sources_a, Scenario::crn, spec.base_seed, r),
                                                 options);
                break;
            case 1:
                b_sync[task % reps] = run_replication(
                    model_b, spec.horizon, spec.stop_rule,
                    manifest_for_scenario(sources_b, Scenario::crn, spec.base_seed, r), options);
                break;
            default:
                b_indep[task % reps] = run_replication(
                    model_b, spec.horizon, spec.stop_rule,
                    manifest_for_scenario(sources_b, Scenario::crn, independent_seed, r), options);
                break;
        }
    });

    CompareReport report;
    report.name = spec.name;
    report.replications = spec.replications;
    for (const auto& m : spec.measures) {
        auto values = [&](const std::vector<ReplicationOutput>& outs) {
            std::vector<double> v;
            for (std::size_t r = 0; r < outs.size(); ++r) {
                const auto x = outs[r].value(m);
                if (!x) {
                    throw DegenerateStatistics("measure '" + m + "' undefined in compare replication " +
                                               std::to_string(r));
                }
                v.push_back(*x);
            }
            return v;
        };
        const auto xa = values(a);
        CompareMeasure cm;
        cm.id = m;
        cm.label = spec.model.network.find_measure(m)->label;
        cm.synchronized = crn_difference_variance(PairedSeries{xa, values(b_sync)});
        cm.independent = crn_difference_variance(PairedSeries{xa, values(b_indep)});
        report.measures.push_back(std::move(cm));
    }
    return report;
}

std::string render_compare(const CompareReport& report) {
    std::ostringstream out;
    char buf[256];
    out << "desvar compare: " << report.name << " (" << report.replications << " replications per configuration)\n";
    for (const auto& m : report.measures) {
        out << "\n== " << m.label << " (" << m.id << ") ==\n";
        std::snprintf(buf, sizeof buf, "%-14s %14s %14s %14s %14s %14s\n", "streams", "mean(D)", "Var(D)", "Var(A)",
                      "Var(B)", "Cov(A,B)");
        out << buf;
        for (const auto& [name, r] : {std::pair{"synchronized", &m.synchronized}, std::pair{"independent", &m.independent}}) {
            std::snprintf(buf, sizeof buf, "%-14s %14.6g %14.6g %14.6g %14.6g %14.6g\n", name, r->mean_d, r->var_d,
                          r->var_a, r->var_b, r->cov_ab);
            out << buf;
        }
        const double ratio = m.independent.var_d > 0 ? m.synchronized.var_d / m.independent.var_d : std::nan("");
        std::snprintf(buf, sizeof buf, "Var(D) ratio synchronized/independent: %.4f\n", ratio);
        out << buf;
    }
    return out.str();
}

NetworkModel make_mm1_model(double interarrival_mean, double service_mean) {
    NetworkModel m;
    m.name = "mm1";
    ServerSpec server;
    server.id = "server";
    server.resource_class = "server";
    server.capacity = CapacitySchedule::fixed(1);
    m.stations.push_back(StationSpec{"queue", false, {server}});
    m.entity_types.push_back(EntityType{"customer", 1.0, {RouteStep{0, Distribution::expo(service_mean)}}});
    m.arrivals.kind = ArrivalSpec::Kind::renewal;
    m.arrivals.interarrival = Distribution::expo(interarrival_mean);
    m.arrivals.first_at = 0;
    m.measures = {
        {"utilization", "Server Utilization", Statistic::utilization_instantaneous, {}, MeasureRole::primary},
        {"system_time", "Time in System", Statistic::entity_total_time, {}, MeasureRole::primary},
        {"wip", "Number in System", Statistic::wip, {}, MeasureRole::primary},
        {"queue_wait", "Queue Wait", Statistic::entity_wait_time, {}, MeasureRole::control_variate},
    };
    m.validate();
    return m;
}

Mm1Validation validate_mm1(int replications, double horizon, StreamSeed seed, int jobs) {
    if (replications < 1) throw ValidationError("validate_mm1: replications must be >= 1");
    constexpr double kInterarrival = 2.0;
    constexpr double kService = 1.0;
    const auto model = make_mm1_model(kInterarrival, kService);
    const auto sources = model.randomness_sources();
    std::vector<ReplicationOutput> outs(static_cast<std::size_t>(replications));
    parallel_for(outs.size(), jobs, [&](std::size_t r) {
        outs[r] = run_replication(model, horizon, StopRule::at_horizon,
                                  manifest_for_scenario(sources, Scenario::crn, seed, static_cast<std::int64_t>(r)));
    });
    auto mean_of = [&](const char* id) {
        double sum = 0;
        for (const auto& o : outs) {
            const auto v = o.value(id);
            if (!v) throw DegenerateStatistics(std::string("validate_mm1: undefined ") + id);
            sum += *v;
        }
        return sum / static_cast<double>(outs.size());
    };
    Mm1Validation v;
    v.replications = replications;
    v.horizon = horizon;
    v.utilization = mean_of("utilization");
    v.queue_wait = mean_of("queue_wait");
    v.wip = mean_of("wip");
    v.system_time = mean_of("system_time");
    v.arrival_rate = 1.0 / kInterarrival;
    const double mu = 1.0 / kService;
    v.expected_utilization = v.arrival_rate / mu;
    v.expected_queue_wait = v.expected_utilization / (mu - v.arrival_rate);
    const double little = v.arrival_rate * v.system_time;
    v.littles_law_error = std::abs(v.wip - little) / little;
    v.utilization_ok = std::abs(v.utilization - v.expected_utilization) <= 0.02;
    v.queue_wait_ok = std::abs(v.queue_wait - v.expected_queue_wait) <= 0.1;
    v.littles_law_ok = v.littles_law_error <= 0.05;
    return v;
}

}  // namespace desvar
