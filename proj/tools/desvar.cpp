#include <desvar/error.hpp>
#include <desvar/harness.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

int fail(int code, const char* kind, const std::exception& e) {
    std::cerr << "desvar: " << kind << ": " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-reduction experiments on discrete-event simulation models"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir;
    std::vector<std::string> formats{"csv", "json", "table"};
    int jobs = 1;

    auto* run = app.add_subcommand("run", "Run a four-group experiment and write reports");
    run->add_option("--spec", spec_path, "experiment spec")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--format", formats, "csv|json|table (repeatable; default all)")
        ->delimiter(',')
        ->check(CLI::IsMember({"csv", "json", "table", "text"}));
    run->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));

    auto* compare = app.add_subcommand("compare", "CRN difference analysis of the spec's two configurations");
    compare->add_option("--spec", spec_path, "experiment spec")->required()->check(CLI::ExistingFile);
    compare->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));

    int mm1_reps = 10;
    double mm1_horizon = 50000;
    std::uint64_t seed = 2010;
    auto* mm1 = app.add_subcommand("validate-mm1", "Check the kernel against M/M/1 closed forms");
    mm1->add_option("--reps", mm1_reps)->check(CLI::Range(1, 100000));
    mm1->add_option("--horizon", mm1_horizon)->check(CLI::PositiveNumber);
    mm1->add_option("--seed", seed);
    mm1->add_option("--jobs", jobs)->check(CLI::Range(1, 256));

    std::string group = "CRN";
    int rep = 0;
    auto* manifest = app.add_subcommand("print-manifest", "Print the seed manifest of one replication");
    manifest->add_option("--spec", spec_path, "experiment spec")->required()->check(CLI::ExistingFile);
    manifest->add_option("--group", group, "Base|CRN|AV|CV");
    manifest->add_option("--rep", rep, "replication index")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const auto spec = desvar::load_spec(spec_path);
            std::vector<desvar::ReportFormat> fmts;
            for (const auto& f : formats) fmts.push_back(desvar::parse_report_format(f));
            const auto result = desvar::run_experiment(spec, jobs);
            desvar::write_outputs(result, spec, out_dir, fmts);
            std::cout << desvar::render_report(result.report, desvar::ReportFormat::table);
        } else if (*compare) {
            const auto spec = desvar::load_spec(spec_path);
            std::cout << desvar::render_compare(desvar::run_compare(spec, jobs));
        } else if (*mm1) {
            const auto v = desvar::validate_mm1(mm1_reps, mm1_horizon, desvar::StreamSeed{seed}, jobs);
            std::printf("M/M/1 validation: %d replications, horizon %.0f min\n", v.replications, v.horizon);
            std::printf("utilization  %.4f  expected %.4f  %s\n", v.utilization, v.expected_utilization,
                        v.utilization_ok ? "ok" : "FAIL");
            std::printf("queue wait   %.4f  expected %.4f  %s\n", v.queue_wait, v.expected_queue_wait,
                        v.queue_wait_ok ? "ok" : "FAIL");
            std::printf("Little's law WIP %.4f vs lambda*W %.4f (rel. error %.4f)  %s\n", v.wip,
                        v.arrival_rate * v.system_time, v.littles_law_error, v.littles_law_ok ? "ok" : "FAIL");
            return v.passed() ? 0 : 1;
        } else if (*manifest) {
            const auto spec = desvar::load_spec(spec_path);
            const auto scenario = desvar::parse_scenario(group);
            if (rep >= spec.replications) {
                throw desvar::ValidationError("replication " + std::to_string(rep) + " out of range");
            }
            std::cout << desvar::manifest_for_scenario(spec.model.network.randomness_sources(), scenario,
                                                       spec.base_seed, rep)
                             .to_text();
        }
    } catch (const desvar::ValidationError& e) {
        return fail(2, "validation error", e);
    } catch (const desvar::DegenerateStatistics& e) {
        return fail(3, "degenerate statistics", e);
    } catch (const std::exception& e) {
        return fail(1, "error", e);
    }
    return 0;
}
