#pragma once

#include "desvar/kernel/network.hpp"
#include "desvar/models.hpp"
#include "desvar/rng.hpp"
#include "desvar/stats.hpp"
#include "desvar/vrt.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace desvar {

struct ExperimentSpec {
    std::string name;
    std::filesystem::path model_path;
    Model model;
    std::optional<std::filesystem::path> alternative_path;  // second configuration for `compare`
    std::optional<Model> alternative;
    int replications = 10;
    double warmup = 0;
    double horizon = 0;
    StopRule stop_rule = StopRule::at_horizon;
    double alpha = 0.05;
    std::vector<Scenario> groups;
    std::vector<std::string> measures;
    std::string control_variate;
    StreamSeed base_seed;
    bool strict_paper = false;

    // Throws ValidationError on any broken invariant (replications < 2, odd
    // replications with AV, control variate among analyzed measures, unknown
    // measures, ...).
    void validate() const;
};

// Experiment files are JSON; model paths resolve relative to the spec file.
ExperimentSpec parse_experiment_spec(std::string_view text, const std::filesystem::path& base_dir);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct CvDetail {
    double a_hat = 0;
    double expected_x = 0;
    double var_raw = 0;
    double var_adjusted = 0;
    double raw_mean = 0;
    double correlation = 0;
    std::vector<double> raw_series;
};

struct GroupSummary {
    Scenario group = Scenario::base;
    std::size_t n = 0;
    double mean = 0;
    double variance = 0;
    double stdev = 0;
    double ci_halfwidth = 0;
    std::vector<double> series;          // observations entering the variance comparison
    std::vector<std::string> manifests;  // relative manifest file names, replication order
    std::optional<CvDetail> cv;
};

struct MeasureReport {
    std::string id;
    std::string label;
    std::vector<GroupSummary> groups;
    double bartlett_statistic = 0;
    int bartlett_df = 0;
    double p_value = 1;
    Decision decision = Decision::fail_to_reject;
    std::optional<Scenario> winner;
    std::string note;
};

struct ExperimentReport {
    std::string name;
    std::string model_kind;
    int replications = 0;
    double horizon = 0;
    std::string stop_rule;
    double warmup = 0;
    double alpha = 0.05;
    std::uint64_t base_seed = 0;
    std::string generator_id;
    std::string control_variate;
    std::vector<MeasureReport> measures;
    std::vector<std::string> warnings;
    double wall_clock_seconds = 0;  // text format only; CSV/JSON stay byte-stable
};

struct GroupRuns {
    Scenario group = Scenario::base;
    std::vector<ReplicationOutput> outputs;  // replication order
};

struct ExperimentResult {
    ExperimentReport report;
    std::vector<GroupRuns> runs;
};

struct Ranking {
    Decision decision = Decision::fail_to_reject;
    std::optional<Scenario> winner;
    std::string note;
};

// reject iff p < alpha. Winner = minimum-variance group among CRN/AV/CV, only
// when rejected and only when that variance is below Base's.
Ranking decide_and_rank(const std::map<Scenario, double>& variances, double p_value, double alpha);

std::string manifest_file_name(Scenario group, int replication);

// Replications may run on `jobs` threads; assembly is ordered by replication
// index, so output does not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs = 1);

// Groups a measure series by group and runs Bartlett + ranking. Exposed for
// tests; run_experiment uses it for each analyzed measure.
MeasureReport analyze_measure(std::string id, std::string label, std::vector<GroupSummary> groups, double alpha,
                              std::vector<std::string>* warnings = nullptr);

enum class ReportFormat { csv, json, table };
ReportFormat parse_report_format(std::string_view text);

std::string render_report(const ExperimentReport& report, ReportFormat format);
ExperimentReport report_from_json(std::string_view text);

// One row per (group, replication): measures, counts, manifest path.
std::string render_replications_csv(const ExperimentResult& result, const ExperimentSpec& spec);

// Writes report.{csv,json,txt} (per `formats`), replications.csv and
// manifests/*.seeds under `out_dir`.
void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                   const std::vector<ReportFormat>& formats);

// Two-configuration comparison on the spec's model and alternative: the same
// replications run once with synchronized per-source streams (CRN) and once
// with independent seed spaces for the two configurations.
struct CompareMeasure {
    std::string id;
    std::string label;
    CrnResult synchronized;
    CrnResult independent;
};

struct CompareReport {
    std::string name;
    int replications = 0;
    std::vector<CompareMeasure> measures;
};

CompareReport run_compare(const ExperimentSpec& spec, int jobs = 1);
std::string render_compare(const CompareReport& report);

// Single-server queue with exponential interarrival and service times and
// the measure registry used by the kernel validation.
NetworkModel make_mm1_model(double interarrival_mean, double service_mean);

struct Mm1Validation {
    int replications = 0;
    double horizon = 0;
    double utilization = 0;
    double queue_wait = 0;
    double wip = 0;
    double system_time = 0;
    double arrival_rate = 0;
    double expected_utilization = 0;
    double expected_queue_wait = 0;
    double littles_law_error = 0;  // |WIP - lambda W| / (lambda W)
    bool utilization_ok = false;
    bool queue_wait_ok = false;
    bool littles_law_ok = false;
    bool passed() const noexcept { return utilization_ok && queue_wait_ok && littles_law_ok; }
};

// EXPO(2) arrivals, EXPO(1) service by default; tolerances 0.02 (utilization),
// 0.1 min (queue wait) and 5% (Little's law).
Mm1Validation validate_mm1(int replications = 10, double horizon = 50000.0, StreamSeed seed = StreamSeed{2010},
                           int jobs = 1);

}  // namespace desvar
