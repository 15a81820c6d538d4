#include "desvar/error.hpp"
#include "desvar/harness.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace desvar {

using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shortnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string winner_text(const MeasureReport& m) {
    return m.winner ? std::string(to_string(*m.winner)) : std::string{};
}

std::string render_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "measure,label,group,n,mean,variance,stdev,ci_halfwidth,bartlett_statistic,bartlett_df,p_value,decision,"
           "winner,manifests\n";
    for (const auto& m : r.measures) {
        for (const auto& g : m.groups) {
            out << csv_field(m.id) << ',' << csv_field(m.label) << ',' << to_string(g.group) << ',' << g.n << ','
                << num(g.mean) << ',' << num(g.variance) << ',' << num(g.stdev) << ',' << num(g.ci_halfwidth) << ','
                << num(m.bartlett_statistic) << ',' << m.bartlett_df << ',' << num(m.p_value) << ','
                << to_string(m.decision) << ',' << winner_text(m) << ',' << csv_field(join(g.manifests, ";"))
                << '\n';
        }
    }
    return out.str();
}

ojson to_json(const ExperimentReport& r) {
    ojson root;
    root["name"] = r.name;
    root["model_kind"] = r.model_kind;
    root["replications"] = r.replications;
    root["horizon"] = r.horizon;
    root["stop_rule"] = r.stop_rule;
    root["warmup"] = r.warmup;
    root["alpha"] = r.alpha;
    root["base_seed"] = r.base_seed;
    root["generator_id"] = r.generator_id;
    root["control_variate"] = r.control_variate;
    ojson measures = ojson::array();
    for (const auto& m : r.measures) {
        ojson jm;
        jm["id"] = m.id;
        jm["label"] = m.label;
        jm["bartlett"] = {{"statistic", m.bartlett_statistic}, {"df", m.bartlett_df}, {"p_value", m.p_value}};
        jm["decision"] = std::string(to_string(m.decision));
        jm["winner"] = m.winner ? ojson(std::string(to_string(*m.winner))) : ojson(nullptr);
        jm["note"] = m.note;
        ojson groups = ojson::array();
        for (const auto& g : m.groups) {
            ojson jg;
            jg["group"] = std::string(to_string(g.group));
            jg["n"] = g.n;
            jg["mean"] = g.mean;
            jg["variance"] = g.variance;
            jg["stdev"] = g.stdev;
            jg["ci_halfwidth"] = g.ci_halfwidth;
            jg["series"] = g.series;
            jg["manifests"] = g.manifests;
            if (g.cv) {
                jg["cv"] = {{"a_hat", g.cv->a_hat},
                            {"expected_x", g.cv->expected_x},
                            {"var_raw", g.cv->var_raw},
                            {"var_adjusted", g.cv->var_adjusted},
                            {"raw_mean", g.cv->raw_mean},
                            {"correlation", g.cv->correlation},
                            {"raw_series", g.cv->raw_series}};
            }
            groups.push_back(std::move(jg));
        }
        jm["groups"] = std::move(groups);
        measures.push_back(std::move(jm));
    }
    root["measures"] = std::move(measures);
    root["warnings"] = r.warnings;
    return root;
}

std::string render_table(const ExperimentReport& r) {
    std::ostringstream out;
    char buf[256];
    out << "desvar experiment: " << r.name << " (" << r.model_kind << ")\n";
    out << "replications per group: " << r.replications << "   warm-up: " << shortnum(r.warmup)
        << " min   horizon: " << shortnum(r.horizon) << " min (" << r.stop_rule << ")   alpha: " << shortnum(r.alpha) << '\n';
    out << "base seed: " << r.base_seed << "   generator: " << r.generator_id << '\n';
    out << "control variate: " << r.control_variate << '\n';
    out << "wall clock: " << fixed(r.wall_clock_seconds, 2) << " s\n";

    const std::string confidence = fixed(100.0 * (1.0 - r.alpha), 0) + "%";
    for (const auto& m : r.measures) {
        out << "\n== " << m.label << " (" << m.id << ") ==\n";
        std::snprintf(buf, sizeof buf, "%-6s %4s %16s %16s %14s %16s\n", "group", "n", "mean", "variance", "stdev",
                      (confidence + " CI +/-").c_str());
        out << buf;
        std::vector<std::string> names;
        for (const auto& g : m.groups) {
            names.emplace_back(to_string(g.group));
            std::snprintf(buf, sizeof buf, "%-6s %4zu %16.6g %16.6g %14.6g %16.6g\n",
                          std::string(to_string(g.group)).c_str(), g.n, g.mean, g.variance, g.stdev, g.ci_halfwidth);
            out << buf;
        }
        for (const auto& g : m.groups) {
            if (!g.cv) continue;
            std::snprintf(buf, sizeof buf,
                          "CV detail: a = %.6g, E[X] = %.6g, raw variance %.6g -> adjusted %.6g, corr %.4f\n",
                          g.cv->a_hat, g.cv->expected_x, g.cv->var_raw, g.cv->var_adjusted, g.cv->correlation);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "Bartlett: statistic %.6g on %d df, p-value %.6g\n", m.bartlett_statistic,
                      m.bartlett_df, m.p_value);
        out << buf;
        const bool reject = m.decision == Decision::reject;
        out << "At the " << confidence << " level the p-value " << (reject ? "is below" : "is not below")
            << " alpha " << shortnum(r.alpha) << ", so the hypothesis of equal variances across " << join(names, ", ")
            << (reject ? " is rejected" : " is not rejected") << ".\n";
        out << "Variance difference: " << (reject ? "statistically significant" : "statistically insignificant");
        if (m.winner) {
            out << "; largest reduction in variance: " << to_string(*m.winner) << " (" << m.label << ").\n";
        } else {
            out << "; " << m.note << ".\n";
        }
    }

    if (!r.measures.empty()) {
        out << "\nseed manifests:\n";
        for (const auto& g : r.measures.front().groups) {
            out << "  " << to_string(g.group) << ": " << join(g.manifests, " ") << '\n';
        }
    }
    if (!r.warnings.empty()) {
        out << "\nwarnings:\n";
        for (const auto& w : r.warnings) out << "  " << w << '\n';
    }
    return out.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
    if (text == "csv") return ReportFormat::csv;
    if (text == "json") return ReportFormat::json;
    if (text == "table" || text == "text") return ReportFormat::table;
    throw ValidationError("unknown report format '" + std::string(text) + "'");
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::csv:
            return render_csv(report);
        case ReportFormat::json:
            return to_json(report).dump(2) + "\n";
        case ReportFormat::table:
            return render_table(report);
    }
    return {};
}

ExperimentReport report_from_json(std::string_view text) {
    ExperimentReport r;
    try {
        const auto root = ojson::parse(text);
        r.name = root.at("name").get<std::string>();
        r.model_kind = root.at("model_kind").get<std::string>();
        r.replications = root.at("replications").get<int>();
        r.horizon = root.at("horizon").get<double>();
        r.stop_rule = root.at("stop_rule").get<std::string>();
        r.warmup = root.at("warmup").get<double>();
        r.alpha = root.at("alpha").get<double>();
        r.base_seed = root.at("base_seed").get<std::uint64_t>();
        r.generator_id = root.at("generator_id").get<std::string>();
        r.control_variate = root.at("control_variate").get<std::string>();
        for (const auto& jm : root.at("measures")) {
            MeasureReport m;
            m.id = jm.at("id").get<std::string>();
            m.label = jm.at("label").get<std::string>();
            m.bartlett_statistic = jm.at("bartlett").at("statistic").get<double>();
            m.bartlett_df = jm.at("bartlett").at("df").get<int>();
            m.p_value = jm.at("bartlett").at("p_value").get<double>();
            const auto decision = jm.at("decision").get<std::string>();
            if (decision == "reject") m.decision = Decision::reject;
            else if (decision == "fail to reject") m.decision = Decision::fail_to_reject;
            else throw ValidationError("report: unknown decision '" + decision + "'");
            if (!jm.at("winner").is_null()) m.winner = parse_scenario(jm.at("winner").get<std::string>());
            m.note = jm.at("note").get<std::string>();
            for (const auto& jg : jm.at("groups")) {
                GroupSummary g;
                g.group = parse_scenario(jg.at("group").get<std::string>());
                g.n = jg.at("n").get<std::size_t>();
                g.mean = jg.at("mean").get<double>();
                g.variance = jg.at("variance").get<double>();
                g.stdev = jg.at("stdev").get<double>();
                g.ci_halfwidth = jg.at("ci_halfwidth").get<double>();
                g.series = jg.at("series").get<std::vector<double>>();
                g.manifests = jg.at("manifests").get<std::vector<std::string>>();
                if (jg.contains("cv")) {
                    const auto& c = jg.at("cv");
                    g.cv = CvDetail{c.at("a_hat").get<double>(),        c.at("expected_x").get<double>(),
                                    c.at("var_raw").get<double>(),      c.at("var_adjusted").get<double>(),
                                    c.at("raw_mean").get<double>(),     c.at("correlation").get<double>(),
                                    c.at("raw_series").get<std::vector<double>>()};
                }
                m.groups.push_back(std::move(g));
            }
            r.measures.push_back(std::move(m));
        }
        r.warnings = root.at("warnings").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report: ") + e.what());
    }
    return r;
}

std::string render_replications_csv(const ExperimentResult& result, const ExperimentSpec& spec) {
    std::ostringstream out;
    const auto& registry = spec.model.network.measures;
    out << "group,replication";
    for (const auto& m : registry) out << ',' << csv_field(m.id);
    out << ",created,disposed,balked,in_system,end_time,events,manifest\n";
    for (const auto& runs : result.runs) {
        for (std::size_t r = 0; r < runs.outputs.size(); ++r) {
            const auto& o = runs.outputs[r];
            out << to_string(runs.group) << ',' << r;
            for (const auto& m : registry) {
                const auto v = o.value(m.id);
                out << ',' << (v ? num(*v) : std::string{});
            }
            out << ',' << o.counts.created << ',' << o.counts.disposed << ',' << o.counts.balked << ','
                << o.counts.in_system << ',' << num(o.end_time) << ',' << o.events << ','
                << manifest_file_name(runs.group, static_cast<int>(r)) << '\n';
        }
    }
    return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                   const std::vector<ReportFormat>& formats) {
    std::filesystem::create_directories(out_dir / "manifests");
    for (const auto& runs : result.runs) {
        for (std::size_t r = 0; r < runs.outputs.size(); ++r) {
            write_file(out_dir / manifest_file_name(runs.group, static_cast<int>(r)), runs.outputs[r].manifest.to_text());
        }
    }
    for (auto f : formats) {
        const char* name = f == ReportFormat::csv ? "report.csv" : f == ReportFormat::json ? "report.json" : "report.txt";
        write_file(out_dir / name, render_report(result.report, f));
    }
    write_file(out_dir / "replications.csv", render_replications_csv(result, spec));
}

}  // namespace desvar
