#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DESVAR_CLI;
const std::string kConfigs = DESVAR_CONFIG_DIR;
const std::string kData = DESVAR_TEST_DATA_DIR;

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = "'" + kCli + "' " + args + " 2>&1";
    Result r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("run writes every output") {
    const auto dir = fs::temp_directory_path() / "desvar_cli_run";
    fs::remove_all(dir);
    const auto r = run("run --spec " + kConfigs + "/mm1.experiment --out " + dir.string() + " --jobs 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("Bartlett") != std::string::npos);
    for (const char* f : {"report.csv", "report.json", "report.txt", "manifests/AV_rep05.seeds"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    fs::remove_all(dir);

    const auto only = run("run --spec " + kConfigs + "/mm1.experiment --out " + dir.string() + " --format json");
    CHECK(only.code == 0);
    CHECK(fs::exists(dir / "report.json"));
    CHECK_FALSE(fs::exists(dir / "report.csv"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    CHECK(run("run --spec " + kData + "/one_replication.experiment --out /tmp/desvar_cli_x").code == 2);
    CHECK(run("run --spec " + kData + "/constant.experiment --out /tmp/desvar_cli_x").code == 3);
    const auto undefined = run("run --spec " + kData + "/never_served.experiment --out /tmp/desvar_cli_x");
    CHECK(undefined.code == 3);
    CHECK(undefined.out.find("manifests/") != std::string::npos);
    CHECK(run("run --spec /no/such/file --out /tmp/x").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("--help").code == 0);
    fs::remove_all("/tmp/desvar_cli_x");
}

TEST_CASE("other subcommands") {
    const auto mm1 = run("validate-mm1");
    CHECK(mm1.code == 0);
    CHECK(mm1.out.find("Little") != std::string::npos);

    const auto m = run("print-manifest --spec " + kConfigs + "/manufacturing.experiment --group CRN --rep 0");
    CHECK(m.code == 0);
    CHECK(m.out.find("scenario=CRN") != std::string::npos);
    CHECK(m.out.find("service.cell3.new=") != std::string::npos);
    CHECK(run("print-manifest --spec " + kConfigs + "/manufacturing.experiment --group XYZ --rep 0").code == 2);
    CHECK(run("print-manifest --spec " + kConfigs + "/manufacturing.experiment --group AV --rep 10").code == 2);

    const auto c = run("compare --spec " + kConfigs + "/mm1_compare.experiment");
    CHECK(c.code == 0);
    CHECK(c.out.find("independent") != std::string::npos);
}
