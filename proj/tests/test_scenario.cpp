#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "pdcoh/pdcoh.hpp"

using namespace pdcoh;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path d = fs::temp_directory_path() / "pdcoh_scenario_tests";
    fs::create_directories(d);
    return d;
}

std::string write_file(const std::string& name, const std::string& content) {
    fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(PDCOH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

const char* franson_base = R"(
# small Franson-type delay scan
run = franson-scan
out = OUTPATH
pump.kind = gsm
pump.bandwidth = 1.0
pump.corr_width = 1.0
pump.center = 200.0
grid.points = 129
response.phase_matching = gaussian
response.pm_width = 2.0
response.signal_center = 120.0
response.idler_center = 80.0
sweep.min = 0.0
sweep.max = 0.5
sweep.points = 11
)";

std::string franson_config(const std::string& name, const std::string& out) {
    std::string text = franson_base;
    text.replace(text.find("OUTPATH"), 7, out);
    return write_file(name, text);
}

}  // namespace

TEST_CASE("config parsing: comments, whitespace, errors") {
    ScenarioConfig c = ScenarioConfig::parse(
        "# comment\n\n  run = franson-scan  \nseed = 7\n\tout=x.csv\n");
    CHECK(c.get("run") == "franson-scan");
    CHECK(c.get_int("seed") == 7);
    CHECK(c.get("out") == "x.csv");
    CHECK(c.run_kind() == RunKind::franson_scan);

    CHECK_THROWS_AS(ScenarioConfig::parse("run franson-scan\n"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("run =\n"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("run = a\nrun = b\n"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("bogus.key = 1\n"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("run = mystery-scan\n").run_kind(), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("seed = abc\n").get_int("seed"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse("").get("run"), config_error);
    CHECK_THROWS_AS(ScenarioConfig::parse_file("/nonexistent/x.cfg"), config_error);
}

TEST_CASE("config assembles the model pieces") {
    ScenarioConfig c = ScenarioConfig::parse(
        "pump.kind = gsm\npump.bandwidth = 2.0\npump.corr_width = inf\n"
        "pump.center = 150.0\nwindows.t_ci = 3.5\npaths.tau_p1 = 0.4\n"
        "couplings.ks2 = 0.5\n");
    CrossSpectralDensity pump = c.pump();
    CHECK(pump.is_gsm());
    CHECK(pump.model().fully_coherent());
    CHECK(pump.center() == 150.0);
    AveragingWindows w = c.windows();
    CHECK_FALSE(w.t_pc.has_value());
    CHECK(w.t_ci.value() == 3.5);
    CHECK(c.pathways().alt1.tau_p == 0.4);
    CHECK(c.pathways().alt2.tau_p == 0.0);
    CHECK(c.couplings().kappa2() == doctest::Approx(0.5));

    ScenarioConfig g = ScenarioConfig::parse(
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 0.5\n"
        "pump.center = 100.0\ngrid.points = 65\ngrid.span = 4.0\n");
    CrossSpectralDensity tab = g.pump();
    CHECK_FALSE(tab.is_gsm());
    CHECK(tab.grid().size() == 65);
    CHECK(tab.grid().half_span() == 4.0);
}

TEST_CASE("wk-validate run writes an accurate lattice") {
    std::string out = (work_dir() / "wkv.csv").string();
    std::string cfg = write_file("wkv.cfg",
        "run = wk-validate\nout = " + out + "\n"
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 1.0\n"
        "pump.center = 100.0\nwkv.t_min = -2.0\nwkv.t_max = 2.0\nwkv.points = 5\n");
    RunReport rep = pdcoh::run(ScenarioConfig::parse_file(cfg));
    CHECK(rep.rows.size() == 25);
    REQUIRE(rep.columns.size() == 7);
    for (const auto& row : rep.rows) CHECK(row[6] < 1e-8);  // abs_err column
    CHECK(fs::exists(out));
    nlohmann::json meta = nlohmann::json::parse(slurp(out + ".meta.json"));
    CHECK(meta["rows"] == 25);
    CHECK(meta["config"]["run"] == "wk-validate");
}

TEST_CASE("franson scan produces non-negative rates and a csv") {
    std::string out = (work_dir() / "franson.csv").string();
    std::string cfg = franson_config("franson.cfg", out);
    RunReport rep = pdcoh::run(ScenarioConfig::parse_file(cfg));
    REQUIRE(rep.rows.size() == 11);
    CHECK(rep.columns[0] == "dtau");
    for (const auto& row : rep.rows) {
        CHECK(row[1] >= 0.0);                 // rate
        CHECK(row[2] <= 1.0 + 1e-10);         // |gbar_p|
        CHECK(row[3] <= 1.0 + 1e-10);         // |gbar_d|
    }
    std::string text = slurp(out);
    CHECK(text.rfind("dtau,rate,gbar_p_abs,gbar_d_abs\n", 0) == 0);
}

TEST_CASE("bound sweep never violates the coherence bound") {
    std::string out = (work_dir() / "bound.csv").string();
    std::string cfg = write_file("bound.cfg",
        "run = bound-sweep\nout = " + out + "\n"
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 0.8\n"
        "pump.center = 200.0\ngrid.points = 129\n"
        "response.phase_matching = gaussian\nresponse.pm_width = 2.0\n"
        "response.signal_center = 120.0\nresponse.idler_center = 80.0\n"
        "sweep.min = 0.0\nsweep.max = 1.5\nsweep.points = 7\n");
    RunReport rep = pdcoh::run(ScenarioConfig::parse_file(cfg));
    REQUIRE(rep.rows.size() == 7);
    for (const auto& row : rep.rows) {
        CHECK(row[1] <= row[2] + 1e-12);  // concurrence <= |gbar_p|
        CHECK(row[3] >= -1e-12);          // slack
    }
}

TEST_CASE("factorization check reports small z-scores") {
    std::string out = (work_dir() / "fact.csv").string();
    std::string cfg = write_file("fact.cfg",
        "run = factorization-check\nout = " + out + "\nseed = 5\n"
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 1.0\n"
        "pump.center = 200.0\n"
        "response.phase_matching = gaussian\nresponse.pm_width = 100.0\n"
        "response.signal_center = 110.0\nresponse.idler_center = 90.0\n"
        "paths.tau_s2 = 0.3\nfact.count = 1024\nfact.tbars = -0.5,0.0,0.5\n"
        "fact.ttils = 0.15\n");
    RunReport rep = pdcoh::run(ScenarioConfig::parse_file(cfg));
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
        CHECK(row[6] > 0.0);  // std_error
        CHECK(row[7] < 5.0);  // z-score of oracle vs factorized
    }
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    std::string out1 = (work_dir() / "det1.csv").string();
    std::string out2 = (work_dir() / "det2.csv").string();
    std::string cfg = write_file("det.cfg",
        "run = factorization-check\nseed = 11\nout = unused.csv\n"
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 1.0\n"
        "pump.center = 200.0\n"
        "response.phase_matching = gaussian\nresponse.pm_width = 50.0\n"
        "response.signal_center = 110.0\nresponse.idler_center = 90.0\n"
        "paths.tau_s2 = 0.2\nfact.count = 512\nfact.tbars = 0.0\nfact.ttils = 0.1\n");
    ScenarioConfig c = ScenarioConfig::parse_file(cfg);
    pdcoh::run(c, out1);
    pdcoh::run(c, out2);
    CHECK(slurp(out1) == slurp(out2));
    // a different seed changes the table
    std::string out3 = (work_dir() / "det3.csv").string();
    pdcoh::run(c, out3, 12);
    CHECK(slurp(out1) != slurp(out3));
    // thread count does not affect the result
    std::string out4 = (work_dir() / "det4.csv").string();
    pdcoh::run(c, out4, {}, 3);
    CHECK(slurp(out1) == slurp(out4));
}

TEST_CASE("cli exit codes and output") {
    std::string out = (work_dir() / "cli.csv").string();
    std::string good = franson_config("cli_good.cfg", out);
    fs::remove(out);
    CHECK(run_cli("run " + good) == 0);
    CHECK(fs::exists(out));
    CHECK(fs::exists(out + ".meta.json"));

    std::string bad = write_file("cli_bad.cfg", "run = franson-scan\nwhat = ever\n");
    CHECK(run_cli("run " + bad) == 2);
    CHECK(run_cli("run /nonexistent/x.cfg") == 2);

    // numerically invalid grid: domain error -> exit 3
    std::string dom = write_file("cli_dom.cfg",
        "run = franson-scan\nout = " + out + "\n"
        "pump.kind = gsm\npump.bandwidth = 1.0\npump.corr_width = 1.0\n"
        "pump.center = 200.0\ngrid.span = -2.0\n"
        "response.phase_matching = gaussian\nresponse.pm_width = 2.0\n"
        "response.signal_center = 120.0\nresponse.idler_center = 80.0\n"
        "sweep.min = 0.0\nsweep.max = 0.5\nsweep.points = 3\n");
    CHECK(run_cli("run " + dom) == 3);

    // --out and --seed overrides are honored
    std::string alt = (work_dir() / "cli_alt.csv").string();
    fs::remove(alt);
    CHECK(run_cli("run " + good + " --out " + alt + " --seed 99") == 0);
    CHECK(fs::exists(alt));
}
