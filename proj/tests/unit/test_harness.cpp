#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "dlab/error.hpp"
#include "dlab/harness.hpp"

using namespace dlab;
namespace fs = std::filesystem;

namespace {

std::string schema_message(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config_text(text, ".", overrides);
    } catch (const LabError& e) {
        CHECK(e.kind() == ErrorKind::SchemaError);
        return e.what();
    }
    FAIL("expected a SchemaError");
    return "";
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

const char* kBichar = "experiment: bichar\ncases:\n  - {n: 2, m: 1, X0: 1.0, Xi0: 1.0}\nhorizon: 1.0\n";

} // namespace

TEST_SUITE("harness_cli") {

TEST_CASE("defaults are filled and echoed") {
    const auto cfg = parse_config_text(kBichar);
    CHECK(cfg.experiment == "bichar");
    CHECK(cfg.values["rel_tol"].get<double>() == 1e-10);
    CHECK(cfg.values["tolerances"]["closed_form_rel"].get<double>() == 1e-6);
    CHECK(cfg.values["cases"][0]["A"].get<double>() == 1.0);
}

TEST_CASE("schema errors name the field and the line") {
    const std::string unknown = schema_message(std::string(kBichar) + "colour: red\n");
    CHECK(contains(unknown, "colour"));
    CHECK(contains(unknown, "line 5"));
    CHECK(contains(schema_message("experiment: nope\n"), "unknown experiment"));
    CHECK(contains(schema_message("horizon: 1\n"), "experiment"));
    CHECK(contains(schema_message("experiment: bichar\ncases:\n  - {n: two, m: 1, X0: 1, Xi0: 1}\n"), "n"));
    CHECK(contains(schema_message("experiment: [unclosed\n"), "line"));
}

TEST_CASE("overrides replace values before validation") {
    const auto cfg = parse_config_text(kBichar, ".", {"tolerances.closed_form_rel=1e-3", "horizon=0.5"});
    CHECK(cfg.values["tolerances"]["closed_form_rel"].get<double>() == 1e-3);
    CHECK(cfg.values["horizon"].get<double>() == 0.5);
    schema_message(kBichar, {"horizon=abc"});
}

TEST_CASE("a run is deterministic and serializes without timings") {
    const auto cfg = parse_config_text(kBichar);
    const auto a = run_experiment(cfg), b = run_experiment(cfg, {2});
    CHECK(a.exit_code() == 0);
    CHECK(a.to_json().dump() == b.to_json().dump());
    const Json j = a.to_json();
    CHECK(j["schema_version"].get<int>() == kReportSchemaVersion);
    CHECK(j["status"].get<std::string>() == "pass");
    CHECK(!j.contains("timings"));
}

TEST_CASE("tolerance failures and runtime errors map to exit codes") {
    const auto tight = run_experiment(parse_config_text(kBichar, ".", {"tolerances.closed_form_rel=1e-30"}));
    CHECK(!tight.all_pass());
    CHECK(tight.exit_code() == 2);
    // H^m rates above m = 2 are refused as under-resolved
    const auto err = run_experiment(parse_config_text("experiment: hm-rates\nlambda: [-16]\nm_list: [3]\n"));
    REQUIRE(err.error);
    CHECK(contains(*err.error, "UnderResolved"));
    CHECK(err.exit_code() == 3);
}

TEST_CASE("check helpers") {
    CHECK(check_at_most("a", 1.0, 1.0).pass);
    CHECK(!check_at_most("a", 1.1, 1.0).pass);
    CHECK(check_at_least("a", 1.0, 1.0).pass);
    CHECK(check_in("a", 0.5, 0.0, 1.0).pass);
    CHECK(!check_in("a", 1.5, 0.0, 1.0).pass);
    const Check r = check_rel("a", 1.1, 1.0, 0.2);
    CHECK(r.pass);
    CHECK(*r.rel_error == doctest::Approx(0.1));
    CHECK(check_abs("a", 0.05, 0.0, 0.1).pass);
    CHECK(check_equal("a", 2.0, 2.0).pass);
    CHECK(!check_equal("a", 2.0, 2.0 + 1e-15).pass);
}

TEST_CASE("CSV tables round-trip doubles") {
    Table t{"demo", {"t", "value"}, {{0.0, 0.1}, {1.0 / 3.0, -2.5e-300}}};
    const std::string csv = table_csv(t);
    CHECK(csv.rfind("t,value\n", 0) == 0);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == 1.0 / 3.0);
    CHECK(std::stod(line.substr(comma + 1)) == -2.5e-300);
}

TEST_CASE("emit_report writes the documented files") {
    const auto rep = run_experiment(parse_config_text(kBichar));
    const fs::path dir = fs::temp_directory_path() / "lab-unit-emit";
    fs::remove_all(dir);
    emit_report(rep, dir);
    for (const char* f : {"report.json", "timings.json", "summary.txt", "bichar_cases.csv"})
        CHECK(fs::exists(dir / f));
    std::ifstream in(dir / "report.json");
    const Json j = Json::parse(in);
    CHECK(j["experiment"].get<std::string>() == "bichar");
    fs::remove_all(dir);
}

TEST_CASE("packet snapshots are emitted on request") {
    const char* text = "experiment: wp-build\npacket: model\nlambda: [-16]\nprofile: {x1: 0.36787944117144233}\n"
                       "regularity: false\nsnapshots: true\ntimes: [0, {scale: 0.1, power: 0}]\n";
    const auto rep = run_experiment(parse_config_text(text));
    REQUIRE(!rep.error);
    int found = 0;
    for (const Table& t : rep.tables) {
        if (t.name.rfind("snapshot_", 0) != 0) continue;
        ++found;
        CHECK(t.columns == std::vector<std::string>{"y", "x", "re", "im"});
        CHECK(!t.rows.empty());
    }
    CHECK(found == 2);
}

TEST_CASE("lab CLI exit codes") {
    const fs::path dir = fs::temp_directory_path() / "lab-unit-cli";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "ok.cfg") << kBichar;
        std::ofstream(dir / "bad.cfg") << "experiment: bichar\nhorizon: [1\n";
    }
    const std::string lab = LAB_BINARY;
    auto run = [&](const std::string& args) {
        const int rc = std::system((lab + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    const std::string out = " --out " + (dir / "out").string();
    CHECK(run("bichar --config " + (dir / "ok.cfg").string() + out) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(run("bichar --config " + (dir / "ok.cfg").string() + out + " --set tolerances.closed_form_rel=1e-30") == 2);
    CHECK(run("bichar --config " + (dir / "bad.cfg").string() + out) == 3);
    CHECK(run("exponents --config " + (dir / "ok.cfg").string() + out) == 3);
    CHECK(run("bichar --config " + (dir / "missing.cfg").string()) == 3);
    CHECK(run("bichar --config " + (dir / "ok.cfg").string() + " --jobs 0") == 3);
    fs::remove_all(dir);
}

} // TEST_SUITE
