#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/harness.hpp"

namespace dlab {

namespace {

std::string num(double v) {
    char buf[40];
    if (v == 0.0) v = 0.0;
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    if (v == 0.0) v = 0.0; // no "-0"
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + p.string());
    out << text;
}

} // namespace

Check check_at_most(std::string name, double value, double bound) {
    return {std::move(name), value, std::nullopt, std::nullopt, Json{{"op", "<="}, {"bound", bound}, {"on", "value"}},
            value <= bound};
}

Check check_at_least(std::string name, double value, double bound) {
    return {std::move(name), value, std::nullopt, std::nullopt, Json{{"op", ">="}, {"bound", bound}, {"on", "value"}},
            value >= bound};
}

Check check_in(std::string name, double value, double lo, double hi) {
    return {std::move(name), value, std::nullopt, std::nullopt,
            Json{{"op", "in"}, {"lo", lo}, {"hi", hi}, {"on", "value"}}, value >= lo && value <= hi};
}

Check check_rel(std::string name, double value, double predicted, double rel_tol) {
    const double rel = std::abs(value - predicted) / std::abs(predicted);
    return {std::move(name), value, predicted, rel, Json{{"op", "<="}, {"bound", rel_tol}, {"on", "rel_error"}},
            rel <= rel_tol};
}

Check check_abs(std::string name, double value, double predicted, double abs_tol) {
    const double err = std::abs(value - predicted);
    return {std::move(name), value, predicted, std::nullopt,
            Json{{"op", "<="}, {"bound", abs_tol}, {"on", "abs_error"}}, err <= abs_tol};
}

Check check_equal(std::string name, double value, double expected) {
    return {std::move(name), value, expected, std::nullopt, Json{{"op", "=="}, {"on", "value"}}, value == expected};
}

bool ExperimentReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

int ExperimentReport::exit_code() const {
    if (error) return 3;
    return all_pass() ? 0 : 2;
}

Json ExperimentReport::to_json() const {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["experiment"] = experiment;
    j["status"] = error ? "error" : (all_pass() ? "pass" : "fail");
    if (error) j["error"] = *error;
    j["config"] = config;
    j["results"] = results;
    Json cs = Json::array();
    for (const auto& c : checks) {
        Json e;
        e["name"] = c.name;
        e["value"] = finite_or_null(c.value);
        if (c.predicted) e["predicted"] = finite_or_null(*c.predicted);
        if (c.rel_error) e["rel_error"] = finite_or_null(*c.rel_error);
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        cs.push_back(e);
    }
    j["checks"] = cs;
    Json ts = Json::array();
    for (const auto& t : tables) ts.push_back(Json{{"name", t.name}, {"file", t.name + ".csv"}, {"rows", t.rows.size()}});
    j["tables"] = ts;
    j["notes"] = notes;
    return j;
}

std::string table_csv(const Table& t) {
    std::ostringstream out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << t.columns[j];
    out << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << num(r[j]);
        out << '\n';
    }
    return out.str();
}

std::string summary_text(const ExperimentReport& r) {
    std::ostringstream out;
    const int code = r.exit_code();
    out << "experiment " << r.experiment << ": " << (code == 0 ? "PASS" : code == 2 ? "FAIL" : "ERROR") << '\n';
    if (r.error) out << "error: " << *r.error << '\n';
    for (const auto& c : r.checks) {
        out << (c.pass ? "  pass  " : "  FAIL  ") << c.name << "  value=" << short_num(c.value);
        if (c.predicted) out << "  predicted=" << short_num(*c.predicted);
        if (c.rel_error) out << "  rel_error=" << short_num(*c.rel_error);
        const std::string op = c.tolerance.value("op", "");
        if (op == "in") {
            out << "  tolerance " << c.tolerance.value("on", "value") << " in [" << short_num(c.tolerance["lo"])
                << ", " << short_num(c.tolerance["hi"]) << "]";
        } else if (c.tolerance.contains("bound")) {
            out << "  tolerance " << c.tolerance.value("on", "value") << " " << op << " "
                << short_num(c.tolerance["bound"]);
        }
        out << '\n';
    }
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    return out.str();
}

void emit_report(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", r.to_json().dump(2) + "\n");
    Json tj = Json::object();
    for (const auto& [k, v] : r.timings) tj[k] = v;
    write_file(dir / "timings.json", tj.dump(2) + "\n");
    write_file(dir / "summary.txt", summary_text(r));
    for (const auto& t : r.tables) write_file(dir / (t.name + ".csv"), table_csv(t));
}

} // namespace dlab
