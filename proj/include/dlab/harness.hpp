#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dlab {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
    std::string experiment;
    // validated values with defaults filled in; echoed verbatim into the report
    Json values;
    // directory that relative file references are resolved against
    std::filesystem::path base_dir;
};

// `overrides` are "dotted.path=value" strings applied before validation; values are parsed as YAML scalars.
// Schema problems raise LabError(SchemaError) with the field path and the source line.
ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".",
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct Check {
    std::string name;
    double value = 0.0;
    std::optional<double> predicted;
    std::optional<double> rel_error;
    // {"op": "<=" | ">=" | "in", "bound" | "lo","hi": ..., "on": "value" | "rel_error" | "abs_error"}
    Json tolerance;
    bool pass = false;
};

Check check_at_most(std::string name, double value, double bound);
Check check_at_least(std::string name, double value, double bound);
Check check_in(std::string name, double value, double lo, double hi);
// relative error |value - predicted| / |predicted| <= rel_tol
Check check_rel(std::string name, double value, double predicted, double rel_tol);
// absolute error |value - predicted| <= abs_tol (used when the predicted value is 0)
Check check_abs(std::string name, double value, double predicted, double abs_tol);
Check check_equal(std::string name, double value, double expected);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string experiment;
    Json config;
    Json results = Json::object();
    std::vector<Table> tables;
    std::vector<Check> checks;
    std::vector<std::string> notes;
    std::map<std::string, double> timings;
    std::optional<std::string> error;

    bool all_pass() const;
    // 0 all pass, 2 tolerance failure, 3 runtime error
    int exit_code() const;
    Json to_json() const;
};

struct RunOptions {
    int jobs = 1;
};

// never throws for experiment failures: runtime errors are recorded in `error`
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// writes report.json, timings.json, summary.txt and one CSV per table into `dir`
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);
std::string summary_text(const ExperimentReport& report);
std::string table_csv(const Table& table);

} // namespace dlab
