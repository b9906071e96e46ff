// lab <experiment> --config FILE [--jobs N] [--out DIR] [--set key=value]...
// Exit codes: 0 all checks pass, 2 a tolerance check failed, 3 config or runtime error.
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dlab/error.hpp"
#include "dlab/harness.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for degenerate dispersive equations"};
    app.require_subcommand(1);

    std::string config, out;
    int jobs = 1;
    std::vector<std::string> overrides;
    for (const auto& name : dlab::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--jobs", jobs, "parallel workers for parameter sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory (default $LAB_DATA_DIR/<config stem> or ./lab-out/<stem>)");
        sub->add_option("--set", overrides, "override a config value, e.g. tolerances.ratio=4");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    dlab::ExperimentConfig cfg;
    try {
        cfg = dlab::parse_config(config, overrides);
    } catch (const dlab::LabError& e) {
        std::cerr << config << ": " << e.what() << '\n';
        return 3;
    }
    if (cfg.experiment != sub) {
        std::cerr << config << ": config is for experiment '" << cfg.experiment << "', not '" << sub << "'\n";
        return 3;
    }

    fs::path dir;
    if (!out.empty()) {
        dir = out;
    } else if (const char* base = std::getenv("LAB_DATA_DIR"); base && *base) {
        dir = fs::path(base) / fs::path(config).stem();
    } else {
        dir = fs::path("lab-out") / fs::path(config).stem();
    }

    const dlab::ExperimentReport rep = dlab::run_experiment(cfg, {jobs});
    try {
        dlab::emit_report(rep, dir);
    } catch (const std::exception& e) {
        std::cerr << "cannot write report to " << dir << ": " << e.what() << '\n';
        return 3;
    }
    std::cout << dlab::summary_text(rep) << "report: " << (dir / "report.json").string() << '\n';
    return rep.exit_code();
}
