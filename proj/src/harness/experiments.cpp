#include <functional>
#include <map>

#include "common.hpp"
#include "dlab/error.hpp"

namespace dlab {

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    using Runner = std::function<void(harness::Ctx&)>;
    static const std::map<std::string, Runner> runners{
        {"bichar", harness::run_bichar},         {"exponents", harness::run_exponents},
        {"tm-check", harness::run_tm_check},     {"tm-packet", harness::run_tm_packet},
        {"wp-build", harness::run_wp_build},     {"wp-residual", harness::run_wp_residual},
        {"degenerate", harness::run_degenerate}, {"kdv-suite", harness::run_kdv_suite},
        {"inflate", harness::run_inflate},       {"hm-rates", harness::run_hm_rates},
        {"tm-lowerbound", harness::run_tm_lowerbound}};

    ExperimentReport rep;
    rep.experiment = cfg.experiment;
    rep.config = cfg.values;
    harness::Stopwatch clock;
    try {
        const auto it = runners.find(cfg.experiment);
        if (it == runners.end()) fail(ErrorKind::SchemaError, "unknown experiment '" + cfg.experiment + "'");
        harness::Ctx ctx{cfg, cfg.values, rep, std::max(1, opt.jobs)};
        it->second(ctx);
    } catch (const LabError& e) {
        rep.error = e.what();
    } catch (const std::exception& e) {
        rep.error = std::string("InternalError: ") + e.what();
    }
    rep.timings["total_seconds"] = clock.seconds();
    return rep;
}

} // namespace dlab
