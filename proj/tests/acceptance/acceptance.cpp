// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is nonzero if any criterion fails.
// Each criterion runs the shipped config in-process and then re-applies the acceptance thresholds to the
// reported values directly, so loosening a tolerance in a config cannot make a criterion pass.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "dlab/background.hpp"
#include "dlab/harness.hpp"
#include "dlab/models.hpp"

namespace fs = std::filesystem;
using namespace dlab;

namespace {

const fs::path kConfigDir = fs::path(LAB_SOURCE_DIR) / "configs";

struct Outcome {
    bool pass = true;
    std::vector<std::string> why;
    std::vector<std::string> info;

    void require(bool ok, const std::string& msg) {
        if (!ok) {
            pass = false;
            why.push_back(msg);
        }
    }
};

std::map<std::string, ExperimentReport> g_reports;

// serial runs are cached so the golden comparison reuses them
const ExperimentReport& run_config(const std::string& stem) {
    auto it = g_reports.find(stem);
    if (it != g_reports.end()) return it->second;
    ExperimentReport rep = run_experiment(parse_config(kConfigDir / (stem + ".cfg")), {1});
    return g_reports.emplace(stem, std::move(rep)).first->second;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Every check whose name contains `needle`; at least `min_count` must exist and all must satisfy `ok`.
void require_checks(Outcome& o, const ExperimentReport& rep, const std::string& needle, std::size_t min_count,
                    const std::function<bool(const Check&)>& ok, const std::string& what) {
    std::size_t n = 0;
    for (const Check& c : rep.checks) {
        if (c.name.find(needle) == std::string::npos) continue;
        ++n;
        o.require(ok(c), rep.experiment + ": " + c.name + " = " + num(c.value) + " violates " + what);
    }
    o.require(n >= min_count, rep.experiment + ": expected at least " + std::to_string(min_count) +
                                  " checks matching '" + needle + "', found " + std::to_string(n));
}

void require_clean(Outcome& o, const ExperimentReport& rep) {
    if (rep.error) o.require(false, rep.experiment + ": " + *rep.error);
    for (const Check& c : rep.checks) o.require(c.pass, rep.experiment + ": check failed: " + c.name);
}

double rel(const Check& c) { return std::abs(c.value - *c.predicted) / std::abs(*c.predicted); }

Outcome crit_bichar() {
    Outcome o;
    const auto& rep = run_config("bichar");
    require_clean(o, rep);
    require_checks(o, rep, "closed-form max rel error", 4, [](const Check& c) { return c.value < 1e-6; }, "< 1e-6");
    require_checks(o, rep, "X^n Xi^m drift", 4, [](const Check& c) { return c.value < 1e-9; }, "< 1e-9");
    return o;
}

Outcome crit_exponents() {
    Outcome o;
    const Exponents a = schrodinger_exponents(SchrodingerSpec{1.0, 1.0});
    const Exponents b = schrodinger_exponents(SchrodingerSpec{0.0, 1.0});
    const Exponents k = kdv_exponents(KdvSpec{3.0});
    o.require(a.sigma_c == -0.5 && a.s_c == 2, "schrodinger(1,1) = (" + num(a.sigma_c) + ", " + std::to_string(a.s_c) + ")");
    o.require(b.sigma_c == 0.0 && b.s_c == 2, "schrodinger(0,1) = (" + num(b.sigma_c) + ", " + std::to_string(b.s_c) + ")");
    o.require(k.sigma_c == -1.5 && k.s_c == 5, "kdv(3) = (" + num(k.sigma_c) + ", " + std::to_string(k.s_c) + ")");
    require_clean(o, run_config("exponents"));
    return o;
}

Outcome crit_backgrounds() {
    Outcome o;
    constexpr int n = 100;

    const SchrodingerSpec sspec{1.0, 1.0};
    const auto ds = ds_linear_background(sspec, 1.0);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double t = i / double(n - 1);
            const double x = -1.0 + 2.0 * j / double(n - 1);
            worst = std::max(worst, std::abs(schrodinger_background_residual(*ds, sspec, t, x)));
        }
    o.require(worst < 1e-12, "ds_linear residual " + num(worst));
    o.info.push_back("ds_linear max |residual| " + num(worst));

    const KdvSpec kspec{3.0, 0.0};
    const double x1 = 0.5, x_cut = 0.475;
    const auto kb = kdv_cubic_background(kspec.alpha1, 1.0, x1, x_cut);
    worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double t = i / double(n - 1);
            const double x = x_cut * (j + 1) / double(n);
            worst = std::max(worst, std::abs(kdv_background_residual(*kb, kspec, t, x)));
        }
    o.require(worst < 1e-11, "kdv_cubic core residual " + num(worst));
    o.info.push_back("kdv_cubic core max |residual| " + num(worst));

    // beta from an independent adaptive integration of its ODE
    using namespace boost::numeric::odeint;
    double beta = 1.0, worst_beta = 0.0;
    const double alpha1 = kspec.alpha1;
    auto rhs = [&](const double& b, double& db, double) { db = kdv_beta_rhs(alpha1, b); };
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) times[i] = i / double(n - 1);
    integrate_times(make_dense_output(1e-14, 1e-14, runge_kutta_dopri5<double>()), rhs, beta, times.begin(),
                    times.end(), 1e-3, [&](const double& b, double t) {
                        worst_beta = std::max(worst_beta, std::abs(b - kdv_beta(alpha1, 1.0, t)) / std::abs(b));
                    });
    o.require(worst_beta < 1e-10, "kdv_beta vs ODE " + num(worst_beta));
    o.info.push_back("kdv_beta max rel error vs ODE " + num(worst_beta));
    return o;
}

Outcome crit_model_residual() {
    Outcome o;
    const auto& rep = run_config("model_residual");
    require_clean(o, rep);
    require_checks(o, rep, "residual max/min ratio across lambda", 3, [](const Check& c) { return c.value <= 3.0; }, "<= 3");
    return o;
}

Outcome crit_degeneration() {
    Outcome o;
    const auto& rep = run_config("model_degeneration");
    require_clean(o, rep);
    require_checks(o, rep, "lambda m64 fitted degeneration rate", 1,
                   [](const Check& c) { return c.predicted && *c.predicted == -64.0 && rel(c) <= 0.10; },
                   "within 10% of -64");
    return o;
}

Outcome crit_inflation() {
    Outcome o;
    const auto& rep = run_config("ds_inflation");
    require_clean(o, rep);
    require_checks(o, rep, "lambda m32 direct L2 growth rate", 1, [](const Check& c) { return c.value >= 0.8 * 32; },
                   ">= 0.8|lambda|");
    require_checks(o, rep, "lambda m32 lower-bound rate vs direct rate", 1,
                   [](const Check& c) { return c.predicted && rel(c) <= 0.25; }, "within 25% of the direct rate");
    require_checks(o, rep, "lambda m32 pairing drift / generalized-energy bound", 1,
                   [](const Check& c) { return c.value <= 1.05; }, "<= bound (5% slack)");
    return o;
}

Outcome crit_hm() {
    Outcome o;
    const auto& rep = run_config("hm_rates");
    require_clean(o, rep);
    require_checks(o, rep, "lambda m16 m=1 rate", 2, [](const Check& c) {
        if (c.name.find("minus") != std::string::npos) return c.value > 0.0;
        return c.predicted && *c.predicted == 48.0 && rel(c) <= 0.25;
    }, "within 25% of 3|lambda| and above the m=0 rate");
    return o;
}

Outcome crit_ds_linear() {
    Outcome o;
    const auto& build = run_config("ds_linear_build");
    require_clean(o, build);
    require_checks(o, build, "general vs model packet at t=0", 4, [](const Check& c) { return c.value <= 1e-10; },
                   "<= 1e-10");
    const auto& res = run_config("ds_linear_residual");
    require_clean(o, res);
    require_checks(o, res, "residual max/min ratio across lambda", 2, [](const Check& c) { return c.value <= 3.0; },
                   "<= 3");
    require_checks(o, res, "correction ablation log-log slope", 1,
                   [](const Check& c) { return std::abs(c.value - 1.0) <= 0.2; }, "slope 1 +- 0.2");
    return o;
}

Outcome crit_kdv() {
    Outcome o;
    const auto& rep = run_config("kdv_suite");
    require_clean(o, rep);
    require_checks(o, rep, "residual/(lambda(1+lambda^2 t)) ratio", 2, [](const Check& c) { return c.value <= 3.0; },
                   "<= 3");
    require_checks(o, rep, "case 0 fitted degeneration rate", 3,
                   [](const Check& c) { return c.predicted && *c.predicted < 0.0 && rel(c) <= 0.15; }, "within 15%");
    require_checks(o, rep, "(vanishing exponent)", 3, [](const Check& c) {
        return c.predicted && *c.predicted == 0.0 && c.tolerance.contains("bound") &&
               std::abs(c.value) <= c.tolerance["bound"].get<double>();
    }, "|rate| <= 15% of the unit rate");
    require_checks(o, rep, "support / envelope", 3, [](const Check& c) { return c.value <= 1.05; }, "<= 1.05");
    return o;
}

Outcome crit_tm() {
    Outcome o;
    const auto& fam = run_config("tm_family");
    require_clean(o, fam);
    require_checks(o, fam, "grid verdict matches analytic", 3, [](const Check& c) { return c.pass; }, "agreement");
    const auto& pk = run_config("tm_packet");
    require_clean(o, pk);
    require_checks(o, pk, "residual log-log slope in mu", 1,
                   [](const Check& c) { return c.value >= 1.6 && c.value <= 2.4; }, "[1.6, 2.4]");
    const auto& lb = run_config("tm_lowerbound");
    require_clean(o, lb);
    require_checks(o, lb, "re_b_nonneg lambda 64 min ||u(t)||/(||u0|| M", 1, [](const Check& c) { return c.value >= 0.45; },
                   ">= 0.45");
    return o;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> shipped_configs() {
    std::vector<std::string> stems;
    for (const auto& e : fs::directory_iterator(kConfigDir))
        if (e.path().extension() == ".cfg") stems.push_back(e.path().stem().string());
    std::sort(stems.begin(), stems.end());
    return stems;
}

Outcome crit_golden() {
    Outcome o;
    const fs::path tmp = fs::temp_directory_path() / ("lab-acceptance-" + std::to_string(::getpid()));
    for (const std::string& stem : shipped_configs()) {
        const fs::path golden = kConfigDir / "golden" / stem;
        if (!fs::is_directory(golden)) {
            o.require(false, stem + ": no golden report");
            continue;
        }
        const ExperimentReport& rep = run_config(stem);
        const fs::path out = tmp / stem;
        emit_report(rep, out);
        std::set<std::string> produced, expected;
        for (const auto& e : fs::directory_iterator(out)) produced.insert(e.path().filename().string());
        for (const auto& e : fs::directory_iterator(golden)) expected.insert(e.path().filename().string());
        produced.erase("timings.json");
        expected.erase("timings.json");
        o.require(produced == expected, stem + ": output file set differs from golden");
        for (const std::string& f : expected)
            if (produced.count(f)) o.require(read_file(out / f) == read_file(golden / f), stem + ": " + f + " differs from golden");

        const std::string serial = rep.to_json().dump();
        const ExperimentReport par = run_experiment(parse_config(kConfigDir / (stem + ".cfg")), {2});
        o.require(par.to_json().dump() == serial, stem + ": jobs=2 report differs from jobs=1");
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"bicharacteristic oracle", crit_bichar},
        {"exponent table", crit_exponents},
        {"exact backgrounds", crit_backgrounds},
        {"model-packet residual lambda-uniformity", crit_model_residual},
        {"model degeneration rate", crit_degeneration},
        {"norm inflation", crit_inflation},
        {"H^m rates", crit_hm},
        {"Schrodinger general-packet consistency", crit_ds_linear},
        {"KdV suite", crit_kdv},
        {"Takeuchi-Mizohata", crit_tm},
        {"determinism and golden files", crit_golden},
    };
    // runtime limits in seconds; 0 means none
    const std::map<int, double> limits{{1, 1.0}, {4, 30.0}, {6, 120.0}, {9, 120.0}, {10, 120.0}};

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (auto it = limits.find(id); it != limits.end())
            o.require(secs < it->second, "runtime " + num(secs) + " s exceeds " + num(it->second) + " s");
        std::printf("[%s] %2d %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs);
        for (const std::string& w : o.info) std::printf("       %s\n", w.c_str());
        for (const std::string& w : o.why) std::printf("       %s\n", w.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
