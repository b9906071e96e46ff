#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <algorithm>

#include <tbb/parallel_for.h>
#include <tbb/info.h>
#include <tbb/task_arena.h>

#include "dlab/background.hpp"
#include "dlab/harness.hpp"
#include "dlab/models.hpp"
#include "dlab/packets.hpp"
#include "dlab/tm.hpp"

namespace dlab::harness {

struct Ctx {
    const ExperimentConfig& cfg;
    const Json& v;
    ExperimentReport& rep;
    int jobs = 1;

    double tol(const std::string& key) const { return v.at("tolerances").at(key).get<double>(); }
};

// Runs fn(i) for i < n on `jobs` workers; results are stored by index so the merge order is fixed.
template <class R, class F>
std::vector<R> sweep(int n, int jobs, F fn) {
    std::vector<R> out(static_cast<std::size_t>(n));
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    // TBB warns when asked for more workers than cores; results do not depend on the worker count
    tbb::task_arena arena(std::min(jobs, tbb::info::default_concurrency()));
    arena.execute([&] { tbb::parallel_for(0, n, [&](int i) { out[i] = fn(i); }); });
    return out;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

cplx complex_of(const Json& j);
Json json_of(cplx z);
Field1D field_from_json(const Json& j);

SchrodingerSpec schrodinger_spec(const Json& v);
KdvSpec kdv_spec(const Json& v);
BackgroundPtr background_of(const ExperimentConfig& cfg, const SchrodingerSpec* s, const KdvSpec* k);

// g0 on (lo, hi), default (x1/2, x1), unit L² norm
BumpProfile profile_of(const Json& v, double x1);

struct PacketSetup {
    PacketPtr packet;
    BumpProfile g0{0.5, 1.0};
    double h2 = 1.0; // ||a0||_{H²} (model) or ||g0||_{H²_(x1)}
    double h3 = 1.0; // ||g0||_{H³_(x1)}
    double sigma_c = 0.0;
    SchrodingerSpec sspec;
    KdvSpec kspec;
    BackgroundPtr bg;
};

PacketSetup packet_setup(const ExperimentConfig& cfg, double lambda, PacketOptions opt);
PacketOptions packet_options(const Json& v);

// t = scale |λ|^power
double time_of(const Json& te, double lambda);

double max_min_ratio(const std::vector<double>& v);
// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string fmt_lambda(double lambda);

// columns x, re, im; y-grids get a leading y column
Table snapshot_table(const std::string& name, const GridField& f);

void run_bichar(Ctx& c);
void run_exponents(Ctx& c);
void run_tm_check(Ctx& c);
void run_tm_packet(Ctx& c);
void run_wp_build(Ctx& c);
void run_wp_residual(Ctx& c);
void run_degenerate(Ctx& c);
void run_kdv_suite(Ctx& c);
void run_inflate(Ctx& c);
void run_hm_rates(Ctx& c);
void run_tm_lowerbound(Ctx& c);

} // namespace dlab::harness
