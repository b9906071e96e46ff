#include <random>

#include "common.hpp"
#include "dlab/bichar.hpp"
#include "dlab/error.hpp"

namespace dlab::harness {

void run_bichar(Ctx& c) {
    const Json& cases = c.v["cases"];
    const double rel_tol = c.v["rel_tol"], horizon = c.v["horizon"];
    struct Out {
        Json row;
        Table traj;
        double err = 0.0, drift = 0.0;
    };
    const int n = static_cast<int>(cases.size());
    auto outs = sweep<Out>(n, c.jobs, [&](int i) {
        const Json& k = cases[i];
        DegenerateSymbol sym{k["A"], k["n"], k["m"]};
        BicharState s0{k["X0"], k["Xi0"], 0.0};
        const double tau2 = doubling_time(sym, s0);
        const BicharTrajectory tr = integrate_bichar(sym, s0, horizon * tau2, rel_tol);
        const double inv0 = std::pow(s0.X, sym.n) * std::pow(s0.Xi, sym.m);
        Out o;
        o.traj = {"trajectory_case" + std::to_string(i), {"t", "X", "Xi", "Xi_closed_form"}, {}};
        for (const auto& s : tr.states) {
            const double xc = xi_closed_form(sym, s0, s.t);
            o.err = std::max(o.err, std::abs(s.Xi - xc) / std::abs(xc));
            o.drift = std::max(o.drift, std::abs(std::pow(s.X, sym.n) * std::pow(s.Xi, sym.m) / inv0 - 1.0));
            o.traj.rows.push_back({s.t, s.X, s.Xi, xc});
        }
        o.row = Json{{"A", sym.A},        {"n", sym.n},       {"m", sym.m},
                     {"X0", s0.X},        {"Xi0", s0.Xi},     {"tau2", tau2},
                     {"t_end", horizon * tau2}, {"steps", tr.states.size() - 1},
                     {"blowup", tr.blowup}, {"xi_end_ratio", tr.states.back().Xi / s0.Xi},
                     {"max_rel_error", o.err}, {"invariant_drift", o.drift}};
        return o;
    });
    Json rows = Json::array();
    Table summary{"bichar_cases", {"A", "n", "m", "X0", "Xi0", "tau2", "max_rel_error", "invariant_drift"}, {}};
    for (int i = 0; i < n; ++i) {
        const Json& r = outs[i].row;
        rows.push_back(r);
        summary.rows.push_back({r["A"], r["n"], r["m"].get<double>(), r["X0"], r["Xi0"], r["tau2"], outs[i].err,
                                outs[i].drift});
        const std::string tag = "case " + std::to_string(i) + " (m=" + std::to_string(r["m"].get<int>()) +
                                ", n=" + fmt_lambda(r["n"]) + ")";
        c.rep.checks.push_back(check_at_most(tag + " closed-form max rel error", outs[i].err, c.tol("closed_form_rel")));
        c.rep.checks.push_back(check_at_most(tag + " X^n Xi^m drift", outs[i].drift, c.tol("invariant_drift")));
        if (c.v["trajectory_csv"].get<bool>()) c.rep.tables.push_back(outs[i].traj);
    }
    c.rep.tables.insert(c.rep.tables.begin(), summary);
    c.rep.results["cases"] = rows;
}

void run_exponents(Ctx& c) {
    Json out = Json::object();
    Table t{"exponents", {"equation", "alpha1", "beta1", "sigma_c", "s_c"}, {}};
    auto record = [&](const std::string& eq, const Json& k, Exponents e, double beta1) {
        const std::string tag = eq + " alpha1=" + fmt_lambda(k["alpha1"]) +
                                (eq == "schrodinger" ? " beta1=" + fmt_lambda(beta1) : std::string());
        out[eq].push_back(Json{{"alpha1", k["alpha1"]}, {"beta1", beta1}, {"sigma_c", e.sigma_c}, {"s_c", e.s_c}});
        t.rows.push_back({eq == "schrodinger" ? 0.0 : 1.0, k["alpha1"], beta1, e.sigma_c, static_cast<double>(e.s_c)});
        if (k.contains("expect_sigma_c")) c.rep.checks.push_back(check_equal(tag + " sigma_c", e.sigma_c, k["expect_sigma_c"]));
        if (k.contains("expect_s_c"))
            c.rep.checks.push_back(check_equal(tag + " s_c", e.s_c, k["expect_s_c"].get<double>()));
    };
    if (c.v.contains("schrodinger"))
        for (const auto& k : c.v["schrodinger"]) {
            SchrodingerSpec s;
            s.alpha1 = k["alpha1"];
            s.beta1 = k["beta1"];
            record("schrodinger", k, schrodinger_exponents(s), s.beta1);
        }
    if (c.v.contains("kdv"))
        for (const auto& k : c.v["kdv"]) {
            KdvSpec s;
            s.alpha1 = k["alpha1"];
            record("kdv", k, kdv_exponents(s), 0.0);
        }
    c.rep.results = out;
    c.rep.tables.push_back(t);
    c.rep.notes.push_back("exponents table column 'equation': 0 = Schrödinger, 1 = KdV");
}

namespace {

Json verdict_json(const TmVerdict& v) {
    Json j{{"bounded", v.bounded},
           {"supremum_estimate", std::isfinite(v.supremum_estimate) ? Json(v.supremum_estimate) : Json("inf")},
           {"witness", v.witness}};
    if (v.divergence_rate) j["divergence_rate"] = *v.divergence_rate;
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

TmKind tm_kind(const std::string& s) {
    if (s == "kdv") return TmKind::kdv;
    if (s == "schrodinger_signed") return TmKind::schrodinger_signed;
    return TmKind::schrodinger;
}

VectorFieldND ray_field(const Json& r) {
    const int d = r["dim"];
    require(d >= 1 && d <= 3, "rays.dim must be 1, 2 or 3");
    const std::string kind = r["field"];
    if (kind == "zero") return zero_vector_field(d);
    std::vector<cplx> amp(d, 0.0);
    if (r.contains("amplitude")) {
        require(r["amplitude"].size() == static_cast<std::size_t>(d), "rays.amplitude needs dim entries");
        for (int j = 0; j < d; ++j) amp[j] = r["amplitude"][j].get<double>();
    } else {
        amp[0] = 1.0;
    }
    if (kind == "constant") return constant_vector_field(amp);
    std::vector<double> center(d, 0.0);
    if (r.contains("center")) {
        require(r["center"].size() == static_cast<std::size_t>(d), "rays.center needs dim entries");
        for (int j = 0; j < d; ++j) center[j] = r["center"][j];
    }
    return bump_vector_field(amp, center, r["radius"]);
}

} // namespace

void run_tm_check(Ctx& c) {
    const std::string mode = c.v["mode"];
    if (mode == "coefficients") {
        const Json& k = c.v["coefficients"];
        CoefficientField1D f{field_from_json(k["a"]), field_from_json(k["b"]), k["lo"], k["hi"], k["degenerate"]};
        const int nodes = k["nodes"];
        const TmKind kind = tm_kind(k["kind"]);
        const TmVerdict v = tm_supremum_1d(f, kind, *make_uniform_grid(f.lo, f.hi, nodes), k["threshold"]);
        const TmVerdict r = tm_supremum_1d(f, kind, *make_uniform_grid(f.lo, f.hi, 2 * nodes - 1), k["threshold"]);
        c.rep.results["verdict"] = verdict_json(v);
        c.rep.results["refined_verdict"] = verdict_json(r);
        if (k.contains("expect_bounded"))
            c.rep.checks.push_back(check_equal("bounded verdict", v.bounded ? 1.0 : 0.0, k["expect_bounded"] ? 1.0 : 0.0));
        c.rep.checks.push_back(check_equal("verdict stable under refinement", v.bounded == r.bounded ? 1.0 : 0.0, 1.0));
        return;
    }
    if (mode == "rays") {
        const Json& r = c.v["rays"];
        const VectorFieldND b = ray_field(r);
        const int d = b.d;
        auto samples = ray_lattice(d, r["half_width"], r["points_per_dim"], r["directions"], r["T"]);
        std::mt19937_64 rng(c.v["seed"].get<std::uint64_t>());
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::normal_distribution<double> gauss;
        const double hw = r["half_width"];
        for (int k = 0; k < r["random_rays"].get<int>(); ++k) {
            RayConditionSample s;
            s.T = r["T"];
            double nrm = 0.0;
            for (int j = 0; j < d; ++j) {
                s.x.push_back(hw * unif(rng));
                s.omega.push_back(gauss(rng));
                nrm += s.omega.back() * s.omega.back();
            }
            for (auto& w : s.omega) w /= std::sqrt(nrm);
            samples.push_back(s);
        }
        const TmVerdict v = tm_ray_supremum_nd(b, samples, r["threshold"]);
        c.rep.results["verdict"] = verdict_json(v);
        c.rep.results["rays"] = samples.size();
        if (r.contains("expect_bounded"))
            c.rep.checks.push_back(check_equal("bounded verdict", v.bounded ? 1.0 : 0.0, r["expect_bounded"] ? 1.0 : 0.0));
        return;
    }
    // degenerate family a = x^2, b = 3(σ-σ_c)x (or the KdV analogue) against the analytic verdict
    const Json& fam = c.v["family"];
    const bool kdv = fam["equation"] == "kdv";
    SchrodingerSpec ss;
    KdvSpec ks;
    if (fam.contains("alpha1")) ss.alpha1 = ks.alpha1 = fam["alpha1"];
    if (fam.contains("beta1")) ss.beta1 = fam["beta1"];
    const double sc = kdv ? ks.sigma_c() : ss.sigma_c();
    const auto eps = fam["eps_list"].get<std::vector<double>>();
    const auto offsets = fam["sigma_offsets"].get<std::vector<double>>();
    auto outs = sweep<std::pair<TmVerdict, TmVerdict>>(static_cast<int>(offsets.size()), c.jobs, [&](int i) {
        const double sigma = sc + offsets[i];
        TmVerdict a = kdv ? tm_verdict_degenerate(ks, sigma) : tm_verdict_degenerate(ss, sigma);
        TmVerdict g = tm_degenerate_scan(offsets[i], kdv, eps, fam["nodes_per_decade"]);
        return std::make_pair(a, g);
    });
    Json rows = Json::array();
    Table t{"tm_family", {"sigma", "analytic_bounded", "grid_bounded", "analytic_rate", "grid_rate"}, {}};
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double sigma = sc + offsets[i];
        const auto& [a, g] = outs[i];
        rows.push_back(Json{{"sigma", sigma}, {"analytic", verdict_json(a)}, {"grid", verdict_json(g)}});
        t.rows.push_back({sigma, a.bounded ? 1.0 : 0.0, g.bounded ? 1.0 : 0.0, a.divergence_rate.value_or(0.0),
                          g.divergence_rate.value_or(0.0)});
        const std::string tag = "sigma = sigma_c " + std::string(offsets[i] >= 0 ? "+ " : "- ") +
                                fmt_lambda(std::abs(offsets[i]));
        c.rep.checks.push_back(check_equal(tag + ": grid verdict matches analytic", g.bounded ? 1.0 : 0.0,
                                           a.bounded ? 1.0 : 0.0));
        if (a.divergence_rate && g.divergence_rate)
            c.rep.checks.push_back(check_rel(tag + ": divergence rate", *g.divergence_rate, *a.divergence_rate,
                                             c.tol("slope_rel")));
    }
    c.rep.results["sigma_c"] = sc;
    c.rep.results["family"] = rows;
    c.rep.tables.push_back(t);
}

void run_tm_packet(Ctx& c) {
    const double lambda = c.v["lambda"], x0 = c.v["x0"], t = c.v["t"];
    const Field1D b = field_from_json(c.v["b"]);
    const auto mus = c.v["mu_list"].get<std::vector<double>>();
    const int npw = c.v["nodes_per_wavelength"];
    const TmResidualMode mode = c.v["mode"] == "direct" ? TmResidualMode::direct : TmResidualMode::conjugated;
    const auto norm_times = c.v["norm_times"].get<std::vector<double>>();
    struct Out {
        double residual = 0.0, norm_dev = 0.0;
    };
    auto outs = sweep<Out>(static_cast<int>(mus.size()), c.jobs, [&](int i) {
        TmPacketParams p{lambda, mus[i], {x0}, {1.0}};
        TmPacket1D pk(p, b);
        Out o;
        o.residual = tm_residual(pk, b, mode, t, *tm_packet_grid(p, t, npw));
        for (double tn : norm_times) {
            auto g = tm_packet_grid(p, tn, npw);
            GridField f{g, std::vector<cplx>(g->size()), "core"};
            for (std::size_t k = 0; k < g->size(); ++k) f.values[k] = pk.core(tn, g->x[k]).v;
            o.norm_dev = std::max(o.norm_dev, std::abs(weighted_norm(f, WeightSpec::trivial()) - 1.0));
        }
        return o;
    });
    Table tab{"tm_packet_residual", {"mu", "residual", "residual_over_mu2", "core_norm_deviation"}, {}};
    std::vector<double> res;
    double dev = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        res.push_back(outs[i].residual);
        dev = std::max(dev, outs[i].norm_dev);
        tab.rows.push_back({mus[i], outs[i].residual, outs[i].residual / (mus[i] * mus[i]), outs[i].norm_dev});
    }
    c.rep.tables.push_back(tab);
    if (mus.size() >= 2) {
        const double slope = loglog_slope(mus, res);
        c.rep.results["mu_slope"] = slope;
        Check ch = check_in("residual log-log slope in mu", slope, c.tol("slope_lo"), c.tol("slope_hi"));
        ch.predicted = 2.0;
        ch.rel_error = std::abs(slope - 2.0) / 2.0;
        c.rep.checks.push_back(ch);
    }
    c.rep.results["max_core_norm_deviation"] = dev;
    c.rep.checks.push_back(check_at_most("| ||v(t)|| - 1 | over norm_times", dev, c.tol("unit_norm")));
}

} // namespace dlab::harness
