#include <boost/numeric/odeint.hpp>

#include "common.hpp"
#include "dlab/error.hpp"

namespace dlab::harness {

namespace {

std::vector<double> lambdas(const Json& v) { return v.at("lambda").get<std::vector<double>>(); }

// |rate| of the exponent-one degeneration: 2|λ|A² (Schrödinger) or 3β̄A^{2/3}λ² (KdV)
double unit_rate(const PacketSetup& s, const std::vector<double>& times) {
    const double lam = std::abs(s.packet->lambda());
    if (s.packet->kind() != PacketKind::kdv) {
        const double A = s.bg ? s.bg->A() : 1.0;
        return 2.0 * lam * A * A;
    }
    const double xs = 0.5 * s.bg->x_exact();
    double beta = 0.0;
    for (double t : times) beta += std::cbrt(s.bg->jet(t, xs).f.c[3].real());
    beta /= static_cast<double>(times.size());
    return 3.0 * beta * std::pow(s.bg->A(), 2.0 / 3.0) * lam * lam;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
    return out;
}

double residual_normalized(const PacketSetup& s, double t, int npw) {
    const Packet& p = *s.packet;
    auto g = packet_grid(p, t, npw);
    switch (p.kind()) {
    case PacketKind::schrodinger_model:
        return residual_model(p, t, *g) / s.h2;
    case PacketKind::schrodinger_general:
        return residual_schrodinger(p, s.sspec, t, g) / s.h2;
    case PacketKind::kdv: {
        const double lam = std::abs(p.lambda());
        return residual_kdv(p, s.kspec, t, g) / (lam * (1.0 + lam * lam * t) * s.h3);
    }
    }
    return 0.0;
}

struct DegOut {
    DegenerationReport rep;
    double unit = 1.0;
};

void degeneration_checks(Ctx& c, const std::string& tag, const DegOut& d) {
    if (d.rep.predicted_rate != 0.0) {
        c.rep.checks.push_back(check_rel(tag + " fitted degeneration rate", d.rep.fitted_rate, d.rep.predicted_rate,
                                         c.tol("rel")));
    } else {
        // vanishing predicted exponent: absolute tolerance relative to the exponent-1/2 rate
        c.rep.checks.push_back(check_abs(tag + " fitted degeneration rate (vanishing exponent)", d.rep.fitted_rate,
                                         0.0, c.tol("abs_fraction") * 0.5 * d.unit));
    }
}

} // namespace

void run_wp_build(Ctx& c) {
    const auto lams = lambdas(c.v);
    const int npw = c.v["nodes_per_wavelength"];
    const Json& times = c.v["times"];
    const PacketOptions opt = packet_options(c.v);
    const bool regular = c.v["regularity"].get<bool>() && c.v["packet"] != "kdv";
    struct Out {
        std::vector<std::vector<double>> rows; // t, support, envelope, weighted norm, reg0, reg1, reg2
        double equality = -1.0;
        std::vector<GridField> snapshots;
    };
    const bool snapshots = c.v["snapshots"].get<bool>();
    auto outs = sweep<Out>(static_cast<int>(lams.size()), c.jobs, [&](int i) {
        const PacketSetup s = packet_setup(c.cfg, lams[i], opt);
        const double x1 = s.bg ? s.bg->x1() : std::exp(-1.0);
        Out o;
        for (const auto& te : times) {
            const double t = time_of(te, lams[i]);
            std::vector<double> row{t, support_right_endpoint(*s.packet, t, 1e-12, npw), support_envelope(*s.packet, t),
                                    packet_weighted_norm(*s.packet, s.sigma_c, 0.0, 2.0, t, npw) / s.g0.sobolev(0, x1)};
            for (int n = 0; n <= 2; ++n)
                row.push_back(regular ? packet_regularity_norm(*s.packet, s.sigma_c, n, t, npw) /
                                            (std::pow(std::abs(lams[i]), n) * s.g0.sobolev(n, x1))
                                      : 0.0);
            o.rows.push_back(row);
            if (snapshots) o.snapshots.push_back(packet_field(*s.packet, t, packet_grid(*s.packet, t, npw)));
        }
        if (c.v["compare_model"].get<bool>()) {
            require(s.bg && s.bg->kind() == BackgroundKind::ds_linear, "compare_model needs a ds_linear background");
            auto model = model_packet_schrodinger(lams[i], y_profile_from_g0(s.g0, s.bg, YKind::schrodinger), opt);
            auto g = packet_grid(*s.packet, 0.0, npw);
            // derivatives carry |λ|^n, so they are compared after scaling back to the size of the value
            const double lam = std::abs(lams[i]);
            double diff = 0.0;
            for (double x : g->x) {
                const PacketSample a = s.packet->eval(0.0, x), b = model->eval(0.0, x);
                diff = std::max({diff, std::abs(a.v - b.v), std::abs(a.vx - b.vx) / lam,
                                 std::abs(a.vxx - b.vxx) / (lam * lam)});
            }
            o.equality = diff;
        }
        return o;
    });
    Table t{"wp_build",
            {"lambda", "t", "support_right", "envelope", "weighted_norm_over_g0", "reg0", "reg1", "reg2"},
            {}};
    Json runs = Json::array();
    const double slack = c.tol("envelope_slack");
    for (std::size_t i = 0; i < lams.size(); ++i) {
        Json run{{"lambda", lams[i]}, {"times", Json::array()}};
        for (const auto& r : outs[i].rows) {
            t.rows.push_back({lams[i], r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
            run["times"].push_back(Json{{"t", r[0]}, {"support_right", r[1]}, {"envelope", r[2]},
                                        {"weighted_norm_over_g0", r[3]}});
            c.rep.checks.push_back(check_at_most("lambda " + fmt_lambda(lams[i]) + " t=" + fmt_lambda(r[0]) +
                                                     " support / envelope",
                                                 r[1] / r[2], slack));
        }
        for (std::size_t k = 0; k < outs[i].snapshots.size(); ++k)
            c.rep.tables.push_back(snapshot_table("snapshot_lambda_" + fmt_lambda(lams[i]) + "_t" + std::to_string(k),
                                                  outs[i].snapshots[k]));
        if (outs[i].equality >= 0.0) {
            run["model_equality_max_abs"] = outs[i].equality;
            c.rep.checks.push_back(check_at_most("lambda " + fmt_lambda(lams[i]) + " general vs model packet at t=0",
                                                 outs[i].equality, c.tol("equality")));
        }
        runs.push_back(run);
    }
    // λ-uniformity of the initial-data and regularity ratios at each requested time
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> w, r[3];
        for (std::size_t i = 0; i < lams.size(); ++i) {
            w.push_back(outs[i].rows[k][3]);
            for (int n = 0; n < 3; ++n) r[n].push_back(outs[i].rows[k][4 + n]);
        }
        const std::string tag = "time #" + std::to_string(k);
        if (lams.size() >= 2) {
            c.rep.checks.push_back(check_at_most(tag + " weighted norm max/min ratio across lambda", max_min_ratio(w),
                                                 c.tol("ratio")));
            if (regular)
                for (int n = 0; n < 3; ++n)
                    c.rep.checks.push_back(check_at_most(tag + " regularity n=" + std::to_string(n) +
                                                             " max/min ratio across lambda",
                                                         max_min_ratio(r[n]), c.tol("ratio")));
        }
    }
    c.rep.tables.push_back(t);
    c.rep.results["runs"] = runs;
}

void run_wp_residual(Ctx& c) {
    const auto lams = lambdas(c.v);
    const int npw = c.v["nodes_per_wavelength"];
    const Json& times = c.v["times"];
    const PacketOptions opt = packet_options(c.v);
    const bool ablation = c.v["ablation"].get<bool>();
    if (ablation) require(c.v["packet"] == "schrodinger", "the correction ablation applies to Schrödinger packets");
    struct Out {
        std::vector<double> t, res;
        double diff = 0.0, uncorrected = 0.0, margin = 1.0;
    };
    auto outs = sweep<Out>(static_cast<int>(lams.size()), c.jobs, [&](int i) {
        const PacketSetup s = packet_setup(c.cfg, lams[i], opt);
        Out o;
        for (const auto& te : times) {
            const double t = time_of(te, lams[i]);
            o.t.push_back(t);
            o.res.push_back(residual_normalized(s, t, npw));
            if (s.packet->kind() == PacketKind::schrodinger_general)
                o.margin = std::min(o.margin, schrodinger_validity_margin(*s.packet, t, *packet_grid(*s.packet, t, npw)));
        }
        if (ablation) {
            PacketOptions off = opt;
            off.correction = false;
            const PacketSetup u = packet_setup(c.cfg, lams[i], off);
            const double t = o.t.front();
            auto g = packet_grid(*s.packet, t, npw);
            const GridField a = residual_field_schrodinger(*s.packet, s.sspec, t, g);
            GridField b = residual_field_schrodinger(*u.packet, u.sspec, t, g);
            o.uncorrected = weighted_norm(b, WeightSpec::trivial()) / s.h2;
            for (std::size_t k = 0; k < b.values.size(); ++k) b.values[k] -= a.values[k];
            o.diff = weighted_norm(b, WeightSpec::trivial()) / s.h2;
        }
        return o;
    });
    Table t{"wp_residual", {"lambda", "t", "normalized_residual"}, {}};
    Json runs = Json::array();
    for (std::size_t i = 0; i < lams.size(); ++i) {
        Json run{{"lambda", lams[i]}, {"times", outs[i].t}, {"normalized_residual", outs[i].res}};
        if (c.v["packet"] == "schrodinger") run["validity_margin_min"] = outs[i].margin;
        if (ablation) {
            run["uncorrected_residual"] = outs[i].uncorrected;
            run["correction_difference"] = outs[i].diff;
        }
        runs.push_back(run);
        for (std::size_t k = 0; k < outs[i].t.size(); ++k) t.rows.push_back({lams[i], outs[i].t[k], outs[i].res[k]});
    }
    if (lams.size() >= 2)
        for (std::size_t k = 0; k < times.size(); ++k) {
            std::vector<double> r;
            for (const auto& o : outs) r.push_back(o.res[k]);
            c.rep.checks.push_back(check_at_most("time #" + std::to_string(k) + " residual max/min ratio across lambda",
                                                 max_min_ratio(r), c.tol("ratio")));
        }
    if (ablation && lams.size() >= 2) {
        std::vector<double> al, d;
        Table ab{"wp_ablation", {"lambda", "corrected_residual", "uncorrected_residual", "correction_difference"}, {}};
        for (std::size_t i = 0; i < lams.size(); ++i) {
            al.push_back(std::abs(lams[i]));
            d.push_back(outs[i].diff);
            ab.rows.push_back({lams[i], outs[i].res.front(), outs[i].uncorrected, outs[i].diff});
        }
        const double slope = loglog_slope(al, d);
        c.rep.results["ablation_slope"] = slope;
        c.rep.checks.push_back(check_abs("correction ablation log-log slope in |lambda|", slope,
                                         c.tol("ablation_slope"), c.tol("ablation_tol")));
        c.rep.tables.push_back(ab);
    }
    c.rep.tables.push_back(t);
    c.rep.results["runs"] = runs;
}

void run_degenerate(Ctx& c) {
    const auto lams = lambdas(c.v);
    const int npw = c.v["nodes_per_wavelength"];
    const PacketOptions opt = packet_options(c.v);
    const double gp = c.v["gamma_prime"], p = c.v["p"];
    const int s_ = c.v["s"], samples = c.v["samples"];
    auto outs = sweep<DegOut>(static_cast<int>(lams.size()), c.jobs, [&](int i) {
        const PacketSetup s = packet_setup(c.cfg, lams[i], opt);
        const auto ts = linspace(0.0, time_of(c.v["window"], lams[i]), samples);
        DegOut d;
        d.rep = degeneration_report(*s.packet, s.sigma_c, gp, p, s_, ts, npw);
        d.unit = unit_rate(s, ts);
        return d;
    });
    Table t{"degeneration", {"lambda", "t", "norm"}, {}};
    Json runs = Json::array();
    for (std::size_t i = 0; i < lams.size(); ++i) {
        const auto& r = outs[i].rep;
        for (std::size_t k = 0; k < r.times.size(); ++k) t.rows.push_back({lams[i], r.times[k], r.norms[k]});
        runs.push_back(Json{{"lambda", lams[i]},
                            {"fitted_rate", r.fitted_rate},
                            {"predicted_rate", r.predicted_rate},
                            {"r_squared", r.r_squared}});
        degeneration_checks(c, "lambda " + fmt_lambda(lams[i]), outs[i]);
    }
    c.rep.tables.push_back(t);
    c.rep.results["runs"] = runs;
}

void run_kdv_suite(Ctx& c) {
    require(c.v["packet"] == "kdv", "kdv-suite needs packet: kdv");
    const auto lams = lambdas(c.v);
    const int npw = c.v["nodes_per_wavelength"], samples = c.v["samples"];
    const PacketOptions opt = packet_options(c.v);
    Json deg_cases = c.v.value("degeneration", Json::array({Json{{"gamma_prime", 0.0}, {"p", 1.0}, {"s", 0}},
                                                           Json{{"gamma_prime", 0.0}, {"p", 2.0}, {"s", 0}}}));
    struct Out {
        double res0 = 0.0, res1 = 0.0, t1 = 0.0, support = 0.0, envelope = 1.0, norm0 = 0.0, norm1 = 0.0;
        double h1_ratio = 0.0;
        std::vector<DegOut> deg;
    };
    auto outs = sweep<Out>(static_cast<int>(lams.size()), c.jobs, [&](int i) {
        const PacketSetup s = packet_setup(c.cfg, lams[i], opt);
        const double x1 = s.bg->x1();
        Out o;
        o.t1 = std::pow(lams[i], -5.0 / 3.0);
        o.res0 = residual_normalized(s, 0.0, npw);
        o.res1 = residual_normalized(s, o.t1, npw);
        o.support = support_right_endpoint(*s.packet, o.t1, 1e-12, npw);
        o.envelope = support_envelope(*s.packet, o.t1);
        o.norm0 = packet_weighted_norm(*s.packet, s.sigma_c, 0.0, 2.0, 0.0, npw) / s.g0.sobolev(0, x1);
        o.norm1 = packet_weighted_norm(*s.packet, s.sigma_c, 0.0, 2.0, o.t1, npw) / s.g0.sobolev(0, x1);
        o.h1_ratio = s.g0.sobolev(1, x1) / (lams[i] * s.g0.sobolev(0, x1));
        const auto ts = linspace(0.0, time_of(c.v["window"], lams[i]), samples);
        for (const auto& dc : deg_cases) {
            DegOut d;
            d.rep = degeneration_report(*s.packet, s.sigma_c, dc["gamma_prime"], dc["p"], dc["s"], ts, npw);
            d.unit = unit_rate(s, ts);
            o.deg.push_back(d);
        }
        return o;
    });

    // β(t) against an independent adaptive integration of the ODE
    const KdvSpec ks = kdv_spec(c.v);
    const Json& bgd = c.v["background"];
    const double beta0 = bgd.value("beta0", 1.0);
    double beta_err = 0.0;
    Table bt{"kdv_beta", {"t", "beta_closed_form", "beta_ode"}, {}};
    {
        namespace ode = boost::numeric::odeint;
        const double t_end = std::pow(lams.front(), -5.0 / 3.0);
        for (int k = 0; k <= 8; ++k) {
            const double t = t_end * k / 8.0;
            double b = beta0;
            ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<double>>(1e-15, 1e-15),
                                    [&](double y, double& dy, double) { dy = kdv_beta_rhs(ks.alpha1, y); }, b, 0.0, t,
                                    t_end / 64.0 + 1e-300);
            const double cf = kdv_beta(ks.alpha1, beta0, t);
            beta_err = std::max(beta_err, std::abs(cf - b) / cf);
            bt.rows.push_back({t, cf, b});
        }
    }
    c.rep.checks.push_back(check_at_most("beta(t) closed form vs ODE, max rel error", beta_err, c.tol("beta")));

    Table t{"kdv_suite",
            {"lambda", "t1", "residual_t0", "residual_t1", "support_t1", "envelope_t1", "norm_t0", "norm_t1"},
            {}};
    Json runs = Json::array();
    std::vector<double> r0, r1, n0;
    for (std::size_t i = 0; i < lams.size(); ++i) {
        const Out& o = outs[i];
        const std::string tag = "lambda " + fmt_lambda(lams[i]);
        t.rows.push_back({lams[i], o.t1, o.res0, o.res1, o.support, o.envelope, o.norm0, o.norm1});
        Json run{{"lambda", lams[i]},          {"t1", o.t1},           {"residual_t0", o.res0},
                 {"residual_t1", o.res1},      {"support_t1", o.support}, {"envelope_t1", o.envelope},
                 {"weighted_norm_t0", o.norm0}, {"weighted_norm_t1", o.norm1}, {"degeneration", Json::array()}};
        r0.push_back(o.res0);
        r1.push_back(o.res1);
        n0.push_back(o.norm0);
        c.rep.checks.push_back(check_at_most(tag + " support / envelope at t = lambda^(-5/3)", o.support / o.envelope,
                                             c.tol("envelope_slack")));
        for (std::size_t k = 0; k < o.deg.size(); ++k) {
            const auto& d = o.deg[k];
            run["degeneration"].push_back(Json{{"case", deg_cases[k]},
                                               {"fitted_rate", d.rep.fitted_rate},
                                               {"predicted_rate", d.rep.predicted_rate},
                                               {"r_squared", d.rep.r_squared}});
            degeneration_checks(c, tag + " case " + std::to_string(k), d);
        }
        // the two-sided initial bound is only claimed once λ^{-1}||g0||_{H¹} / ||g0|| < 1/2
        run["h1_condition"] = o.h1_ratio;
        runs.push_back(run);
    }
    if (lams.size() >= 2) {
        c.rep.checks.push_back(check_at_most("residual/(lambda(1+lambda^2 t)) ratio across lambda at t=0",
                                             max_min_ratio(r0), c.tol("ratio")));
        c.rep.checks.push_back(check_at_most("residual/(lambda(1+lambda^2 t)) ratio across lambda at t=lambda^(-5/3)",
                                             max_min_ratio(r1), c.tol("ratio")));
        c.rep.checks.push_back(check_at_most("initial weighted norm ratio across lambda", max_min_ratio(n0),
                                             c.tol("ratio")));
    }
    c.rep.tables.push_back(t);
    c.rep.tables.push_back(bt);
    c.rep.results["runs"] = runs;
    c.rep.results["beta_max_rel_error"] = beta_err;
    c.rep.notes.push_back("KdV residual norms are restricted to the exact cubic region x <= x_cut");
}

} // namespace dlab::harness
