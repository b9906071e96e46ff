#include <cmath>

#include <doctest.h>

#include "dlab/background.hpp"
#include "dlab/grid.hpp"
#include "dlab/packets.hpp"

using namespace dlab;

namespace {

const double kX1 = std::exp(-1.0);

PacketPtr model(double lambda, bool correction = true) {
    PacketOptions o;
    o.correction = correction;
    return model_packet_schrodinger(lambda, model_profile_from_g0(BumpProfile::standard(kX1)), o);
}

} // namespace

TEST_SUITE("wavepackets") {

TEST_CASE("normalized bump has unit L2 norm") {
    const BumpProfile g = BumpProfile::normalized(0.2, 0.7, cplx(0, 1));
    const auto grid = make_uniform_grid(0.2, 0.7, 20001);
    double s = 0;
    for (std::size_t i = 0; i < grid->size(); ++i) s += grid->weights[i] * std::norm(g(grid->x[i]));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.sobolev(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::arg(g(0.45)) == doctest::Approx(M_PI / 2));
    CHECK(g(0.1) == cplx(0.0));
}

TEST_CASE("uncorrected model packet starts as g0(x) x^{i lambda}") {
    const double lambda = -32.0;
    const BumpProfile g0 = BumpProfile::standard(kX1);
    const auto p = model(lambda, false);
    for (double x : {0.2, 0.25, 0.3, 0.35}) {
        const cplx expect = g0(x) * std::polar(1.0, lambda * std::log(x));
        CHECK(std::abs(p->eval(0.0, x).v - expect) < 1e-12);
    }
}

TEST_CASE("correction term is O(1/lambda)") {
    auto gap = [](double lambda) {
        double g = 0;
        for (double x : {0.22, 0.27, 0.31}) g = std::max(g, std::abs(model(lambda)->eval(0.0, x).v - model(lambda, false)->eval(0.0, x).v));
        return g;
    };
    CHECK(gap(-64.0) / gap(-128.0) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("packet derivatives match finite differences") {
    const auto p = model(-16.0);
    const double t = 0.01, x = 0.18, h = 1e-5, k = 1e-7;
    const auto s = p->eval(t, x);
    const cplx vx = (p->eval(t, x + h).v - p->eval(t, x - h).v) / (2 * h);
    const cplx vxx = (p->eval(t, x + h).v - 2.0 * s.v + p->eval(t, x - h).v) / (h * h);
    const cplx vt = (p->eval(t + k, x).v - p->eval(t - k, x).v) / (2 * k);
    CHECK(std::abs(s.vx - vx) < 1e-5 * std::abs(s.vx) + 1e-8);
    CHECK(std::abs(s.vxx - vxx) < 1e-3 * std::abs(s.vxx) + 1e-6);
    CHECK(std::abs(s.vt - vt) < 1e-5 * std::abs(s.vt) + 1e-8);
}

TEST_CASE("general packet on ds_linear equals the model packet at t = 0") {
    const SchrodingerSpec spec{1.0, 1.0};
    const auto bg = ds_linear_background(spec, 1.0);
    const BumpProfile g0 = BumpProfile::standard(1.0);
    for (double lambda : {-16.0, -64.0}) {
        const auto gen = packet_schrodinger(bg, spec, lambda, g0);
        const auto mod = model_packet_schrodinger(lambda, y_profile_from_g0(g0, bg, YKind::schrodinger));
        for (double x : {0.55, 0.7, 0.85}) {
            const auto a = gen->eval(0.0, x), b = mod->eval(0.0, x);
            CHECK(std::abs(a.v - b.v) < 1e-10);
            CHECK(std::abs(a.vx - b.vx) < 1e-10 * std::abs(lambda));
            CHECK(std::abs(a.vxx - b.vxx) < 1e-10 * lambda * lambda);
        }
    }
}

TEST_CASE("model residual is uniform in lambda") {
    double lo = INFINITY, hi = 0;
    for (double lambda : {-16.0, -64.0, -256.0}) {
        const auto p = model(lambda);
        const auto g = packet_grid(*p, 0.0, 32);
        const double r = residual_model(*p, 0.0, *g);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo < 3.0);
}

TEST_CASE("support stays inside the predicted envelope") {
    const SchrodingerSpec spec{1.0, 1.0};
    const auto bg = ds_linear_background(spec, 1.0);
    const auto p = packet_schrodinger(bg, spec, -32.0, BumpProfile::standard(1.0));
    for (double t : {0.0, 0.02, 0.05}) CHECK(support_right_endpoint(*p, t) <= 1.05 * support_envelope(*p, t));
}

TEST_CASE("model packet weighted norm degenerates at rate |lambda|") {
    const auto p = model(-64.0);
    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(i / 640.0);
    const auto rep = degeneration_report(*p, -0.5, 0.5, 2.0, 0, times, 32);
    CHECK(rep.fitted_rate == doctest::Approx(-64.0).epsilon(0.1));
}

TEST_CASE("bilinear pairing is Hermitian") {
    const SchrodingerSpec spec{1.0, 1.0};
    const auto bg = ds_linear_background(spec, 1.0);
    const auto p = packet_schrodinger(bg, spec, -16.0, BumpProfile::standard(1.0));
    const auto q = packet_schrodinger(bg, spec, -24.0, BumpProfile::standard(1.0));
    const auto g = packet_grid(*p, 0.0, 32);
    const GridField u = packet_field(*p, 0.0, g), v = packet_field(*q, 0.0, g);
    const cplx a = bilinear_pairing(u, v, *bg, spec.sigma_c(), PairingKind::schrodinger, 0.0);
    const cplx b = bilinear_pairing(v, u, *bg, spec.sigma_c(), PairingKind::schrodinger, 0.0);
    CHECK(std::abs(a - std::conj(b)) < 1e-12 * std::max(1.0, std::abs(a)));
}

TEST_CASE("WKB phase sign: only e^{-i lambda S} keeps the residual bounded in lambda") {
    // static profile with Im(conj(f) f_x) != 0, so S does not vanish
    std::vector<double> xs;
    std::vector<cplx> fs;
    for (int i = 0; i <= 2000; ++i) {
        const double x = -0.2 + 0.4 * i / 2000.0;
        xs.push_back(x);
        fs.push_back(x * (1.0 + x) * std::polar(1.0, x));
    }
    const SchrodingerSpec spec{1.0, 1.0};
    const auto bg = sampled_background(xs, fs, 0.1, 1.0);
    const BumpProfile g0 = BumpProfile::standard(0.1);
    auto res = [&](double lambda, int sign) {
        PacketOptions o;
        o.wkb_sign = sign;
        const auto p = packet_schrodinger(bg, spec, lambda, g0, o);
        // resolved 40-node y-window in the middle of the support: the residual is pointwise
        const auto [ylo, yhi] = p->support_y(0.0);
        const double h = 2.0 * M_PI / (std::abs(lambda) * 24.0);
        std::vector<double> y, x, jac;
        for (int i = -20; i < 20; ++i) {
            y.push_back(0.5 * (ylo + yhi) + i * h);
            x.push_back(p->x_of_y(0.0, y.back()));
            jac.push_back(p->dx_dy(0.0, x.back()));
        }
        double sup = 0;
        for (const cplx& v : residual_field_schrodinger(*p, spec, 0.0, make_mapped_grid(y, x, jac)).values)
            sup = std::max(sup, std::abs(v));
        return sup;
    };
    CHECK(res(-2048.0, -1) / res(-128.0, -1) < 1.5);
    CHECK(res(-2048.0, +1) / res(-128.0, +1) > 4.0);
}

} // TEST_SUITE
