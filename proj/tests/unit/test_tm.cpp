#include <cmath>

#include <doctest.h>

#include "dlab/grid.hpp"
#include "dlab/tm.hpp"

using namespace dlab;

namespace {

double l2_core(const TmPacket1D& p, double t) {
    const auto g = tm_packet_grid(p.params(), t, 48);
    double s = 0;
    for (std::size_t i = 0; i < g->size(); ++i) s += g->weights[i] * std::norm(p.core(t, g->x[i]).v);
    return std::sqrt(s);
}

} // namespace

TEST_SUITE("tm_condition") {

TEST_CASE("bump integral against dense quadrature") {
    const auto g = make_uniform_grid(-1.0, 1.0, 20001);
    double s = 0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) s += g->weights[i] * std::exp(-1.0 / (1.0 - g->x[i] * g->x[i]));
    CHECK(bump_integral(1.0) == doctest::Approx(s).epsilon(1e-10));
    CHECK(bump_integral(2.5) == doctest::Approx(2.5 * s).epsilon(1e-10));
}

TEST_CASE("half primitives of a linear field") {
    const Field1D b = linear_field(cplx(3.0, -2.0));
    CHECK(half_primitive_re(b, 0.8) == doctest::Approx(3.0 * 0.64 / 4.0));
    CHECK(half_primitive_im(b, 0.8) == doctest::Approx(-2.0 * 0.64 / 4.0));
}

TEST_CASE("growth factor for constant b") {
    for (double c : {0.5, -0.5}) {
        const auto wg = tm_weight_and_growth(constant_field(c), 0.0, 0.3, 8.0);
        const double expect = c > 0 ? std::exp(-c * (0.3 + 1.0 / 8.0)) : std::exp(-c * (0.3 - 1.0 / 8.0));
        CHECK(wg.M == doctest::Approx(expect).epsilon(1e-10));
        CHECK(wg.w(0.4) == doctest::Approx(std::exp(c * 0.2)).epsilon(1e-12));
    }
}

TEST_CASE("grid supremum for a constant ratio") {
    CoefficientField1D c{constant_field(1.0), constant_field(2.0), 0.0, 1.0, false};
    const auto g = make_uniform_grid(0.0, 1.0, 101);
    CHECK(tm_supremum_1d(c, TmKind::schrodinger, *g).supremum_estimate == doctest::Approx(1.0));
    CHECK(tm_supremum_1d(c, TmKind::schrodinger_signed, *g).supremum_estimate == doctest::Approx(1.0));
    CHECK(tm_supremum_1d(c, TmKind::kdv, *g).supremum_estimate == doctest::Approx(2.0 / 3.0));
    // negative b: the signed sup is zero, the symmetric sup is not
    c.b = constant_field(-2.0);
    CHECK(tm_supremum_1d(c, TmKind::schrodinger_signed, *g).supremum_estimate == doctest::Approx(0.0));
    CHECK(tm_supremum_1d(c, TmKind::schrodinger, *g).supremum_estimate == doctest::Approx(1.0));
}

TEST_CASE("degenerate family: analytic verdict matches the grid scan") {
    const std::vector<double> eps{1e-2, 1e-4, 1e-6, 1e-8};
    for (double d : {-1.0, 0.0, 1.0}) {
        const SchrodingerSpec s{1.0, 1.0};
        const auto an = tm_verdict_degenerate(s, s.sigma_c() + d);
        const auto grid = tm_degenerate_scan(d, false, eps);
        CHECK(an.bounded == (d <= 0.0));
        CHECK(grid.bounded == an.bounded);
        if (d > 0) {
            REQUIRE(an.divergence_rate);
            CHECK(*an.divergence_rate == doctest::Approx(1.5 * d));
        }
        const KdvSpec k{3.0};
        const auto ak = tm_verdict_degenerate(k, k.sigma_c() + d);
        CHECK(ak.bounded == (d <= 0.0));
        CHECK(tm_degenerate_scan(d, true, eps).bounded == ak.bounded);
        if (d > 0) {
            REQUIRE(ak.divergence_rate);
            CHECK(*ak.divergence_rate == doctest::Approx(d));
        }
    }
}

TEST_CASE("ray integral orientation") {
    const auto b = constant_vector_field({1.0});
    CHECK(ray_integral(b, {{0.0}, {1.0}, 0.7}) == doctest::Approx(0.7));
    CHECK(ray_integral(b, {{0.0}, {-1.0}, 0.7}) == doctest::Approx(-0.7));
}

TEST_CASE("packet core keeps unit L2 norm") {
    const TmPacket1D p({64.0, 8.0, {0.0}, {1.0}}, bump_field(1.0, 0.5, 1.0));
    CHECK(l2_core(p, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(l2_core(p, 0.005) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("for b = 0 the adjoint packet is the direct packet") {
    const Field1D zero = constant_field(0.0);
    const TmPacketParams par{64.0, 8.0, {0.0}, {1.0}};
    const TmPacket1D p(par, zero);
    const TmAdjointPacketND q(par, zero_vector_field(1), 1);
    for (double t : {0.0, 0.003})
        for (double x : {-0.05, 0.0, 0.07, 0.3}) {
            CHECK(std::abs(q.eval(t, &x).u - p.packet(t, x).v) < 1e-12);
            CHECK(std::abs(tm_residual_point(q, zero_vector_field(1), t, &x) -
                           tm_residual_point(p, zero, TmResidualMode::conjugated, t, x)) < 1e-9);
        }
    CHECK(q.growth_factor(0.5) == doctest::Approx(1.0));
}

TEST_CASE("conjugated residual scales like mu^2") {
    const Field1D b = bump_field(1.0, 0.5, 1.0);
    auto res = [&](double mu) {
        const TmPacket1D p({256.0, mu, {0.0}, {1.0}}, b);
        const auto g = tm_packet_grid(p.params(), 0.0, 48);
        return tm_residual(p, b, TmResidualMode::conjugated, 0.0, *g);
    };
    const double slope = std::log2(res(32.0) / res(16.0));
    CHECK(slope > 1.6);
    CHECK(slope < 2.4);
}

} // TEST_SUITE
