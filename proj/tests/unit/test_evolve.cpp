#include <cmath>

#include <doctest.h>

#include "dlab/error.hpp"
#include "dlab/evolve.hpp"
#include "dlab/grid.hpp"

using namespace dlab;

namespace {

// u_t = i u_xx from e^{-x^2} e^{ikx}: heat kernel with diffusion constant i
cplx gaussian(double t, double x, double k) {
    const cplx d = 1.0 + cplx(0, 4) * t;
    // complete the square: e^{-x^2 + ikx} = e^{a^2} e^{-(x - a)^2}, a = ik/2
    const cplx a = cplx(0, k) / 2.0;
    return std::exp(a * a) / std::sqrt(d) * std::exp(-(x - a) * (x - a) / d);
}

// plain discrete norm: the quantity CN conserves exactly on a periodic grid
NamedNorm l2_norm() {
    return {"l2", [](const GridField& f) {
                double s = 0;
                for (const cplx& v : f.values) s += std::norm(v);
                return std::sqrt(s);
            }};
}

GridField field(GridPtr g, const std::function<cplx(double)>& fn) {
    GridField f{g, {}, "u"};
    for (double x : g->x) f.values.push_back(fn(x));
    return f;
}

} // namespace

TEST_SUITE("pde_evolve") {

TEST_CASE("free Schrodinger matches the exact Gaussian") {
    const double k = 2.0;
    const auto g = make_uniform_grid(-25.0, 25.0, 2501);
    EvolutionProblem pb{EvolutionKind::free_schrodinger, g, Boundary::dirichlet_zero, 1e-3};
    const auto tr = evolve(pb, field(g, [&](double x) { return gaussian(0.0, x, k); }), 0.5, 100, {l2_norm()});
    REQUIRE(!tr.unstable);
    const GridField& u = tr.snapshots.back();
    CHECK(tr.times.back() == doctest::Approx(0.5));
    double err = 0;
    for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(u.values[i] - gaussian(0.5, g->x[i], k)));
    CHECK(err < 1e-4);
}

TEST_CASE("Crank-Nicolson conserves the discrete L2 norm") {
    for (auto kind : {EvolutionKind::free_schrodinger, EvolutionKind::free_airy}) {
        const std::size_t n = 512;
        const double period = 20.0;
        std::vector<double> nodes(n);
        for (std::size_t i = 0; i < n; ++i) nodes[i] = -10.0 + period * double(i) / double(n);
        const auto g = make_grid(nodes);
        EvolutionProblem pb{kind, g, Boundary::periodic, 2e-3};
        const auto tr = evolve(pb, field(g, [](double x) { return std::exp(-x * x) * std::polar(1.0, 3 * x); }), 0.4,
                               50, {l2_norm()});
        const auto l2 = tr.norm_log.column("l2");
        for (double v : l2) CHECK(v == doctest::Approx(l2.front()).epsilon(1e-10));
    }
}

TEST_CASE("tm evolution with imaginary b keeps the norm") {
    const std::size_t n = 400;
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = 2.0 * double(i) / double(n);
    const auto g = make_grid(nodes);
    // b = i c is skew for the L2 pairing
    EvolutionProblem pb{EvolutionKind::tm_schrodinger_1d, g, Boundary::periodic, 1e-4, constant_field(cplx(0, 1.5))};
    const auto tr = evolve(pb, field(g, [](double x) { return std::polar(1.0, 2 * M_PI * x); }), 0.05, 50, {l2_norm()});
    const auto l2 = tr.norm_log.column("l2");
    CHECK(l2.back() == doctest::Approx(l2.front()).epsilon(1e-10));
}

TEST_CASE("tm evolution with real constant b decays a plane wave at rate lambda b") {
    const std::size_t n = 400;
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = 2.0 * double(i) / double(n);
    const auto g = make_grid(nodes);
    const double lam = 2 * M_PI, b = 0.5;
    EvolutionProblem pb{EvolutionKind::tm_schrodinger_1d, g, Boundary::periodic, 1e-4, constant_field(b)};
    const auto tr = evolve(pb, field(g, [&](double x) { return std::polar(1.0, lam * x); }), 0.1, 100, {l2_norm()});
    const auto fit = fit_exponential_rate(tr.norm_log, "l2", 0.0, 0.1);
    CHECK(fit.rate == doctest::Approx(-lam * b).epsilon(1e-3));
}

TEST_CASE("mass reaching a Dirichlet edge stops the run") {
    const auto g = make_uniform_grid(-10.0, 10.0, 1001);
    EvolutionProblem pb{EvolutionKind::free_schrodinger, g, Boundary::dirichlet_zero, 1e-3};
    const auto tr = evolve(pb, field(g, [](double x) { return gaussian(0.0, x, 20.0); }), 1.0, 10);
    CHECK(tr.boundary_reached);
    CHECK(tr.times.back() < 1.0);
}

TEST_CASE("exponential rate fit") {
    std::vector<double> t, v;
    for (int i = 0; i <= 20; ++i) {
        t.push_back(0.05 * i);
        v.push_back(2.0 * std::exp(3.0 * t.back()));
    }
    const auto f = fit_exponential_rate(t, v);
    CHECK(f.rate == doctest::Approx(3.0).epsilon(1e-12));
    REQUIRE(f.r_squared);
    CHECK(*f.r_squared == doctest::Approx(1.0));
    CHECK(f.samples == 21);
    // constant data: zero rate and no r²
    const auto c = fit_exponential_rate(t, std::vector<double>(t.size(), 1.0));
    CHECK(c.rate == doctest::Approx(0.0));
    CHECK(!c.r_squared);
}

TEST_CASE("top octave fraction separates smooth and grid-scale data") {
    std::vector<cplx> smooth, rough;
    for (int i = 0; i < 256; ++i) {
        const double x = -8.0 + 16.0 * i / 256.0;
        smooth.push_back(std::exp(-x * x));
        rough.push_back(i % 2 ? 1.0 : -1.0);
    }
    CHECK(top_octave_fraction(smooth) < 1e-10);
    CHECK(top_octave_fraction(rough) > 0.99);
}

} // TEST_SUITE
