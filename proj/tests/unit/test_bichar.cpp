#include <cmath>
#include <random>

#include <doctest.h>

#include "dlab/bichar.hpp"
#include "dlab/error.hpp"

using namespace dlab;

TEST_SUITE("bicharacteristics") {

TEST_CASE("m=2, n=1 reduces to Xi' = Xi^2") {
    const DegenerateSymbol sym{1.0, 1.0, 2};
    const BicharState s0{1.0, 1.0, 0.0};
    CHECK(xi_closed_form(sym, s0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    const auto traj = integrate_bichar(sym, s0, 0.5, 1e-12);
    CHECK(traj.states.back().t == doctest::Approx(0.5));
    CHECK(traj.states.back().Xi == doctest::Approx(2.0).epsilon(1e-9));
    for (const auto& s : traj.states) CHECK(s.Xi == doctest::Approx(1.0 / (1.0 - s.t)).epsilon(1e-9));
}

TEST_CASE("m = n = 1 grows exponentially") {
    const DegenerateSymbol sym{0.7, 1.0, 1};
    const BicharState s0{2.0, 0.5, 0.0};
    for (double t : {0.1, 1.0, 3.0}) CHECK(xi_closed_form(sym, s0, t) == doctest::Approx(0.5 * std::exp(0.7 * t)));
    CHECK(doubling_time(sym, s0) == doctest::Approx(std::log(2.0) / 0.7));
}

TEST_CASE("rhs is the Hamiltonian vector field of -A x^n xi^m") {
    const DegenerateSymbol sym{1.3, 3.0, 2};
    const BicharState s{0.8, 1.7, 0.0};
    auto p = [&](double x, double xi) { return -sym.A * std::pow(x, sym.n) * std::pow(xi, sym.m); };
    const double h = 1e-6;
    const auto r = bichar_rhs(sym, s);
    CHECK(r.dX == doctest::Approx((p(s.X, s.Xi + h) - p(s.X, s.Xi - h)) / (2 * h)).epsilon(1e-8));
    CHECK(r.dXi == doctest::Approx(-(p(s.X + h, s.Xi) - p(s.X - h, s.Xi)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("doubling time doubles Xi in the closed form") {
    for (auto [n, m] : {std::pair{2.0, 2}, {3.0, 3}, {2.0, 1}, {3.0, 2}, {1.0, 2}}) {
        const DegenerateSymbol sym{1.0, n, m};
        const BicharState s0{1.0, 1.0, 0.0};
        const double tau = doubling_time(sym, s0);
        CHECK(xi_closed_form(sym, s0, tau) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("property: X^n Xi^m is conserved and the closed form tracks the ODE") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(0.5, 1.5);
    std::uniform_int_distribution<int> mi(1, 3);
    for (int rep = 0; rep < 30; ++rep) {
        const DegenerateSymbol sym{pos(rng), double(mi(rng)), mi(rng)};
        const BicharState s0{pos(rng), pos(rng), 0.0};
        const double horizon = doubling_time(sym, s0);
        const auto traj = integrate_bichar(sym, s0, horizon, 1e-11);
        const double c0 = std::pow(s0.X, sym.n) * std::pow(s0.Xi, sym.m);
        for (const auto& s : traj.states) {
            CHECK(std::pow(s.X, sym.n) * std::pow(s.Xi, sym.m) == doctest::Approx(c0).epsilon(1e-8));
            CHECK(s.Xi == doctest::Approx(xi_closed_form(sym, s0, s.t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("backward integration retraces the forward trajectory") {
    const DegenerateSymbol sym{1.0, 2.0, 2};
    const BicharState s0{1.0, 1.0, 0.0};
    const auto fwd = integrate_bichar(sym, s0, 0.4, 1e-12);
    const auto back = integrate_bichar(sym, fwd.states.back(), 0.0, 1e-12);
    CHECK(back.states.back().X == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(back.states.back().Xi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("invalid tolerance and non-real powers are reported") {
    const DegenerateSymbol sym{1.0, 1.5, 2};
    CHECK_THROWS_AS(integrate_bichar(sym, {1.0, 1.0, 0.0}, 1.0, 0.5), LabError);
    try {
        bichar_rhs(sym, {-1.0, 1.0, 0.0});
        FAIL("expected NonrealPower");
    } catch (const LabError& e) {
        CHECK(e.kind() == ErrorKind::NonrealPower);
    }
}

} // TEST_SUITE
