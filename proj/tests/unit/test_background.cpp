#include <cmath>
#include <random>

#include <doctest.h>

#include "dlab/background.hpp"
#include "dlab/error.hpp"

using namespace dlab;

namespace {

// equation residuals from central differences of f alone
cplx fd_schrodinger_residual(const Background& bg, const SchrodingerSpec& s, double t, double x) {
    const double h = 1e-4, k = 1e-5;
    const cplx f = bg.f(t, x);
    const cplx fx = (bg.f(t, x + h) - bg.f(t, x - h)) / (2 * h);
    const cplx fxx = (bg.f(t, x + h) - 2.0 * f + bg.f(t, x - h)) / (h * h);
    const cplx ft = (bg.f(t + k, x) - bg.f(t - k, x)) / (2 * k);
    return cplx(0, 1) * ft + std::norm(f) * fxx + s.alpha1 * f * std::norm(fx) + s.beta1 * std::conj(f) * fx * fx;
}

double fd_kdv_residual(const Background& bg, const KdvSpec& s, double t, double x) {
    const double h = 2e-3, k = 1e-5;
    auto u = [&](double tt, double xx) { return bg.f(tt, xx).real(); };
    const double ux = (u(t, x + h) - u(t, x - h)) / (2 * h);
    const double uxx = (u(t, x + h) - 2 * u(t, x) + u(t, x - h)) / (h * h);
    const double uxxx = (u(t, x + 2 * h) - 2 * u(t, x + h) + 2 * u(t, x - h) - u(t, x - 2 * h)) / (2 * h * h * h);
    const double ut = (u(t + k, x) - u(t - k, x)) / (2 * k);
    return ut + u(t, x) * uxxx + s.alpha1 * ux * uxx;
}

} // namespace

TEST_SUITE("backgrounds") {

TEST_CASE("ds_linear solves the equation for random coefficients") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> c(-3.0, 3.0), u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const SchrodingerSpec s{c(rng), c(rng)};
        const auto bg = ds_linear_background(s, 1.0);
        const double t = u(rng), x = 2 * u(rng) - 1;
        CHECK(std::abs(schrodinger_background_residual(*bg, s, t, x)) < 1e-12);
        CHECK(std::abs(fd_schrodinger_residual(*bg, s, t, x)) < 1e-6);
    }
}

TEST_CASE("library residual detects a wrong coefficient") {
    const SchrodingerSpec s{1.0, 1.0}, wrong{2.0, 1.0};
    const auto bg = ds_linear_background(s, 1.0);
    const cplx r = schrodinger_background_residual(*bg, wrong, 0.2, 0.5);
    CHECK(std::abs(r - fd_schrodinger_residual(*bg, wrong, 0.2, 0.5)) < 1e-6);
    CHECK(std::abs(r) > 0.1);
}

TEST_CASE("kdv_cubic solves the equation on its exact region") {
    const KdvSpec s{3.0, 0.0};
    const auto bg = kdv_cubic_background(3.0, 1.0, 0.5, 0.475);
    CHECK(bg->x_exact() == doctest::Approx(0.475));
    for (double t : {0.0, 0.05, 0.5})
        for (double x : {0.05, 0.2, 0.4}) {
            CHECK(std::abs(kdv_background_residual(*bg, s, t, x)) < 1e-11);
            CHECK(std::abs(fd_kdv_residual(*bg, s, t, x)) < 1e-4);
        }
}

TEST_CASE("kdv_beta solves its ODE") {
    const double a = 3.0, b0 = 1.2;
    CHECK(kdv_beta(a, b0, 0.0) == doctest::Approx(b0));
    for (double t : {0.01, 0.1, 1.0}) {
        const double k = 1e-6;
        const double d = (kdv_beta(a, b0, t + k) - kdv_beta(a, b0, t - k)) / (2 * k);
        CHECK(d == doctest::Approx(kdv_beta_rhs(a, kdv_beta(a, b0, t))).epsilon(1e-7));
    }
    // negative beta0 runs into the singularity in finite time
    CHECK_THROWS_AS(kdv_beta(a, -1.0, 1.0), LabError);
}

TEST_CASE("ds_linear y-coordinate is ln(x/x1)") {
    const auto bg = ds_linear_background({1.0, 1.0}, 0.8);
    for (double x : {0.01, 0.1, 0.5}) {
        const double y = y_transform(*bg, 0.3, x, YKind::schrodinger);
        CHECK(y == doctest::Approx(std::log(x / 0.8)).epsilon(1e-12));
        CHECK(y_inverse(*bg, 0.3, y, YKind::schrodinger) == doctest::Approx(x).epsilon(1e-10));
        CHECK(dt_y(*bg, 0.3, x, YKind::schrodinger) == doctest::Approx(0.0));
    }
}

TEST_CASE("dt_y agrees with a finite difference of y in t") {
    const auto bg = kdv_cubic_background(3.0, 1.0, 0.5, 0.475);
    for (double x : {0.1, 0.3}) {
        const double t = 0.02, k = 1e-5;
        const double fd = (y_transform(*bg, t + k, x, YKind::kdv) - y_transform(*bg, t - k, x, YKind::kdv)) / (2 * k);
        CHECK(dt_y(*bg, t, x, YKind::kdv) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("equation form of dt_y matches the actual f_t on the cubic region") {
    const KdvSpec s{3.0, 0.0};
    const auto bg = kdv_cubic_background(3.0, 1.0, 0.5, 0.475);
    CHECK(dt_y_equation_form(*bg, s, 0.05, 0.1, 0.4) ==
          doctest::Approx(dt_y_partial(*bg, 0.05, 0.1, 0.4, YKind::kdv)).epsilon(1e-9));
}

TEST_CASE("y_jet first derivative is 1/|f| for Schrodinger") {
    const auto bg = ds_linear_background({1.0, 1.0}, 1.0);
    const auto j = y_jet(*bg, 0.1, 0.25, YKind::schrodinger);
    CHECK(j.c[1] == doctest::Approx(4.0));
    CHECK(j.c[2] == doctest::Approx(-16.0 / 2.0));
}

TEST_CASE("property: y is strictly increasing in x") {
    const auto bg = kdv_cubic_background(3.0, 1.0, 0.5, 0.475);
    for (double t : {0.0, 0.1}) {
        double prev = -INFINITY;
        for (int i = 1; i <= 60; ++i) {
            const double y = y_transform(*bg, t, 0.5 * i / 60.0, YKind::kdv);
            CHECK(y > prev);
            prev = y;
        }
        CHECK(prev == doctest::Approx(0.0));
    }
}

TEST_CASE("x1 condition on a sampled profile") {
    // f = x + x^2: f_x(0) = 1, f_xx = 2, so the condition holds iff 2 x1 < 1/2
    std::vector<double> xs;
    std::vector<cplx> fs;
    for (int i = 0; i <= 400; ++i) {
        const double x = -0.6 + 1.2 * i / 400.0;
        xs.push_back(x);
        fs.push_back(x + x * x);
    }
    CHECK_NOTHROW(check_x1_condition(*sampled_background(xs, fs, 0.2, 1.0)));
    try {
        check_x1_condition(*sampled_background(xs, fs, 0.5, 1.0));
        FAIL("expected X1ConditionViolated");
    } catch (const LabError& e) {
        CHECK(e.kind() == ErrorKind::X1ConditionViolated);
    }
}

} // TEST_SUITE
