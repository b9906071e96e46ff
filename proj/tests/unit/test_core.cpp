#include <cmath>
#include <random>

#include <doctest.h>

#include "dlab/error.hpp"
#include "dlab/grid.hpp"
#include "dlab/jet.hpp"
#include "dlab/models.hpp"
#include "dlab/norms.hpp"

using namespace dlab;

TEST_SUITE("core_models") {

TEST_CASE("exponent table values") {
    const Exponents a = schrodinger_exponents({1.0, 1.0});
    CHECK(a.sigma_c == -0.5);
    CHECK(a.s_c == 2);
    const Exponents b = schrodinger_exponents({0.0, 1.0});
    CHECK(b.sigma_c == 0.0);
    CHECK(b.s_c == 2);
    const Exponents k = kdv_exponents({3.0});
    CHECK(k.sigma_c == -1.5);
    CHECK(k.s_c == 5);
    // integer sigma_c - 1/2 must step strictly past it
    const Exponents c = schrodinger_exponents({-7.0, 1.0});
    CHECK(c.sigma_c == 3.5);
    CHECK(c.s_c == 4);
}

TEST_CASE("exponents: s_c is the least admissible integer above sigma_c - 1/2") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-20.0, 20.0);
    for (int i = 0; i < 500; ++i) {
        const SchrodingerSpec s{coef(rng), coef(rng)};
        const Exponents e = schrodinger_exponents(s);
        CHECK(e.sigma_c == doctest::Approx(-(s.alpha1 / 2 + s.beta1 - 1)));
        CHECK(e.s_c >= 2);
        CHECK(e.s_c > e.sigma_c - 0.5);
        CHECK((e.s_c == 2 || e.s_c - 1 <= e.sigma_c - 0.5));

        const KdvSpec k{coef(rng)};
        const Exponents f = kdv_exponents(k);
        CHECK(f.s_c >= 5);
        CHECK(f.s_c > f.sigma_c - 0.5);
        CHECK((f.s_c == 5 || f.s_c - 1 <= f.sigma_c - 0.5));
    }
}

TEST_CASE("exponents reject non-finite coefficients") {
    CHECK_THROWS_AS(schrodinger_exponents({NAN, 1.0}), LabError);
    CHECK_THROWS_AS(kdv_exponents({INFINITY}), LabError);
}

TEST_CASE("jet arithmetic matches closed-form derivatives") {
    const double x0 = 0.3;
    using J = Jet<double, 4>;
    const J x = J::variable(x0);
    // d/dx exp(sin x) = cos x e^{sin x}, d2 = (cos^2 x - sin x) e^{sin x}
    const J e = exp(sin(x));
    const double s = std::sin(x0), c = std::cos(x0), es = std::exp(s);
    CHECK(e.d(0) == doctest::Approx(es).epsilon(1e-14));
    CHECK(e.d(1) == doctest::Approx(c * es).epsilon(1e-14));
    CHECK(e.d(2) == doctest::Approx((c * c - s) * es).epsilon(1e-14));

    // (1 + x)^{-1/2} = sqrt(1/(1+x)); log(exp(x)) = x
    const J p = pow(1.0 + x, -0.5);
    const J q = sqrt(1.0 / (1.0 + x));
    for (int k = 0; k <= 4; ++k) CHECK(p.c[k] == doctest::Approx(q.c[k]).epsilon(1e-13));
    const J l = log(exp(x));
    CHECK(l.c[0] == doctest::Approx(x0));
    CHECK(l.c[1] == doctest::Approx(1.0));
    for (int k = 2; k <= 4; ++k) CHECK(std::abs(l.c[k]) < 1e-14);
}

TEST_CASE("jet reverse inverts the series") {
    using J = Jet<double, 4>;
    const double x0 = 0.7;
    const J y = exp(J::variable(x0));
    const J xinv = reverse(y, x0);
    // x = log y about y0 = e^{x0}: coefficients (-1)^{k+1} / (k y0^k)
    const double y0 = std::exp(x0);
    CHECK(xinv.c[0] == doctest::Approx(x0));
    for (int k = 1; k <= 4; ++k)
        CHECK(xinv.c[k] == doctest::Approx((k % 2 ? 1.0 : -1.0) / (k * std::pow(y0, k))).epsilon(1e-12));
}

TEST_CASE("fornberg weights differentiate polynomials exactly") {
    const double nodes[5] = {-0.3, 0.0, 0.2, 0.5, 0.9};
    const auto w = fornberg_weights(0.1, nodes, 5, 2);
    // p(x) = x^4 is degree 4: exact on five nodes
    double v = 0, d1 = 0, d2 = 0;
    for (int i = 0; i < 5; ++i) {
        const double p = std::pow(nodes[i], 4);
        v += w[0][i] * p;
        d1 += w[1][i] * p;
        d2 += w[2][i] * p;
    }
    CHECK(v == doctest::Approx(1e-4).epsilon(1e-10));
    CHECK(d1 == doctest::Approx(4e-3).epsilon(1e-10));
    CHECK(d2 == doctest::Approx(0.12).epsilon(1e-10));
}

TEST_CASE("fd_derivative_uniform converges at fourth order") {
    auto err = [](int n) {
        const double h = 2.0 * M_PI / n;
        std::vector<cplx> v(n + 1);
        for (int i = 0; i <= n; ++i) v[i] = std::sin(i * h);
        const auto d = fd_derivative_uniform(h, v, 1);
        double e = 0;
        for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(d[i] - std::cos(i * h)));
        return e;
    };
    const double ratio = err(100) / err(200);
    CHECK(ratio > 12.0);
}

TEST_CASE("simpson weights integrate cubics exactly") {
    const auto g = make_uniform_grid(-1.0, 2.0, 31);
    double s = 0;
    for (std::size_t i = 0; i < g->size(); ++i) s += g->weights[i] * std::pow(g->x[i], 3);
    CHECK(s == doctest::Approx((16.0 - 1.0) / 4.0).epsilon(1e-13));
}

TEST_CASE("weighted norm on an exp-mapped grid matches a closed form") {
    // ∫_0^∞ |x| e^{-2x^2} dx = 1/4, so || e^{-x^2} ||_{L²_{|x|}} = 1/2
    const auto g = make_exp_mapped_grid(std::log(1e-8), std::log(8.0), 4001);
    GridField f{g, {}, "gauss"};
    for (double x : g->x) f.values.push_back(std::exp(-x * x));
    CHECK(weighted_norm(f, WeightSpec::abs_x(1.0)) == doctest::Approx(0.5).epsilon(1e-8));
    // pairing with itself is the squared norm
    CHECK(weighted_pairing(f, f, WeightSpec::abs_x(1.0)).real() == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("weighted norm: positive homogeneity and triangle inequality") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    const auto g = make_uniform_grid(0.1, 1.0, 101);
    for (int rep = 0; rep < 20; ++rep) {
        GridField u{g, {}, "u"}, v{g, {}, "v"}, s{g, {}, "s"}, c{g, {}, "c"};
        const double k = std::abs(nd(rng)) + 0.1;
        for (std::size_t i = 0; i < g->size(); ++i) {
            u.values.push_back({nd(rng), nd(rng)});
            v.values.push_back({nd(rng), nd(rng)});
            s.values.push_back(u.values[i] + v.values[i]);
            c.values.push_back(k * u.values[i]);
        }
        for (double gamma : {0.0, 1.0, -0.5}) {
            const WeightSpec w = WeightSpec::abs_x(gamma);
            CHECK(weighted_norm(s, w) <= weighted_norm(u, w) + weighted_norm(v, w) + 1e-12);
            CHECK(weighted_norm(c, w) == doctest::Approx(k * weighted_norm(u, w)).epsilon(1e-12));
        }
    }
}

} // TEST_SUITE
