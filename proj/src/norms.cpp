#include "dlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlab/error.hpp"

namespace dlab {

std::vector<double> weight_values(const Grid1D& g, const WeightSpec& w, const Background* bg, double t) {
    const std::size_t n = g.size();
    std::vector<double> out(n, 1.0);
    switch (w.kind) {
    case WeightSpec::Kind::none:
        break;
    case WeightSpec::Kind::power_of_abs_x:
        for (std::size_t i = 0; i < n; ++i) out[i] = w.gamma == 0.0 ? 1.0 : std::pow(std::abs(g.x[i]), w.gamma);
        break;
    case WeightSpec::Kind::power_of_abs_f:
        require(bg != nullptr, "weight |f|^γ needs a background");
        for (std::size_t i = 0; i < n; ++i) {
            if (w.gamma == 0.0) continue;
            // log-space to keep |f|^γ finite for large |γ| near the zero
            const double m = std::abs(bg->f(t, g.x[i]));
            out[i] = m > 0.0 ? std::exp(w.gamma * std::log(m)) : (w.gamma > 0 ? 0.0 : std::numeric_limits<double>::infinity());
        }
        break;
    case WeightSpec::Kind::explicit_values:
        require(w.values.size() == n, "explicit weight length differs from the grid");
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && i + 1 < n) require(w.values[i] > 0.0, "explicit weights must be positive on interior nodes");
            out[i] = w.values[i];
        }
        break;
    }
    return out;
}

namespace {

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

void check_singular(double W, double amp, double tol, double x) {
    if (!std::isfinite(W) && amp > tol)
        fail(ErrorKind::WeightSingularOnSupport, "weight is singular at x = " + std::to_string(x));
}

} // namespace

double weighted_norm(const GridField& field, const WeightSpec& weight, const Background* bg, double t) {
    const Grid1D& g = *field.grid;
    require(field.values.size() == g.size(), "field and grid differ in length");
    const auto W = weight_values(g, weight, bg, t);
    const double tol = 1e-14 * max_abs(field.values);
    if (std::isinf(weight.p)) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double a = std::abs(field.values[i]);
            check_singular(W[i], a, tol, g.x[i]);
            if (std::isfinite(W[i])) s = std::max(s, W[i] * a);
        }
        return s;
    }
    require(weight.p >= 1.0, "p must be in [1, inf]");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = std::abs(field.values[i]);
        check_singular(W[i], a, tol, g.x[i]);
        if (!std::isfinite(W[i]) || a == 0.0) continue;
        const double meas = weight.native_measure ? g.weights[i] : g.weights[i] * g.jac[i];
        s += meas * W[i] * (weight.p == 2.0 ? a * a : std::pow(a, weight.p));
    }
    return weight.p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / weight.p);
}

cplx weighted_pairing(const GridField& u, const GridField& v, const WeightSpec& weight, const Background* bg,
                      double t) {
    const Grid1D& g = *u.grid;
    require(u.values.size() == g.size() && v.values.size() == g.size(), "pairing fields differ in length");
    const auto W = weight_values(g, weight, bg, t);
    const double tol = 1e-14 * std::max(max_abs(u.values), 1e-300) * std::max(max_abs(v.values), 1e-300);
    cplx s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx prod = u.values[i] * std::conj(v.values[i]);
        check_singular(W[i], std::abs(prod), tol, g.x[i]);
        if (!std::isfinite(W[i])) continue;
        const double meas = weight.native_measure ? g.weights[i] : g.weights[i] * g.jac[i];
        s += meas * W[i] * prod;
    }
    return s;
}

double sobolev_scaled_norm(const GridField& g, int n, double L, double p) {
    require(n >= 0, "n must be nonnegative");
    const std::size_t need = static_cast<std::size_t>(2 * n + 5);
    if (g.grid->size() < need) fail(ErrorKind::GridTooCoarse, "sobolev norm needs at least 2n+5 nodes");
    const WeightSpec plain = WeightSpec::trivial(p);
    double total = weighted_norm(g, plain);
    for (int j = 1; j <= n; ++j) {
        GridField d{g.grid, fd_derivative(g.grid->x, g.values, j), g.label};
        total += std::pow(L, j) * weighted_norm(d, plain);
    }
    return total;
}

double y_capital_norm(const GridField& f) {
    const auto& x = f.grid->x;
    const auto d1 = fd_derivative(x, f.values, 1);
    const auto d2 = fd_derivative(x, f.values, 2);
    const auto d3 = fd_derivative(x, f.values, 3);
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double v = f.values[i].real();
        if (!(v > 0.0)) fail(ErrorKind::NonpositiveField, "f <= 0 at x = " + std::to_string(x[i]));
        t1 = std::max(t1, std::abs(std::pow(v, -2.0 / 3.0) * d1[i].real()));
        t2 = std::max(t2, std::abs(std::pow(v, -1.0 / 3.0) * d2[i].real()));
        t3 = std::max(t3, v);
        t4 = std::max(t4, std::abs(d3[i].real()));
    }
    return t1 * t1 * t1 + std::pow(t2, 1.5) + t3 + t4;
}

} // namespace dlab
