#include "dlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/error.hpp"

namespace dlab {

std::vector<double> simpson_weights(const std::vector<double>& t) {
    const std::size_t n = t.size();
    require(n >= 2, "grid needs at least 2 nodes");
    std::vector<double> w(n, 0.0);
    if (n == 2) {
        w[0] = w[1] = 0.5 * (t[1] - t[0]);
        return w;
    }
    const std::size_t intervals = n - 1;
    const std::size_t paired = intervals - intervals % 2;
    for (std::size_t i = 0; i + 2 <= paired; i += 2) {
        const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1], s = h0 + h1;
        w[i] += s / 6.0 * (2.0 - h1 / h0);
        w[i + 1] += s * s * s / (6.0 * h0 * h1);
        w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
    }
    if (intervals % 2 == 1) {
        // last interval from the quadratic through the final three nodes
        const std::size_t i = n - 3;
        const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1];
        w[i] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        w[i + 1] += h1 * h1 / (6.0 * h0) + h1 / 2.0;
        w[i + 2] += (h1 * h1 / 3.0 + h0 * h1 / 2.0) / (h0 + h1);
    }
    return w;
}

GridPtr make_grid(std::vector<double> nodes) {
    require(nodes.size() >= 2, "grid needs at least 2 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        require(nodes[i] > nodes[i - 1], "grid nodes must be strictly increasing");
    auto g = std::make_shared<Grid1D>();
    g->weights = simpson_weights(nodes);
    g->x = nodes;
    g->jac.assign(nodes.size(), 1.0);
    g->nodes = std::move(nodes);
    g->kind = Coord::x;
    return g;
}

GridPtr make_uniform_grid(double a, double b, std::size_t n) {
    require(n >= 2 && b > a, "bad uniform grid");
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = a + (b - a) * double(i) / double(n - 1);
    return make_grid(std::move(nodes));
}

GridPtr make_log_grid(double a, double b, std::size_t n) {
    require(n >= 2 && a > 0 && b > a, "bad log grid");
    std::vector<double> nodes(n);
    const double la = std::log(a), lb = std::log(b);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = std::exp(la + (lb - la) * double(i) / double(n - 1));
    nodes.front() = a;
    nodes.back() = b;
    return make_grid(std::move(nodes));
}

GridPtr make_mapped_grid(std::vector<double> y, std::vector<double> x, std::vector<double> jac) {
    require(y.size() >= 2 && x.size() == y.size() && jac.size() == y.size(), "bad mapped grid");
    for (std::size_t i = 1; i < y.size(); ++i) require(y[i] > y[i - 1], "grid nodes must be strictly increasing");
    auto g = std::make_shared<Grid1D>();
    g->weights = simpson_weights(y);
    g->nodes = std::move(y);
    g->x = std::move(x);
    g->jac = std::move(jac);
    g->kind = Coord::y;
    return g;
}

GridPtr make_exp_mapped_grid(double y_lo, double y_hi, std::size_t n) {
    require(n >= 2 && y_hi > y_lo, "bad y grid");
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y_lo + (y_hi - y_lo) * double(i) / double(n - 1);
        x[i] = std::exp(y[i]);
    }
    auto jac = x;
    return make_mapped_grid(std::move(y), std::move(x), std::move(jac));
}

std::vector<std::vector<double>> fornberg_weights(double z, const double* x, int n, int m) {
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

namespace {

int stencil_width(int order) { return 2 * ((order + 5) / 2) + 1; }

} // namespace

std::vector<cplx> fd_derivative(const std::vector<double>& pts, const std::vector<cplx>& v, int order) {
    const int n = static_cast<int>(pts.size());
    const int w = stencil_width(order);
    if (n < w) fail(ErrorKind::GridTooCoarse, "too few nodes for finite differences");
    std::vector<cplx> out(n);
    const int r = w / 2;
    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - r, 0, n - w);
        auto c = fornberg_weights(pts[i], pts.data() + start, w, order);
        cplx s = 0.0;
        for (int k = 0; k < w; ++k) s += c[order][k] * v[start + k];
        out[i] = s;
    }
    return out;
}

std::vector<cplx> fd_derivative_uniform(double h, const std::vector<cplx>& v, int order) {
    const int n = static_cast<int>(v.size());
    const int w = stencil_width(order);
    if (n < w) fail(ErrorKind::GridTooCoarse, "too few nodes for finite differences");
    // weights depend only on the offset of i inside the stencil; precompute all of them
    std::vector<double> loc(w);
    for (int k = 0; k < w; ++k) loc[k] = k * h;
    std::vector<std::vector<double>> table(w);
    for (int off = 0; off < w; ++off) table[off] = fornberg_weights(off * h, loc.data(), w, order)[order];
    std::vector<cplx> out(n);
    const int r = w / 2;
    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - r, 0, n - w);
        const auto& c = table[i - start];
        cplx s = 0.0;
        for (int k = 0; k < w; ++k) s += c[k] * v[start + k];
        out[i] = s;
    }
    return out;
}

} // namespace dlab
