#pragma once

#include <vector>

#include "dlab/background.hpp"
#include "dlab/grid.hpp"

namespace dlab {

// Weighted norms (Σ w_i W(x_i) |v_i|^p)^{1/p}: the weight W sits inside the integral.
struct WeightSpec {
    enum class Kind { none, power_of_abs_f, power_of_abs_x, explicit_values };
    Kind kind = Kind::none;
    double gamma = 0.0;
    std::vector<double> values;
    double p = 2.0;
    // integrate against the native coordinate (dy) instead of dx
    bool native_measure = false;

    static WeightSpec trivial(double p = 2.0) { return {Kind::none, 0.0, {}, p, false}; }
    static WeightSpec abs_x(double gamma, double p = 2.0) { return {Kind::power_of_abs_x, gamma, {}, p, false}; }
    static WeightSpec abs_f(double gamma, double p = 2.0) { return {Kind::power_of_abs_f, gamma, {}, p, false}; }
    static WeightSpec explicit_weights(std::vector<double> w, double p = 2.0) {
        return {Kind::explicit_values, 0.0, std::move(w), p, false};
    }
};

// W(x_i); NaN/inf where the weight is singular
std::vector<double> weight_values(const Grid1D& grid, const WeightSpec& w, const Background* bg, double t);

double weighted_norm(const GridField& field, const WeightSpec& weight, const Background* bg = nullptr, double t = 0.0);

// Σ_i w_i J_i W_i u_i conj(v_i)
cplx weighted_pairing(const GridField& u, const GridField& v, const WeightSpec& weight, const Background* bg = nullptr,
                      double t = 0.0);

// Σ_{j<=n} ||(L ∂_x)^j g||_{L^p}
double sobolev_scaled_norm(const GridField& g, int n, double L, double p = 2.0);

// four-term Y-norm of a positive sampled field over its grid (interior nodes and the right end)
double y_capital_norm(const GridField& f);

} // namespace dlab
