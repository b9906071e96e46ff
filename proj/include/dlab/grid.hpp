#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace dlab {

using cplx = std::complex<double>;

enum class Coord { x, y };

// Nodes are in the native coordinate; x and jac give the physical position and dx/dnode.
struct Grid1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    Coord kind = Coord::x;
    std::vector<double> x;
    std::vector<double> jac;

    std::size_t size() const { return nodes.size(); }
    // spacing of a uniform grid (first interval)
    double step() const { return nodes[1] - nodes[0]; }
};

using GridPtr = std::shared_ptr<const Grid1D>;

struct GridField {
    GridPtr grid;
    std::vector<cplx> values;
    std::string label;
};

std::vector<double> simpson_weights(const std::vector<double>& nodes);

GridPtr make_grid(std::vector<double> nodes);
GridPtr make_uniform_grid(double a, double b, std::size_t n);
GridPtr make_log_grid(double a, double b, std::size_t n);
// native nodes are y; x and dx/dy supplied by the caller
GridPtr make_mapped_grid(std::vector<double> y, std::vector<double> x, std::vector<double> jac);
// y = ln x
GridPtr make_exp_mapped_grid(double y_lo, double y_hi, std::size_t n);

// Finite-difference weights for derivatives 0..m at z from arbitrary nodes.
std::vector<std::vector<double>> fornberg_weights(double z, const double* nodes, int n, int m);

// order-th derivative with respect to pts, centred stencils of accuracy >= 4,
// shifted one-sided near the ends.
std::vector<cplx> fd_derivative(const std::vector<double>& pts, const std::vector<cplx>& v, int order);
std::vector<cplx> fd_derivative_uniform(double h, const std::vector<cplx>& v, int order);

} // namespace dlab
