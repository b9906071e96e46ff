#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/models.hpp"

namespace dlab {

// complex coefficient with two analytic derivatives
struct Field1D {
    std::function<cplx(double)> f;
    std::function<cplx(double)> fx;
    std::function<cplx(double)> fxx;

    cplx operator()(double x) const { return f(x); }
};

Field1D constant_field(cplx c);
Field1D linear_field(cplx slope, cplx offset = 0.0);
Field1D power_field(cplx coeff, int power); // coeff x^power
// amplitude * exp(-1/(1-z^2)), z = (x - center)/radius, zero outside
Field1D bump_field(cplx amplitude, double center, double radius);
Field1D sum_fields(const Field1D& a, const Field1D& b);
// ∫ Re f over the real line for a bump, used to normalize path integrals
double bump_integral(double radius);

struct CoefficientField1D {
    Field1D a; // real-valued principal coefficient
    Field1D b;
    double lo = 0.0;
    double hi = 1.0;
    bool degenerate = false;
};

enum class TmKind { schrodinger, schrodinger_signed, kdv };

struct TmVerdict {
    bool bounded = true;
    double supremum_estimate = 0.0;
    std::vector<double> witness; // interval (x0, x1) or ray (x..., ω..., T)
    std::optional<double> divergence_rate;
    std::string note;
};

TmVerdict tm_supremum_1d(const CoefficientField1D& coeffs, TmKind kind, const Grid1D& grid,
                         double threshold = 1e3);
TmVerdict tm_verdict_degenerate(const SchrodingerSpec& spec, double sigma);
TmVerdict tm_verdict_degenerate(const KdvSpec& spec, double sigma);
// grid-based check on the degenerate family a = x^2, b = 3(σ-σ_c)x (Schrödinger, signed sup)
// or a = x^3, b = 3(σ-σ_c)x^2 (KdV) over [ε, 1] for decreasing ε
TmVerdict tm_degenerate_scan(double sigma_minus_sigma_c, bool kdv, const std::vector<double>& eps_list,
                             int nodes_per_decade = 400);

// d <= 3 vector field with first and second derivatives
struct VectorFieldND {
    int d = 1;
    // b[j]
    std::function<void(const double* x, cplx* b)> value;
    // db[j*d + k] = ∂_k b^j
    std::function<void(const double* x, cplx* db)> jacobian;
    // lap[j] = Δ b^j
    std::function<void(const double* x, cplx* lap)> laplacian;
};

VectorFieldND zero_vector_field(int d);
VectorFieldND constant_vector_field(std::vector<cplx> c);
// b^j = amp[j] * exp(-1/(1-|x-c|^2/R^2)) inside the ball
VectorFieldND bump_vector_field(std::vector<cplx> amp, std::vector<double> center, double radius);

struct RayConditionSample {
    std::vector<double> x;
    std::vector<double> omega;
    double T = 1.0;
};

double ray_integral(const VectorFieldND& b, const RayConditionSample& s);
TmVerdict tm_ray_supremum_nd(const VectorFieldND& b, const std::vector<RayConditionSample>& samples,
                             double threshold = 1e3);
// rays through a lattice of base points and directions; used for the brute-force check
std::vector<RayConditionSample> ray_lattice(int d, double half_width, int points_per_dim, int directions, double T);

struct WeightAndGrowth {
    std::function<double(double)> w;
    double M = 1.0;
};

// w(x) = exp(∫_0^x Re b/2); M(T,μ) = inf over |y|,|y0| <= 1/μ of exp(-∫_{x0+y0}^{x0+2T+y} Re b/2)
WeightAndGrowth tm_weight_and_growth(const Field1D& b, double x0, double T, double mu);
// ∫_0^x Re b / 2
double half_primitive_re(const Field1D& b, double x);
double half_primitive_im(const Field1D& b, double x);

// unit-L² radial bump in d dimensions, support in the unit ball
struct Bump {
    int d = 1;
    double norm = 1.0;
    // value, radial derivatives φ'(s), φ''(s) in s = |z|^2
    void eval(double s, double& v, double& dv, double& ddv) const;
};
Bump unit_bump(int d);

struct TmPacketParams {
    double lambda = 64.0;
    double mu = 8.0;
    std::vector<double> x0{0.0};
    std::vector<double> omega0{1.0};
};

struct TmSample {
    cplx v, v_t, v_x, v_xx;
};

class TmPacket1D {
public:
    TmPacket1D(TmPacketParams params, Field1D b);

    // conjugated core ṽ
    TmSample core(double t, double x) const;
    // ũ = w^{-1} ṽ
    TmSample packet(double t, double x) const;
    double weight(double x) const;
    const TmPacketParams& params() const { return p_; }
    // support of ψ(x - 2λt)
    double center(double t) const { return p_.x0[0] + 2.0 * p_.lambda * t; }

private:
    TmPacketParams p_;
    Field1D b_;
    Bump bump_;
};

struct AdjointSample {
    cplx u, u_t;
    std::vector<cplx> grad;
    cplx lap;
};

class TmAdjointPacketND {
public:
    TmAdjointPacketND(TmPacketParams params, VectorFieldND b, int d);

    AdjointSample eval(double t, const double* x) const;
    int dim() const { return d_; }
    const TmPacketParams& params() const { return p_; }
    // M(T, μ) along the traversed ray x0 + y + 2sω0
    double growth_factor(double T) const;
    // L² norm on a tensor grid covering the support at time t
    double l2_norm(double t, int nodes_per_dim) const;

private:
    TmPacketParams p_;
    VectorFieldND b_;
    int d_;
    Bump bump_;
};

enum class TmResidualMode { direct, conjugated, adjoint };

// L² norm of the residual at time t on the grid (1-D packets)
double tm_residual(const TmPacket1D& packet, const Field1D& b, TmResidualMode mode, double t, const Grid1D& grid);
double tm_residual(const TmAdjointPacketND& packet, const VectorFieldND& b, double t, int nodes_per_dim);
// pointwise residuals, for tests
cplx tm_residual_point(const TmPacket1D& packet, const Field1D& b, TmResidualMode mode, double t, double x);
cplx tm_residual_point(const TmAdjointPacketND& packet, const VectorFieldND& b, double t, const double* x);

// uniform grid over the packet support at t resolving λ with `nodes_per_wavelength`
GridPtr tm_packet_grid(const TmPacketParams& p, double t, int nodes_per_wavelength, double pad = 0.05);

} // namespace dlab
