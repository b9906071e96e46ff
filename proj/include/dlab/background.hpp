#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dlab/jet.hpp"
#include "dlab/models.hpp"

namespace dlab {

using Json = nlohmann::ordered_json;

enum class BackgroundKind { ds_linear, kdv_cubic, sampled };
enum class YKind { schrodinger, kdv };

// x-Taylor jets of f and f_t at a point (t, x).
struct BgJet {
    Jet<cplx, 4> f;
    Jet<cplx, 2> ft;
};

class Background {
public:
    virtual ~Background() = default;

    virtual BackgroundKind kind() const = 0;
    virtual BgJet jet(double t, double x) const = 0;
    virtual double x1() const = 0;
    // f'(0,0) for Schrödinger backgrounds, f_xxx(0,0)/6 for KdV
    virtual double A() const = 0;
    virtual Json descriptor() const = 0;
    // right end of the region where f is an exact solution
    virtual double x_exact() const { return x1(); }
    // f = e^{iθ(t)} r(x) with r real and t-independent: Im(f̄ f_x) = 0 and ∂_t|f| = 0
    virtual bool rotating_real_profile() const { return false; }

    cplx f(double t, double x) const { return jet(t, x).f.c[0]; }
};

using BackgroundPtr = std::shared_ptr<const Background>;

BackgroundPtr ds_linear_background(const SchrodingerSpec& spec, double x1 = 1.0);
// glue: strength c of the tail factor exp(-c e^{-1/u}) on [x_cut, x1]; x_cut = x1 means no glue
BackgroundPtr kdv_cubic_background(double alpha1, double beta0, double x1, double x_cut, double glue = 1.0);
// static profile sampled on a uniform x-grid; quintic splines for f, f_x, f_xx
BackgroundPtr sampled_background(std::vector<double> x, std::vector<cplx> f, double x1,
                                 std::optional<double> A = std::nullopt);
BackgroundPtr background_from_json(const Json& desc, const SchrodingerSpec* sspec, const KdvSpec* kspec);

double kdv_beta(double alpha1, double beta0, double t);
double kdv_beta_rhs(double alpha1, double beta);

// residual of the background itself in the nonlinear equation
cplx schrodinger_background_residual(const Background& bg, const SchrodingerSpec& spec, double t, double x);
double kdv_background_residual(const Background& bg, const KdvSpec& spec, double t, double x);

// sup|f_xx(0,x)| x1 < f_x(0,0)/2 on [-x1, x1]; throws X1ConditionViolated
void check_x1_condition(const Background& bg, int samples = 401);

double y_transform(const Background& bg, double t, double x, YKind kind);
// y and its first three x-derivatives at (t, x)
Jet<double, 3> y_jet(const Background& bg, double t, double x, YKind kind);
double y_inverse(const Background& bg, double t, double y, YKind kind);
double dt_y(const Background& bg, double t, double x, YKind kind);
// KdV ∂_t y with f_t replaced through the equation, integrated over [x, x_upper]
double dt_y_equation_form(const Background& bg, const KdvSpec& spec, double t, double x, double x_upper);
// the same integral with the actual f_t, for comparison on the exact region
double dt_y_partial(const Background& bg, double t, double x, double x_upper, YKind kind);

struct TaylorCoeffState {
    double t = 0.0;
    double a = 0.0;
    std::vector<cplx> coeffs; // ∂_x^k f(t, a), k = 0..s-1
};

std::vector<TaylorCoeffState> taylor_ode_schrodinger(const SchrodingerSpec& spec, std::vector<cplx> coeffs0,
                                                     double t_end, double rel_tol, int samples = 33);

// four-term Y-norm of f(t, ·) on [a, b] using analytic derivatives at `samples` points
double y_capital_norm(const Background& bg, double t, double a, double b, int samples = 2001);

} // namespace dlab
