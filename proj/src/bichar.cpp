#include "dlab/bichar.hpp"

#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "dlab/error.hpp"

namespace dlab {

namespace {

double checked_pow(double base, double e) {
    if (base < 0.0 && e != std::floor(e))
        fail(ErrorKind::NonrealPower, "negative base " + std::to_string(base) + " with non-integer exponent");
    return std::pow(base, e);
}

struct BlowupSignal {};

// (n - m) A X0^{n-1} Xi0^{m-1}, the rate in front of t
double growth_coefficient(const DegenerateSymbol& sym, const BicharState& s0) {
    return sym.A * checked_pow(s0.X, sym.n - 1.0) * std::pow(s0.Xi, sym.m - 1);
}

} // namespace

BicharRhs bichar_rhs(const DegenerateSymbol& sym, const BicharState& s) {
    const double xn1 = checked_pow(s.X, sym.n - 1.0);
    const double xn = checked_pow(s.X, sym.n);
    return {-sym.A * sym.m * xn * std::pow(s.Xi, sym.m - 1), sym.A * sym.n * xn1 * std::pow(s.Xi, sym.m)};
}

BicharTrajectory integrate_bichar(const DegenerateSymbol& sym, const BicharState& s0, double t_end, double rel_tol) {
    require(rel_tol > 1e-14 && rel_tol < 1e-2, "rel_tol must lie in (1e-14, 1e-2)");
    BicharTrajectory out;
    out.states.push_back(s0);
    if (t_end == s0.t) return out;

    using State = std::array<double, 2>;
    namespace ode = boost::numeric::odeint;
    auto rhs = [&](const State& x, State& dx, double t) {
        const auto r = bichar_rhs(sym, {x[0], x[1], t});
        dx[0] = r.dX;
        dx[1] = r.dXi;
    };
    State x{s0.X, s0.Xi};
    auto stepper = ode::make_controlled(1e-300, rel_tol, ode::runge_kutta_dopri5<State>());
    const double span = t_end - s0.t;
    bool first = true;
    try {
        ode::integrate_adaptive(stepper, rhs, x, s0.t, t_end, span * 1e-4, [&](const State& st, double t) {
            if (first) {
                first = false;
                return;
            }
            out.states.push_back({st[0], st[1], t});
            if (std::abs(st[1]) > 1e12) throw BlowupSignal{};
        });
    } catch (const BlowupSignal&) {
        out.blowup = true;
    }
    return out;
}

double xi_closed_form(const DegenerateSymbol& sym, const BicharState& s0, double t) {
    const double c = growth_coefficient(sym, s0);
    const double dt = t - s0.t;
    if (static_cast<double>(sym.m) == sym.n) return s0.Xi * std::exp(sym.n * c * dt);
    const double nm = sym.n - sym.m;
    const double bracket = 1.0 + nm * c * dt;
    if (!(bracket > 0.0))
        fail(ErrorKind::OutsideDomainOfValidity, "closed form bracket " + std::to_string(bracket) + " <= 0");
    return s0.Xi * std::pow(bracket, sym.n / nm);
}

double doubling_time(const DegenerateSymbol& sym, const BicharState& s0) {
    const auto r = bichar_rhs(sym, s0);
    if (!(r.dXi * s0.Xi > 0.0)) fail(ErrorKind::NoDoubling, "|Xi| is nonincreasing from this state");
    const double c = growth_coefficient(sym, s0);
    if (static_cast<double>(sym.m) == sym.n) return std::log(2.0) / (sym.n * c);
    const double nm = sym.n - sym.m;
    return (std::pow(2.0, nm / sym.n) - 1.0) / (nm * c);
}

} // namespace dlab
