#pragma once

#include <vector>

namespace dlab {

// p(x, ξ) = -A x^n ξ^m
struct DegenerateSymbol {
    double A = 1.0;
    double n = 2.0;
    int m = 2;
};

struct BicharState {
    double X = 0.0;
    double Xi = 0.0;
    double t = 0.0;
};

struct BicharTrajectory {
    std::vector<BicharState> states;
    bool blowup = false;
};

struct BicharRhs {
    double dX;
    double dXi;
};

BicharRhs bichar_rhs(const DegenerateSymbol& sym, const BicharState& s);

// Dormand-Prince 5(4) with per-step relative error control; negative t_end runs backward.
BicharTrajectory integrate_bichar(const DegenerateSymbol& sym, const BicharState& s0, double t_end, double rel_tol);

// Ξ(t) from the conserved quantity X^n Ξ^m
double xi_closed_form(const DegenerateSymbol& sym, const BicharState& s0, double t);
double doubling_time(const DegenerateSymbol& sym, const BicharState& s0);

} // namespace dlab
