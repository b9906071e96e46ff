#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/norms.hpp"
#include "dlab/tm.hpp"

namespace dlab {

enum class EvolutionKind { model_linear_y, tm_schrodinger_1d, free_schrodinger, free_airy };
enum class Boundary { dirichlet_zero, periodic };

struct EvolutionProblem {
    EvolutionKind kind = EvolutionKind::free_schrodinger;
    GridPtr grid;
    Boundary bc = Boundary::dirichlet_zero;
    double dt = 1e-3;
    // first-order coefficient for tm_schrodinger_1d
    Field1D b = constant_field(0.0);
};

struct NamedNorm {
    std::string name;
    std::function<double(const GridField&)> eval;
};

struct NormLog {
    std::vector<std::string> names;
    std::vector<double> t;
    std::vector<std::vector<double>> rows; // rows[k][j] = norm j at t[k]

    std::vector<double> column(const std::string& name) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<GridField> snapshots;
    NormLog norm_log;
    bool unstable = false;
    // stopped because packet mass reached the outer 10% of the window
    bool boundary_reached = false;
    std::string note;
};

// Crank-Nicolson on the real (Re, Im) system with fourth-order centred stencils.
// Snapshots and norms are recorded at t = 0, every `record_every` steps and at the end.
Trajectory evolve(const EvolutionProblem& problem, const GridField& u0, double t_end, int record_every,
                  const std::vector<NamedNorm>& norms = {});

// fraction of the discrete spectral mass in the top octave of resolvable frequencies
double top_octave_fraction(const std::vector<cplx>& u);

struct RateFit {
    double rate = 0.0;
    std::optional<double> r_squared; // empty when the samples have no variance
    int samples = 0;
};

RateFit fit_exponential_rate(const NormLog& log, const std::string& name, double t_a, double t_b);
RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& values);

// max |d/dt log ||u||²_w| along the trajectory (centred differences on the recorded times)
double weighted_apriori_check(const Trajectory& traj, const WeightSpec& weight);

} // namespace dlab
