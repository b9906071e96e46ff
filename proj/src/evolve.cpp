#include "dlab/evolve.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fftw3.h>
#include <lapacke.h>

#include "dlab/error.hpp"

namespace dlab {

namespace {

// centred stencil weights for derivative `order` with the given radius, unit spacing
std::vector<double> centred(int order, int radius) {
    std::vector<double> nodes;
    for (int k = -radius; k <= radius; ++k) nodes.push_back(k);
    return fornberg_weights(0.0, nodes.data(), 2 * radius + 1, order)[order];
}

struct Stencils {
    int r = 2;
    std::vector<double> d1, d2, d3;
};

// L as a list of (row, col, value) on the interleaved (p_i, q_i) unknowns
struct Triplet {
    int i, j;
    double v;
};

std::vector<Triplet> assemble(const EvolutionProblem& pb, const Stencils& st) {
    const Grid1D& g = *pb.grid;
    const int n = static_cast<int>(g.size());
    const double h = g.step();
    const bool periodic = pb.bc == Boundary::periodic;
    std::vector<Triplet> out;
    auto node = [&](int i, int k) -> int {
        int j = i + k;
        if (periodic) return (j % n + n) % n;
        return (j < 0 || j >= n) ? -1 : j;
    };
    // add c * D_order applied to component `src` into the equation of component `dst` at node i
    auto add = [&](int i, int dst, int src, const std::vector<double>& w, double scale) {
        const int r = static_cast<int>(w.size() / 2);
        for (int k = -r; k <= r; ++k) {
            const int j = node(i, k);
            if (j < 0 || w[k + r] == 0.0) continue;
            out.push_back({2 * i + dst, 2 * j + src, scale * w[k + r]});
        }
    };
    const double h1 = 1.0 / h, h2 = 1.0 / (h * h), h3 = 1.0 / (h * h * h);
    for (int i = 0; i < n; ++i) {
        switch (pb.kind) {
        case EvolutionKind::model_linear_y:
            // p_t = -(q_yy + q_y), q_t = p_yy + 3 p_y
            add(i, 0, 1, st.d2, -h2);
            add(i, 0, 1, st.d1, -h1);
            add(i, 1, 0, st.d2, h2);
            add(i, 1, 0, st.d1, 3.0 * h1);
            break;
        case EvolutionKind::tm_schrodinger_1d: {
            const cplx b = pb.b.f(g.x[i]);
            // p_t = -(q_xx + b_r q_x + b_i p_x), q_t = p_xx + b_r p_x - b_i q_x
            add(i, 0, 1, st.d2, -h2);
            add(i, 0, 1, st.d1, -b.real() * h1);
            add(i, 0, 0, st.d1, -b.imag() * h1);
            add(i, 1, 0, st.d2, h2);
            add(i, 1, 0, st.d1, b.real() * h1);
            add(i, 1, 1, st.d1, -b.imag() * h1);
            break;
        }
        case EvolutionKind::free_schrodinger:
            add(i, 0, 1, st.d2, -h2);
            add(i, 1, 0, st.d2, h2);
            break;
        case EvolutionKind::free_airy:
            add(i, 0, 0, st.d3, -h3);
            add(i, 1, 1, st.d3, -h3);
            break;
        }
    }
    return out;
}

// (I - dt/2 L) z_{n+1} = (I + dt/2 L) z_n
class CnSolver {
public:
    virtual ~CnSolver() = default;
    virtual void step(std::vector<double>& z) = 0;
};

class BandedCn final : public CnSolver {
public:
    BandedCn(const std::vector<Triplet>& L, int size, int band, double dt) : n_(size), kl_(band), ku_(band) {
        ld_ = 2 * kl_ + ku_ + 1;
        ab_.assign(static_cast<std::size_t>(ld_) * n_, 0.0);
        plus_.assign(static_cast<std::size_t>(2 * band + 1) * n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            at(i, i) = 1.0;
            pl(i, i) = 1.0;
        }
        for (const auto& t : L) {
            at(t.i, t.j) -= 0.5 * dt * t.v;
            pl(t.i, t.j) += 0.5 * dt * t.v;
        }
        ipiv_.resize(n_);
        const int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ld_, ipiv_.data());
        if (info != 0) fail(ErrorKind::UnstableGrowth, "banded factorization failed, info = " + std::to_string(info));
    }

    void step(std::vector<double>& z) override {
        std::vector<double> rhs(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            const int lo = std::max(0, j - ku_), hi = std::min(n_ - 1, j + kl_);
            for (int i = lo; i <= hi; ++i) rhs[i] += pl(i, j) * z[j];
        }
        const int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ld_, ipiv_.data(),
                                        rhs.data(), n_);
        if (info != 0) fail(ErrorKind::UnstableGrowth, "banded solve failed");
        z.swap(rhs);
    }

private:
    double& at(int i, int j) { return ab_[static_cast<std::size_t>(j) * ld_ + kl_ + ku_ + i - j]; }
    // general band storage without LU fill rows for the explicit half-step
    double& pl(int i, int j) { return plus_[static_cast<std::size_t>(j) * (2 * kl_ + 1) + ku_ + i - j]; }

    int n_, kl_, ku_, ld_;
    std::vector<double> ab_, plus_;
    std::vector<lapack_int> ipiv_;
};

class SparseCn final : public CnSolver {
public:
    SparseCn(const std::vector<Triplet>& L, int size, double dt) {
        std::vector<Eigen::Triplet<double>> mt, pt;
        for (int i = 0; i < size; ++i) {
            mt.emplace_back(i, i, 1.0);
            pt.emplace_back(i, i, 1.0);
        }
        for (const auto& t : L) {
            mt.emplace_back(t.i, t.j, -0.5 * dt * t.v);
            pt.emplace_back(t.i, t.j, 0.5 * dt * t.v);
        }
        Eigen::SparseMatrix<double> M(size, size);
        M.setFromTriplets(mt.begin(), mt.end());
        plus_.resize(size, size);
        plus_.setFromTriplets(pt.begin(), pt.end());
        lu_.compute(M);
        if (lu_.info() != Eigen::Success) fail(ErrorKind::UnstableGrowth, "sparse factorization failed");
    }

    void step(std::vector<double>& z) override {
        Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        const Eigen::VectorXd rhs = plus_ * zv;
        zv = lu_.solve(rhs);
    }

private:
    Eigen::SparseMatrix<double> plus_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

double outer_fraction(const std::vector<cplx>& u, double frac) {
    const std::size_t n = u.size();
    const std::size_t edge = static_cast<std::size_t>(std::ceil(frac * n));
    double total = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::norm(u[i]);
        total += a;
        if (i < edge || i + edge >= n) outer += a;
    }
    return total > 0.0 ? outer / total : 0.0;
}

bool uniform(const Grid1D& g) {
    const double h = g.step();
    for (std::size_t i = 1; i < g.size(); ++i)
        if (std::abs(g.nodes[i] - g.nodes[i - 1] - h) > 1e-9 * std::abs(h)) return false;
    return true;
}

} // namespace

std::vector<double> NormLog::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), "unknown norm column " + name);
    const std::size_t j = static_cast<std::size_t>(it - names.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

double top_octave_fraction(const std::vector<cplx>& u) {
    const int n = static_cast<int>(u.size());
    std::vector<cplx> in(u), out(n);
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    double total = 0.0, top = 0.0;
    for (int k = 0; k < n; ++k) {
        const int freq = k <= n / 2 ? k : n - k;
        const double a = std::norm(out[k]);
        total += a;
        if (freq > n / 4) top += a;
    }
    return total > 0.0 ? top / total : 0.0;
}

Trajectory evolve(const EvolutionProblem& pb, const GridField& u0, double t_end, int record_every,
                  const std::vector<NamedNorm>& norms) {
    require(pb.grid != nullptr && pb.grid->size() >= 16, "evolution needs a grid with at least 16 nodes");
    require(pb.dt > 0.0, "dt must be positive");
    require(t_end >= 0.0, "t_end must be nonnegative");
    require(record_every >= 1, "record_every must be at least 1");
    require(u0.values.size() == pb.grid->size(), "initial data does not match the grid");
    require(uniform(*pb.grid), "evolution grids must be uniform in the native coordinate");
    if (pb.bc == Boundary::dirichlet_zero)
        require(outer_fraction(u0.values, 0.1) < 1e-8, "initial data must vanish within 10% of the boundary");
    if (top_octave_fraction(u0.values) > 0.05)
        fail(ErrorKind::UnderResolved, "more than 5% of the spectral mass sits in the top octave");

    Stencils st;
    st.d1 = centred(1, 2);
    st.d2 = centred(2, 2);
    st.d3 = centred(3, 3);
    const int radius = pb.kind == EvolutionKind::free_airy ? 3 : 2;
    const int n = static_cast<int>(pb.grid->size());
    const auto L = assemble(pb, st);
    const int steps = static_cast<int>(std::ceil(t_end / pb.dt - 1e-9));
    const double dt = steps > 0 ? t_end / steps : pb.dt;

    std::unique_ptr<CnSolver> solver;
    if (pb.bc == Boundary::periodic) solver = std::make_unique<SparseCn>(L, 2 * n, dt);
    else solver = std::make_unique<BandedCn>(L, 2 * n, 2 * radius + 1, dt);

    Trajectory tr;
    for (const auto& nm : norms) tr.norm_log.names.push_back(nm.name);
    std::vector<double> z(2 * n);
    for (int i = 0; i < n; ++i) {
        z[2 * i] = u0.values[i].real();
        z[2 * i + 1] = u0.values[i].imag();
    }
    auto record = [&](double t) {
        GridField snap{pb.grid, std::vector<cplx>(n), u0.label};
        for (int i = 0; i < n; ++i) snap.values[i] = cplx(z[2 * i], z[2 * i + 1]);
        std::vector<double> row;
        for (const auto& nm : norms) row.push_back(nm.eval(snap));
        tr.times.push_back(t);
        tr.norm_log.t.push_back(t);
        tr.norm_log.rows.push_back(std::move(row));
        tr.snapshots.push_back(std::move(snap));
    };
    record(0.0);
    for (int s = 1; s <= steps; ++s) {
        solver->step(z);
        if (s % record_every != 0 && s != steps) continue;
        record(s * dt);
        const auto& snap = tr.snapshots.back().values;
        double mass = 0.0;
        for (const auto& v : snap) mass = std::max(mass, std::abs(v));
        bool blown = !(mass < 1e12);
        for (double v : tr.norm_log.rows.back()) blown = blown || !(v < 1e12);
        if (blown) {
            tr.unstable = true;
            tr.note = "a norm exceeded 1e12";
            break;
        }
        if (pb.bc == Boundary::dirichlet_zero && outer_fraction(snap, 0.1) > 1e-8) {
            tr.boundary_reached = true;
            tr.note = "stopped: packet mass reached the outer 10% of the window";
            break;
        }
    }
    return tr;
}

RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v) {
    require(t.size() == v.size(), "times and values differ in length");
    if (t.size() < 8) fail(ErrorKind::InvalidArgument, "need at least 8 samples in the fit window");
    for (double x : v)
        if (!(x >= 1e-14)) fail(ErrorKind::DegenerateFit, "norm below 1e-14 in the fit window");
    const double n = static_cast<double>(t.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = std::log(v[i]);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
        syy += y * y;
    }
    const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    require(vx > 0.0, "fit window has no time spread");
    RateFit r;
    r.rate = cov / vx;
    r.samples = static_cast<int>(t.size());
    // log-values with no spread beyond rounding have no meaningful r²
    if (vy > 1e-24 * std::max(1.0, sy * sy / n)) r.r_squared = cov * cov / (vx * vy);
    if (std::abs(r.rate) < 1e-12) r.rate = 0.0;
    return r;
}

RateFit fit_exponential_rate(const NormLog& log, const std::string& name, double t_a, double t_b) {
    const auto col = log.column(name);
    std::vector<double> t, v;
    for (std::size_t k = 0; k < log.t.size(); ++k) {
        if (log.t[k] < t_a - 1e-15 || log.t[k] > t_b + 1e-15) continue;
        t.push_back(log.t[k]);
        v.push_back(col[k]);
    }
    return fit_exponential_rate(t, v);
}

double weighted_apriori_check(const Trajectory& tr, const WeightSpec& weight) {
    require(tr.snapshots.size() >= 3, "need at least three snapshots");
    std::vector<double> lg;
    for (const auto& s : tr.snapshots) {
        const double nrm = weighted_norm(s, weight);
        if (!(nrm > 0.0)) fail(ErrorKind::DegenerateFit, "weighted norm vanished");
        lg.push_back(2.0 * std::log(nrm));
    }
    double mx = 0.0;
    for (std::size_t k = 1; k + 1 < lg.size(); ++k)
        mx = std::max(mx, std::abs((lg[k + 1] - lg[k - 1]) / (tr.times[k + 1] - tr.times[k - 1])));
    return mx;
}

} // namespace dlab
