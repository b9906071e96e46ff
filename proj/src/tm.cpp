#include "dlab/tm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dlab/error.hpp"
#include "dlab/jet.hpp"

namespace dlab {

namespace {

using GL5 = boost::math::quadrature::gauss<double, 5>;
using GL10 = boost::math::quadrature::gauss<double, 10>;
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double primitive(const std::function<double(double)>& g, double a, double b) {
    if (a == b) return 0.0;
    return GK::integrate(g, a, b, 15, 1e-13);
}

// maximizes g on [lo, hi] from an 11-point lattice plus golden-section polish
double lattice_max(const std::function<double(double)>& g, double lo, double hi) {
    double best = -std::numeric_limits<double>::infinity();
    int ib = 0;
    for (int i = 0; i <= 10; ++i) {
        const double v = g(lo + (hi - lo) * i / 10.0);
        if (v > best) {
            best = v;
            ib = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, ib - 1) / 10.0;
    double b = lo + (hi - lo) * std::min(10, ib + 1) / 10.0;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 60 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return std::max({best, gc, gd});
}

Jet<double, 2> bump_jet(double s) {
    Jet<double, 2> S = Jet<double, 2>::variable(s);
    return exp(-(1.0 / (1.0 - S)));
}

double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

Field1D constant_field(cplx c) {
    return {[c](double) { return c; }, [](double) { return cplx(0.0); }, [](double) { return cplx(0.0); }};
}

Field1D linear_field(cplx slope, cplx offset) {
    return {[=](double x) { return slope * x + offset; }, [=](double) { return slope; },
            [](double) { return cplx(0.0); }};
}

Field1D power_field(cplx coeff, int k) {
    return {[=](double x) { return coeff * std::pow(x, k); },
            [=](double x) { return k == 0 ? cplx(0.0) : coeff * double(k) * std::pow(x, k - 1); },
            [=](double x) { return k < 2 ? cplx(0.0) : coeff * double(k * (k - 1)) * std::pow(x, k - 2); }};
}

Field1D bump_field(cplx amp, double center, double radius) {
    auto at = [=](double x, int order) -> cplx {
        const double z = (x - center) / radius;
        if (std::abs(z) >= 1.0) return 0.0;
        Jet<double, 2> Z = Jet<double, 2>::variable(z);
        const auto v = exp(-(1.0 / (1.0 - Z * Z)));
        return amp * v.d(order) / std::pow(radius, order);
    };
    return {[=](double x) { return at(x, 0); }, [=](double x) { return at(x, 1); },
            [=](double x) { return at(x, 2); }};
}

Field1D sum_fields(const Field1D& a, const Field1D& b) {
    return {[=](double x) { return a.f(x) + b.f(x); }, [=](double x) { return a.fx(x) + b.fx(x); },
            [=](double x) { return a.fxx(x) + b.fxx(x); }};
}

double bump_integral(double radius) {
    return radius * GK::integrate([](double z) { return std::exp(-1.0 / (1.0 - z * z)); }, -1.0, 1.0, 15, 1e-14);
}

TmVerdict tm_supremum_1d(const CoefficientField1D& c, TmKind kind, const Grid1D& grid, double threshold) {
    const auto& x = grid.x;
    require(x.front() <= c.lo + 1e-12 * std::max(1.0, std::abs(c.lo)) &&
                x.back() >= c.hi - 1e-12 * std::max(1.0, std::abs(c.hi)),
            "grid must cover the coefficient domain");
    const std::size_t n = x.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (c.a.f(x[i]).real() == 0.0 && !c.degenerate)
            fail(ErrorKind::PrincipalVanishes, "a = 0 at x = " + std::to_string(x[i]));
    const double div = kind == TmKind::kdv ? 3.0 : 2.0;
    auto g = [&](double s) { return c.b.f(s).real() / (div * c.a.f(s).real()); };
    std::vector<double> P(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) P[i] = P[i - 1] + GL5::integrate(g, x[i - 1], x[i]);

    TmVerdict v;
    if (kind == TmKind::schrodinger) {
        const auto [mn, mx] = std::minmax_element(P.begin(), P.end());
        v.supremum_estimate = *mx - *mn;
        v.witness = {x[mn - P.begin()], x[mx - P.begin()]};
        if (v.witness[0] > v.witness[1]) std::swap(v.witness[0], v.witness[1]);
    } else {
        // sup over x0 < x1 of P(x1) - P(x0)
        double best = 0.0, run_min = P[0];
        std::size_t imin = 0, a = 0, b = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (P[i] - run_min > best) {
                best = P[i] - run_min;
                a = imin;
                b = i;
            }
            if (P[i] < run_min) {
                run_min = P[i];
                imin = i;
            }
        }
        v.supremum_estimate = best;
        v.witness = {x[a], x[b]};
    }
    v.bounded = v.supremum_estimate < threshold;
    v.note = "grid estimate over the sampled domain";
    return v;
}

namespace {

TmVerdict degenerate_verdict(double diff, double coefficient, const char* family) {
    TmVerdict v;
    v.bounded = diff <= 0.0;
    v.supremum_estimate = v.bounded ? 0.0 : std::numeric_limits<double>::infinity();
    v.witness = {0.0, 1.0};
    if (!v.bounded) v.divergence_rate = coefficient * diff;
    v.note = family;
    return v;
}

} // namespace

TmVerdict tm_verdict_degenerate(const SchrodingerSpec& spec, double sigma) {
    return degenerate_verdict(sigma - spec.sigma_c(), 1.5, "Schrödinger: Re b/(2a) = 3(σ-σ_c)/(2x)");
}

TmVerdict tm_verdict_degenerate(const KdvSpec& spec, double sigma) {
    return degenerate_verdict(sigma - spec.sigma_c(), 1.0, "KdV: b/(3a) = (σ-σ_c)/x");
}

TmVerdict tm_degenerate_scan(double ds, bool kdv, const std::vector<double>& eps_list, int nodes_per_decade) {
    require(eps_list.size() >= 2, "need at least two domain sizes");
    CoefficientField1D c;
    if (kdv) {
        c.a = power_field(1.0, 3);
        c.b = power_field(3.0 * ds, 2);
    } else {
        c.a = power_field(1.0, 2);
        c.b = power_field(3.0 * ds, 1);
    }
    c.degenerate = true;
    c.hi = 1.0;
    std::vector<double> logs, sups;
    TmVerdict last;
    for (double eps : eps_list) {
        c.lo = eps;
        const int nodes = std::max(16, static_cast<int>(nodes_per_decade * std::log10(1.0 / eps)));
        auto g = make_log_grid(eps, 1.0, nodes);
        last = tm_supremum_1d(c, kdv ? TmKind::kdv : TmKind::schrodinger_signed, *g,
                              std::numeric_limits<double>::infinity());
        logs.push_back(std::log(1.0 / eps));
        sups.push_back(last.supremum_estimate);
    }
    const double slope = linear_fit_slope(logs, sups);
    TmVerdict v = last;
    v.bounded = slope < 1e-3;
    if (!v.bounded) {
        v.divergence_rate = slope;
        v.supremum_estimate = std::numeric_limits<double>::infinity();
    }
    v.note = "fitted growth of the sup in log(1/eps)";
    return v;
}

VectorFieldND zero_vector_field(int d) { return constant_vector_field(std::vector<cplx>(d, 0.0)); }

VectorFieldND constant_vector_field(std::vector<cplx> c) {
    VectorFieldND f;
    f.d = static_cast<int>(c.size());
    const int d = f.d;
    f.value = [c](const double*, cplx* b) { std::copy(c.begin(), c.end(), b); };
    f.jacobian = [d](const double*, cplx* db) { std::fill(db, db + d * d, cplx(0.0)); };
    f.laplacian = [d](const double*, cplx* l) { std::fill(l, l + d, cplx(0.0)); };
    return f;
}

VectorFieldND bump_vector_field(std::vector<cplx> amp, std::vector<double> center, double R) {
    require(amp.size() == center.size(), "amplitude and center dimensions differ");
    VectorFieldND f;
    f.d = static_cast<int>(amp.size());
    const int d = f.d;
    auto radial = [=](const double* x, double& s, std::vector<double>& z) {
        z.resize(d);
        s = 0.0;
        for (int k = 0; k < d; ++k) {
            z[k] = x[k] - center[k];
            s += z[k] * z[k];
        }
        s /= R * R;
    };
    f.value = [=](const double* x, cplx* b) {
        double s;
        std::vector<double> z;
        radial(x, s, z);
        const double v = s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
        for (int j = 0; j < d; ++j) b[j] = amp[j] * v;
    };
    f.jacobian = [=](const double* x, cplx* db) {
        double s;
        std::vector<double> z;
        radial(x, s, z);
        const double dv = s < 1.0 ? bump_jet(s).d(1) : 0.0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) db[j * d + k] = amp[j] * dv * 2.0 * z[k] / (R * R);
    };
    f.laplacian = [=](const double* x, cplx* l) {
        double s;
        std::vector<double> z;
        radial(x, s, z);
        double lap = 0.0;
        if (s < 1.0) {
            const auto J = bump_jet(s);
            // φ(|z|²/R²): Δ = 4 s φ'' / R² + 2 d φ' / R²
            lap = (4.0 * s * J.d(2) + 2.0 * d * J.d(1)) / (R * R);
        }
        for (int j = 0; j < d; ++j) l[j] = amp[j] * lap;
    };
    return f;
}

double ray_integral(const VectorFieldND& b, const RayConditionSample& s) {
    const int d = b.d;
    require(static_cast<int>(s.x.size()) == d && static_cast<int>(s.omega.size()) == d, "ray dimension mismatch");
    double nrm = 0.0;
    for (double o : s.omega) nrm += o * o;
    require(std::abs(std::sqrt(nrm) - 1.0) < 1e-12, "ray direction must be a unit vector");
    std::vector<double> p(d);
    std::vector<cplx> bv(d);
    auto g = [&](double sp) {
        for (int k = 0; k < d; ++k) p[k] = s.x[k] - 2.0 * sp * s.omega[k];
        b.value(p.data(), bv.data());
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += bv[j].real() * s.omega[j];
        return acc;
    };
    const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * std::abs(s.T) / 0.05)));
    double total = 0.0;
    for (int k = 0; k < panels; ++k)
        total += GL10::integrate(g, s.T * k / panels, s.T * (k + 1) / panels);
    return total;
}

TmVerdict tm_ray_supremum_nd(const VectorFieldND& b, const std::vector<RayConditionSample>& samples,
                             double threshold) {
    require(b.d >= 1 && b.d <= 3, "dimension must be 1, 2 or 3");
    TmVerdict v;
    v.supremum_estimate = 0.0;
    for (const auto& s : samples) {
        const double I = ray_integral(b, s);
        if (I > v.supremum_estimate || v.witness.empty()) {
            if (I > v.supremum_estimate) v.supremum_estimate = I;
            v.witness = s.x;
            v.witness.insert(v.witness.end(), s.omega.begin(), s.omega.end());
            v.witness.push_back(s.T);
        }
    }
    v.bounded = v.supremum_estimate < threshold;
    v.note = "sampled rays; a lower bound on the true supremum";
    return v;
}

std::vector<RayConditionSample> ray_lattice(int d, double hw, int ppd, int directions, double T) {
    require(d >= 1 && d <= 3 && ppd >= 1 && directions >= 1, "bad ray lattice");
    std::vector<std::vector<double>> dirs;
    if (d == 1) {
        dirs = {{1.0}, {-1.0}};
    } else if (d == 2) {
        for (int k = 0; k < directions; ++k) {
            const double a = 2.0 * std::numbers::pi * k / directions;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
    } else {
        const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < directions; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / directions, r = std::sqrt(1.0 - z * z);
            dirs.push_back({r * std::cos(ga * k), r * std::sin(ga * k), z});
        }
    }
    std::vector<RayConditionSample> out;
    std::vector<int> idx(d, 0);
    const int total = static_cast<int>(std::pow(ppd, d));
    for (int c = 0; c < total; ++c) {
        std::vector<double> x(d);
        int rem = c;
        for (int k = 0; k < d; ++k) {
            const int i = rem % ppd;
            rem /= ppd;
            x[k] = ppd == 1 ? 0.0 : -hw + 2.0 * hw * i / (ppd - 1);
        }
        for (const auto& o : dirs) out.push_back({x, o, T});
    }
    return out;
}

double half_primitive_re(const Field1D& b, double x) {
    return 0.5 * primitive([&](double s) { return b.f(s).real(); }, 0.0, x);
}

double half_primitive_im(const Field1D& b, double x) {
    return 0.5 * primitive([&](double s) { return b.f(s).imag(); }, 0.0, x);
}

WeightAndGrowth tm_weight_and_growth(const Field1D& b, double x0, double T, double mu) {
    require(mu > 0.0, "mu must be positive");
    WeightAndGrowth out;
    out.w = [b](double x) { return std::exp(half_primitive_re(b, x)); };
    const double r = 1.0 / mu;
    auto W = [&](double x) { return half_primitive_re(b, x); };
    const double top = lattice_max([&](double y) { return W(x0 + 2.0 * T + y); }, -r, r);
    const double bottom = -lattice_max([&](double y0) { return -W(x0 + y0); }, -r, r);
    out.M = std::exp(-(top - bottom));
    return out;
}

void Bump::eval(double s, double& v, double& dv, double& ddv) const {
    if (s >= 1.0) {
        v = dv = ddv = 0.0;
        return;
    }
    const auto J = bump_jet(s);
    v = norm * J.c[0];
    dv = norm * J.d(1);
    ddv = norm * J.d(2);
}

Bump unit_bump(int d) {
    require(d >= 1 && d <= 3, "dimension must be 1, 2 or 3");
    const double area = d == 1 ? 2.0 : (d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
    const double I = GK::integrate(
        [d](double r) {
            const double e = std::exp(-1.0 / (1.0 - r * r));
            return std::pow(r, d - 1) * e * e;
        },
        0.0, 1.0, 15, 1e-15);
    return {d, 1.0 / std::sqrt(area * I)};
}

TmPacket1D::TmPacket1D(TmPacketParams params, Field1D b) : p_(std::move(params)), b_(std::move(b)), bump_(unit_bump(1)) {
    require(p_.x0.size() == 1, "1-D packet needs a scalar center");
}

double TmPacket1D::weight(double x) const { return std::exp(half_primitive_re(b_, x)); }

TmSample TmPacket1D::core(double t, double x) const {
    const double lam = p_.lambda, mu = p_.mu;
    const double xi = x - 2.0 * lam * t;
    const double z = mu * (xi - p_.x0[0]);
    double v, dv, ddv;
    bump_.eval(z * z, v, dv, ddv);
    const double amp = std::sqrt(mu);
    const double psi = amp * v;
    const double psi1 = amp * mu * 2.0 * z * dv;
    const double psi2 = amp * mu * mu * (4.0 * z * z * ddv + 2.0 * dv);
    TmSample s{};
    if (psi == 0.0 && psi1 == 0.0 && psi2 == 0.0) return s;
    const double Phi = half_primitive_im(b_, x) - half_primitive_im(b_, xi);
    const double Phi_x = 0.5 * (b_.f(x).imag() - b_.f(xi).imag());
    const double Phi_xx = 0.5 * (b_.fx(x).imag() - b_.fx(xi).imag());
    const double Phi_t = lam * b_.f(xi).imag();
    const cplx I(0, 1);
    const cplx e = std::exp(I * (lam * x - lam * lam * t - Phi));
    const cplx th_x = I * (lam - Phi_x), th_xx = -I * Phi_xx, th_t = -I * (lam * lam + Phi_t);
    s.v = e * psi;
    s.v_x = e * (th_x * psi + psi1);
    s.v_xx = e * ((th_xx + th_x * th_x) * psi + 2.0 * th_x * psi1 + psi2);
    s.v_t = e * (th_t * psi - 2.0 * lam * psi1);
    return s;
}

TmSample TmPacket1D::packet(double t, double x) const {
    const TmSample c = core(t, x);
    const double winv = std::exp(-half_primitive_re(b_, x));
    const double r = 0.5 * b_.f(x).real(), rx = 0.5 * b_.fx(x).real();
    TmSample s;
    s.v = winv * c.v;
    s.v_x = winv * (c.v_x - r * c.v);
    s.v_xx = winv * (c.v_xx - 2.0 * r * c.v_x + (r * r - rx) * c.v);
    s.v_t = winv * c.v_t;
    return s;
}

TmAdjointPacketND::TmAdjointPacketND(TmPacketParams params, VectorFieldND b, int d)
    : p_(std::move(params)), b_(std::move(b)), d_(d), bump_(unit_bump(d)) {
    require(d >= 1 && d <= 3 && b_.d == d, "dimension mismatch for the adjoint packet");
    require(static_cast<int>(p_.x0.size()) == d && static_cast<int>(p_.omega0.size()) == d,
            "x0 and omega0 must have dimension d");
}

AdjointSample TmAdjointPacketND::eval(double t, const double* x) const {
    const int d = d_;
    const double lam = p_.lambda, mu = p_.mu;
    const auto& om = p_.omega0;
    const cplx I(0, 1);
    AdjointSample out;
    out.grad.assign(d, 0.0);

    // Ψ = μ^{d/2} ψ1(μ(x - 2λωt - x0))
    std::vector<double> z(d);
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        z[k] = mu * (x[k] - 2.0 * lam * om[k] * t - p_.x0[k]);
        s += z[k] * z[k];
    }
    double v, dv, ddv;
    bump_.eval(s, v, dv, ddv);
    if (v == 0.0 && dv == 0.0) return out;
    const double amp = std::pow(mu, 0.5 * d);
    const double Psi = amp * v;
    std::vector<double> gPsi(d);
    double lapPsi = amp * mu * mu * (4.0 * s * ddv + 2.0 * d * dv);
    double omega_grad_psi = 0.0;
    for (int k = 0; k < d; ++k) {
        gPsi[k] = amp * mu * 2.0 * z[k] * dv;
        omega_grad_psi += om[k] * gPsi[k];
    }

    // E = ∫_0^{λt} b̄^j(x - 2sω) ω_j ds and its derivatives
    cplx E = 0.0, lapE = 0.0;
    std::vector<cplx> gE(d, 0.0);
    const double L = lam * t;
    if (L != 0.0) {
        std::vector<double> p(d);
        std::vector<cplx> bv(d), db(d * d), lb(d);
        const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * std::abs(L) / 0.05)));
        const auto& absc = GL10::abscissa();
        const auto& wts = GL10::weights();
        auto accumulate = [&](double sp, double w) {
            for (int k = 0; k < d; ++k) p[k] = x[k] - 2.0 * sp * om[k];
            b_.value(p.data(), bv.data());
            b_.jacobian(p.data(), db.data());
            b_.laplacian(p.data(), lb.data());
            for (int j = 0; j < d; ++j) {
                E += w * std::conj(bv[j]) * om[j];
                lapE += w * std::conj(lb[j]) * om[j];
                for (int k = 0; k < d; ++k) gE[k] += w * std::conj(db[j * d + k]) * om[j];
            }
        };
        for (int q = 0; q < panels; ++q) {
            const double a = L * q / panels, b = L * (q + 1) / panels;
            const double c = 0.5 * (a + b), h = 0.5 * (b - a);
            for (std::size_t i = 0; i < absc.size(); ++i) {
                if (absc[i] == 0.0) {
                    accumulate(c, h * wts[i]);
                } else {
                    accumulate(c + h * absc[i], h * wts[i]);
                    accumulate(c - h * absc[i], h * wts[i]);
                }
            }
        }
    }
    // Θ_t = -iλ² + λ b̄^j(x - 2λtω) ω_j
    std::vector<double> pe(d);
    std::vector<cplx> be(d);
    for (int k = 0; k < d; ++k) pe[k] = x[k] - 2.0 * L * om[k];
    b_.value(pe.data(), be.data());
    cplx th_t = -I * lam * lam;
    for (int j = 0; j < d; ++j) th_t += lam * std::conj(be[j]) * om[j];

    double phase = -lam * lam * t;
    for (int k = 0; k < d; ++k) phase += lam * om[k] * x[k];
    const cplx e = std::exp(I * phase + E);
    cplx sq = 0.0, cross = 0.0;
    std::vector<cplx> gTh(d);
    for (int k = 0; k < d; ++k) {
        gTh[k] = I * lam * om[k] + gE[k];
        sq += gTh[k] * gTh[k];
        cross += gTh[k] * gPsi[k];
        out.grad[k] = e * (gTh[k] * Psi + gPsi[k]);
    }
    out.u = e * Psi;
    out.u_t = e * (th_t * Psi - 2.0 * lam * omega_grad_psi);
    out.lap = e * ((lapE + sq) * Psi + 2.0 * cross + lapPsi);
    return out;
}

double TmAdjointPacketND::growth_factor(double T) const {
    const int d = d_;
    const double r = 1.0 / p_.mu;
    auto J = [&](const std::vector<double>& y) {
        std::vector<double> base(d), back(d);
        for (int k = 0; k < d; ++k) {
            // ray x0 + y + 2sω, written as x - 2s(-ω) for ray_integral
            base[k] = p_.x0[k] + y[k];
            back[k] = -p_.omega0[k];
        }
        return ray_integral(b_, {base, back, T});
    };
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> arg(d, 0.0);
    const int total = static_cast<int>(std::pow(11, d));
    for (int c = 0; c < total; ++c) {
        std::vector<double> y(d);
        int rem = c;
        double n2 = 0.0;
        for (int k = 0; k < d; ++k) {
            y[k] = -r + 2.0 * r * (rem % 11) / 10.0;
            rem /= 11;
            n2 += y[k] * y[k];
        }
        if (n2 > r * r * (1.0 + 1e-12)) continue;
        const double v = J(y);
        if (v > best) {
            best = v;
            arg = y;
        }
    }
    // coordinate-wise golden polish inside the ball
    for (int k = 0; k < d; ++k) {
        double rest = 0.0;
        for (int j = 0; j < d; ++j)
            if (j != k) rest += arg[j] * arg[j];
        const double span = std::sqrt(std::max(0.0, r * r - rest));
        const double v = lattice_max([&](double yk) {
            auto y = arg;
            y[k] = yk;
            return J(y);
        }, -span, span);
        best = std::max(best, v);
    }
    return std::exp(-best);
}

double TmAdjointPacketND::l2_norm(double t, int npd) const {
    const int d = d_;
    const double r = 1.0 / p_.mu;
    std::vector<double> c(d);
    for (int k = 0; k < d; ++k) c[k] = p_.x0[k] + 2.0 * p_.lambda * p_.omega0[k] * t;
    std::vector<double> nodes(npd);
    for (int i = 0; i < npd; ++i) nodes[i] = -r + 2.0 * r * i / (npd - 1);
    const auto w = simpson_weights(nodes);
    const int total = static_cast<int>(std::pow(npd, d));
    double s = 0.0;
    std::vector<double> x(d);
    for (int q = 0; q < total; ++q) {
        int rem = q;
        double wt = 1.0;
        for (int k = 0; k < d; ++k) {
            const int i = rem % npd;
            rem /= npd;
            x[k] = c[k] + nodes[i];
            wt *= w[i];
        }
        s += wt * std::norm(eval(t, x.data()).u);
    }
    return std::sqrt(s);
}

cplx tm_residual_point(const TmPacket1D& pk, const Field1D& b, TmResidualMode mode, double t, double x) {
    const cplx I(0, 1);
    if (mode == TmResidualMode::direct) {
        const TmSample u = pk.packet(t, x);
        return I * u.v_t + u.v_xx + b.f(x) * u.v_x;
    }
    if (mode == TmResidualMode::conjugated) {
        const TmSample v = pk.core(t, x);
        const double ib = b.f(x).imag(), ibx = b.fx(x).imag();
        return I * v.v_t + v.v_xx + I * ib * v.v_x + 0.5 * I * ibx * v.v;
    }
    fail(ErrorKind::InvalidArgument, "adjoint mode applies to TmAdjointPacketND");
}

cplx tm_residual_point(const TmAdjointPacketND& pk, const VectorFieldND& b, double t, const double* x) {
    const int d = pk.dim();
    const AdjointSample s = pk.eval(t, x);
    std::vector<cplx> bv(d), db(d * d);
    b.value(x, bv.data());
    b.jacobian(x, db.data());
    cplx div = 0.0, adv = 0.0;
    for (int j = 0; j < d; ++j) {
        div += std::conj(db[j * d + j]);
        adv += std::conj(bv[j]) * s.grad[j];
    }
    return cplx(0, 1) * s.u_t + s.lap - div * s.u - adv;
}

double tm_residual(const TmPacket1D& pk, const Field1D& b, TmResidualMode mode, double t, const Grid1D& grid) {
    const double h = grid.x[1] - grid.x[0];
    if (2.0 * std::numbers::pi / pk.params().lambda / h < 16.0)
        fail(ErrorKind::UnderResolved, "fewer than 16 nodes per wavelength");
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        s += grid.weights[i] * grid.jac[i] * std::norm(tm_residual_point(pk, b, mode, t, grid.x[i]));
    return std::sqrt(s);
}

double tm_residual(const TmAdjointPacketND& pk, const VectorFieldND& b, double t, int npd) {
    const int d = pk.dim();
    const auto& p = pk.params();
    const double r = 1.0 / p.mu;
    if (2.0 * std::numbers::pi / p.lambda / (2.0 * r / (npd - 1)) < 16.0)
        fail(ErrorKind::UnderResolved, "fewer than 16 nodes per wavelength");
    std::vector<double> c(d);
    for (int k = 0; k < d; ++k) c[k] = p.x0[k] + 2.0 * p.lambda * p.omega0[k] * t;
    std::vector<double> nodes(npd);
    for (int i = 0; i < npd; ++i) nodes[i] = -r + 2.0 * r * i / (npd - 1);
    const auto w = simpson_weights(nodes);
    const int total = static_cast<int>(std::pow(npd, d));
    double s = 0.0;
    std::vector<double> x(d);
    for (int q = 0; q < total; ++q) {
        int rem = q;
        double wt = 1.0;
        for (int k = 0; k < d; ++k) {
            const int i = rem % npd;
            rem /= npd;
            x[k] = c[k] + nodes[i];
            wt *= w[i];
        }
        s += wt * std::norm(tm_residual_point(pk, b, t, x.data()));
    }
    return std::sqrt(s);
}

GridPtr tm_packet_grid(const TmPacketParams& p, double t, int npw, double pad) {
    require(p.x0.size() == 1, "1-D grid needs a 1-D packet");
    const double c = p.x0[0] + 2.0 * p.lambda * t;
    const double r = (1.0 + pad) / p.mu;
    const double h = 2.0 * std::numbers::pi / (p.lambda * npw);
    const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * r / h)) + 1;
    return make_uniform_grid(c - r, c + r, n | 1);
}

} // namespace dlab
