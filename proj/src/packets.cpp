#include "dlab/packets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dlab/error.hpp"

namespace dlab {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
using GL16 = boost::math::quadrature::gauss<double, 16>;

constexpr cplx I{0.0, 1.0};

double integrate_sq(const std::function<double(double)>& g, double a, double b) {
    // split so the flat ends of the bump do not starve the adaptive rule
    double s = 0.0;
    const int pieces = 8;
    for (int k = 0; k < pieces; ++k)
        s += GK::integrate(g, a + (b - a) * k / pieces, a + (b - a) * (k + 1) / pieces, 12, 1e-13);
    return s;
}

template <int N>
Jet<cplx, N> cvar(double v) {
    return complexify(Jet<double, N>::variable(v));
}

template <int N>
bool is_zero(const Jet<cplx, N>& j) {
    for (const auto& c : j.c)
        if (c != cplx(0.0)) return false;
    return true;
}

// quadrature of the least-squares slope of log(values) against t
std::pair<double, double> log_fit(const std::vector<double>& t, const std::vector<double>& v) {
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
    const double slope = cov / vx;
    const double r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
    return {slope, r2};
}

class ModelPacket final : public Packet {
public:
    ModelPacket(double lambda, YProfile a0, PacketOptions opt) : lam_(lambda), a0_(std::move(a0)), opt_(opt) {
        require(lambda != 0.0, "lambda must be nonzero");
    }
    PacketKind kind() const override { return PacketKind::schrodinger_model; }
    double lambda() const override { return lam_; }

    PacketSample eval(double t, double x) const override {
        PacketSample s{};
        require(x > 0.0, "model packet lives on x > 0");
        const double y = std::log(x);
        const double ys = y - 2.0 * lam_ * t;
        if (!(ys > a0_.lo && ys < a0_.hi)) return s;
        const Jet<cplx, 3> a = a0_.jet(ys);
        Jet<cplx, 3> phase = (cvar<3>(y) - cplx(lam_ * t)) * cplx(0.0, lam_);
        const Jet<cplx, 3> psi = exp(phase) * a;
        const cplx corr = opt_.correction ? 1.0 / (2.0 * I * lam_) : 0.0;
        const Jet<cplx, 3> phi_y = exp(-cvar<3>(y)) * (psi + conj(psi) * corr);
        // y = ln x as an x-jet
        Jet<double, 3> lnx;
        lnx.c[0] = y;
        lnx.c[1] = 1.0 / x;
        lnx.c[2] = -0.5 / (x * x);
        lnx.c[3] = 1.0 / (3.0 * x * x * x);
        const Jet<cplx, 3> phi = compose(phi_y, lnx);
        s.v = phi.c[0];
        s.vx = phi.d(1);
        s.vxx = phi.d(2);
        s.vxxx = phi.d(3);
        const cplx e = std::exp(I * lam_ * (y - lam_ * t));
        const cplx psi_t = e * (-I * lam_ * lam_ * a.c[0] - 2.0 * lam_ * a.c[1]);
        s.vt = std::exp(-y) * (psi_t + std::conj(psi_t) * corr);
        return s;
    }
    std::pair<double, double> support_y(double t) const override {
        return {a0_.lo + 2.0 * lam_ * t, a0_.hi + 2.0 * lam_ * t};
    }
    double x_of_y(double, double y) const override { return std::exp(y); }
    double dx_dy(double, double x) const override { return x; }

private:
    double lam_;
    YProfile a0_;
    PacketOptions opt_;
};

class SchrodingerPacket final : public Packet {
public:
    SchrodingerPacket(BackgroundPtr bg, const SchrodingerSpec& spec, double lambda, const BumpProfile& g0,
                      PacketOptions opt)
        : bg_(std::move(bg)), spec_(spec), lam_(lambda), opt_(opt) {
        require(lambda <= -1.0, "Schrödinger packets need lambda <= -1");
        check_x1_condition(*bg_);
        a0_ = y_profile_from_g0(g0, bg_, YKind::schrodinger);
    }
    PacketKind kind() const override { return PacketKind::schrodinger_general; }
    double lambda() const override { return lam_; }
    const Background* background() const override { return bg_.get(); }

    PacketSample eval(double t, double x) const override {
        PacketSample s{};
        const Jet<cplx, 2> v = spatial(t, x);
        if (is_zero(v)) return s;
        s.v = v.c[0];
        s.vx = v.d(1);
        s.vxx = v.d(2);
        // fourth-order centered difference in t at fixed x
        const double h = 1e-5 * std::min(1.0, 1.0 / (lam_ * lam_));
        const cplx p1 = spatial(t + h, x).c[0], m1 = spatial(t - h, x).c[0];
        const cplx p2 = spatial(t + 2 * h, x).c[0], m2 = spatial(t - 2 * h, x).c[0];
        s.vt = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        return s;
    }
    std::pair<double, double> support_y(double t) const override {
        return {a0_.lo + 2.0 * lam_ * t, a0_.hi + 2.0 * lam_ * t};
    }
    double x_of_y(double t, double y) const override { return y_inverse(*bg_, t, y, YKind::schrodinger); }
    double dx_dy(double t, double x) const override { return std::abs(bg_->f(t, x)); }

    // min over the support of 1 + ∂_y S; the construction needs it >= 1/2
    double validity_margin(double t, const Grid1D& grid) const {
        double m = 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double y = y_transform(*bg_, t, grid.x[i], YKind::schrodinger);
            const double ys = y - 2.0 * lam_ * t;
            if (ys > a0_.lo && ys < a0_.hi) m = std::min(m, 1.0 + s_jet(t, y).c[1]);
        }
        return m;
    }

private:
    Jet<cplx, 2> spatial(double t, double x) const {
        const Jet<double, 2> yj = truncate<2>(y_jet(*bg_, t, x, YKind::schrodinger));
        const double y = yj.c[0];
        const double ys = y - 2.0 * lam_ * t;
        if (!(ys > a0_.lo && ys < a0_.hi)) return {};
        const Jet<cplx, 2> a0 = truncate<2>(a0_.jet(ys));
        Jet<cplx, 2> phase = (cvar<2>(y) - cplx(lam_ * t)) * cplx(0.0, lam_);
        if (t != 0.0 && !bg_->rotating_real_profile())
            phase += complexify(s_jet(t, y)) * cplx(0.0, opt_.wkb_sign * lam_);
        const Jet<cplx, 2> psi = compose(exp(phase) * a0, yj);

        const BgJet bj = bg_->jet(t, x);
        const Jet<cplx, 3> f3 = truncate<3>(bj.f);
        const Jet<cplx, 2> f = truncate<2>(f3), fx = derivative(f3);
        const Jet<double, 2> absf = sqrt(real(f * conj(f)));
        Jet<cplx, 2> phi = psi;
        if (opt_.correction) {
            const Jet<cplx, 2> c = f * fx / complexify(absf) * (spec_.alpha1 / (2.0 * I * lam_));
            phi += c * conj(psi);
        }
        return complexify(pow(absf, spec_.sigma_c() - 0.5)) * phi;
    }

    // K(t, ·) = (-α₁ + 2β₁) Im(f̄ ∂_y f)/|f|² + h as a y-jet at y
    Jet<double, 2> k_jet(double t, double y) const {
        const double x = y_inverse(*bg_, t, y, YKind::schrodinger);
        const BgJet bj = bg_->jet(t, x);
        const Jet<cplx, 3> f3 = truncate<3>(bj.f);
        const Jet<cplx, 2> f = truncate<2>(f3), fx = derivative(f3);
        const Jet<double, 2> absf = sqrt(real(f * conj(f)));
        Jet<double, 2> k = imag(conj(f) * fx) / absf * (-spec_.alpha1 + 2.0 * spec_.beta1);
        // h_x = -Re(f̄ f_t)/|f|³
        const Jet<cplx, 1> f1 = truncate<1>(bj.f), ft1 = truncate<1>(bj.ft);
        const Jet<double, 1> a1 = truncate<1>(absf);
        const Jet<double, 1> hx = -(real(conj(f1) * ft1) / (a1 * a1 * a1));
        k += integrate(hx, dt_y(*bg_, t, x, YKind::schrodinger));
        const Jet<double, 2> xy = reverse(truncate<2>(y_jet(*bg_, t, x, YKind::schrodinger)), x);
        return compose(k, xy);
    }

    // S(t, y) = ∫_0^t K(t', y - 2λ(t - t')) dt'
    Jet<double, 2> s_jet(double t, double y) const {
        Jet<double, 2> s;
        if (t == 0.0 || bg_->rotating_real_profile()) return s;
        const auto& xs = GL16::abscissa();
        const auto& ws = GL16::weights();
        const double half = 0.5 * t;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (int sgn : {1, -1}) {
                if (xs[i] == 0.0 && sgn < 0) continue;
                const double tp = half + sgn * half * xs[i];
                s += k_jet(tp, y - 2.0 * lam_ * (t - tp)) * (half * ws[i]);
            }
        }
        return s;
    }

    BackgroundPtr bg_;
    SchrodingerSpec spec_;
    double lam_;
    PacketOptions opt_;
    YProfile a0_;
};

class KdvPacket final : public Packet {
public:
    KdvPacket(BackgroundPtr bg, const KdvSpec& spec, double lambda, const BumpProfile& g0, PacketOptions opt)
        : bg_(std::move(bg)), spec_(spec), lam_(lambda), opt_(opt) {
        require(lambda >= 1.0 && lambda == std::floor(lambda), "KdV packets need a positive integer lambda");
        h0_ = y_profile_from_g0(g0, bg_, YKind::kdv);
    }
    PacketKind kind() const override { return PacketKind::kdv; }
    double lambda() const override { return lam_; }
    const Background* background() const override { return bg_.get(); }

    PacketSample eval(double t, double x) const override {
        PacketSample s{};
        const double A = bg_->A();
        const Jet<double, 3> yj = y_jet(*bg_, t, x, YKind::kdv);
        const double y = yj.c[0];
        const double arg = y + 3.0 * A * lam_ * lam_ * t;
        if (!(arg > h0_.lo && arg < h0_.hi)) return s;
        const Jet<double, 3> H = real(h0_.jet(arg));
        const Jet<double, 3> ph = (Jet<double, 3>::variable(y) + A * lam_ * lam_ * t) * lam_;
        Jet<double, 3> sn, cs;
        sincos(ph, sn, cs);
        const Jet<double, 3> C = opt_.sine ? sn : cs;
        const Jet<double, 3> inner = compose(C * H, yj);

        const BgJet bj = bg_->jet(t, x);
        const Jet<double, 3> f = truncate<3>(real(bj.f));
        const double ex = spec_.sigma_c() / 3.0 - 1.0 / 6.0;
        const Jet<double, 3> E = pow(f, ex) * std::pow(A, 1.0 / 6.0);
        const Jet<double, 3> phi = E * inner;
        s.v = phi.c[0];
        s.vx = phi.d(1);
        s.vxx = phi.d(2);
        s.vxxx = phi.d(3);

        const double q = dt_y(*bg_, t, x, YKind::kdv);
        const double ft = bj.ft.c[0].real();
        const double Et = E.c[0] * ex * ft / f.c[0];
        const double Ct = (opt_.sine ? lam_ * cs.c[0] : -lam_ * sn.c[0]) * (q + A * lam_ * lam_);
        const double Ht = H.c[1] * (q + 3.0 * A * lam_ * lam_);
        s.vt = Et * C.c[0] * H.c[0] + E.c[0] * (Ct * H.c[0] + C.c[0] * Ht);
        return s;
    }
    std::pair<double, double> support_y(double t) const override {
        const double shift = 3.0 * bg_->A() * lam_ * lam_ * t;
        return {h0_.lo - shift, h0_.hi - shift};
    }
    double x_of_y(double t, double y) const override { return y_inverse(*bg_, t, y, YKind::kdv); }
    double dx_dy(double t, double x) const override { return std::cbrt(bg_->f(t, x).real() / bg_->A()); }

private:
    BackgroundPtr bg_;
    KdvSpec spec_;
    double lam_;
    PacketOptions opt_;
    YProfile h0_;
};

} // namespace

BumpProfile::BumpProfile(double lo, double hi, cplx amplitude) : lo_(lo), hi_(hi), amp_(amplitude) {
    require(hi > lo, "profile support must be a nonempty interval");
}

BumpProfile BumpProfile::normalized(double lo, double hi, cplx phase) {
    require(std::abs(phase) > 0.0, "profile phase must be nonzero");
    const BumpProfile unit(lo, hi, 1.0);
    return BumpProfile(lo, hi, phase / std::abs(phase) / unit.sobolev(0));
}

Jet<cplx, 4> BumpProfile::jet(double s) const {
    const double mid = 0.5 * (lo_ + hi_), half = 0.5 * (hi_ - lo_);
    const double z = (s - mid) / half;
    if (std::abs(z) >= 1.0) return {};
    Jet<double, 4> Z;
    Z.c[0] = z;
    Z.c[1] = 1.0 / half;
    return complexify(exp(-(1.0 / (1.0 - Z * Z)))) * amp_;
}

double BumpProfile::sobolev(int n, double L) const {
    require(n >= 0 && n <= 4, "profile norms are available up to order 4");
    double total = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double q = integrate_sq([&](double s) { return std::norm(jet(s).d(j)); }, lo_, hi_);
        total += std::pow(L, j) * std::sqrt(q);
    }
    return total;
}

double YProfile::sobolev(int n) const {
    require(n >= 0 && n <= 3, "y-profile norms are available up to order 3");
    double total = 0.0;
    for (int j = 0; j <= n; ++j)
        total += std::sqrt(integrate_sq([&](double y) { return std::norm(jet(y).d(j)); }, lo, hi));
    return total;
}

YProfile model_profile_from_g0(const BumpProfile& g0) {
    YProfile p;
    p.lo = std::log(g0.lo());
    p.hi = std::log(g0.hi());
    p.jet = [g0](double y) {
        const Jet<double, 3> ex = exp(Jet<double, 3>::variable(y));
        const Jet<cplx, 3> g = truncate<3>(g0.jet(ex.c[0]));
        return compose(g, ex) * complexify(ex);
    };
    return p;
}

YProfile y_profile_from_g0(const BumpProfile& g0, BackgroundPtr bg, YKind kind) {
    YProfile p;
    p.lo = y_transform(*bg, 0.0, g0.lo(), kind);
    p.hi = y_transform(*bg, 0.0, g0.hi(), kind);
    const double scale = std::sqrt(bg->x1());
    p.jet = [g0, bg, kind, scale](double y) {
        const double x = y_inverse(*bg, 0.0, y, kind);
        const Jet<double, 3> xy = reverse(y_jet(*bg, 0.0, x, kind), x);
        return compose(truncate<3>(g0.jet(x)), xy) * cplx(scale);
    };
    return p;
}

PacketPtr model_packet_schrodinger(double lambda, YProfile a0, PacketOptions opt) {
    require(lambda < 0.0, "model packets need lambda < 0");
    require(a0.hi <= 0.0, "model profile must be supported in y < 0");
    return std::make_shared<ModelPacket>(lambda, std::move(a0), opt);
}

PacketPtr packet_schrodinger(BackgroundPtr bg, const SchrodingerSpec& spec, double lambda, const BumpProfile& g0,
                             PacketOptions opt) {
    return std::make_shared<SchrodingerPacket>(std::move(bg), spec, lambda, g0, opt);
}

PacketPtr packet_kdv(BackgroundPtr bg, const KdvSpec& spec, double lambda, const BumpProfile& g0, PacketOptions opt) {
    return std::make_shared<KdvPacket>(std::move(bg), spec, lambda, g0, opt);
}

GridPtr packet_grid(const Packet& p, double t, int npw, double pad) {
    require(npw >= 4, "nodes_per_wavelength must be at least 4");
    auto [a, b] = p.support_y(t);
    const double w = b - a;
    a -= pad * w;
    b += pad * w;
    if (p.kind() != PacketKind::schrodinger_model) b = std::min(b, 0.0);
    const double h = 2.0 * std::numbers::pi / (std::abs(p.lambda()) * npw);
    std::size_t n = static_cast<std::size_t>(std::ceil((b - a) / h)) + 1;
    n |= 1;
    n = std::max<std::size_t>(n, 9);
    std::vector<double> y(n), x(n), jac(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        x[i] = p.x_of_y(t, y[i]);
        jac[i] = p.dx_dy(t, x[i]);
    }
    return make_mapped_grid(std::move(y), std::move(x), std::move(jac));
}

GridField packet_field(const Packet& p, double t, GridPtr grid) {
    GridField out{grid, std::vector<cplx>(grid->size()), "packet"};
    for (std::size_t i = 0; i < grid->size(); ++i) out.values[i] = p.eval(t, grid->x[i]).v;
    return out;
}

namespace {

void check_resolution(const Packet& p, const Grid1D& g) {
    const double h = g.step();
    if (2.0 * std::numbers::pi / (std::abs(p.lambda()) * h) < 16.0)
        fail(ErrorKind::UnderResolved, "fewer than 16 nodes per wavelength in y");
}

double l2_dx(const GridField& f) { return weighted_norm(f, WeightSpec::trivial()); }

} // namespace

GridField residual_field_model(const Packet& p, double t, GridPtr grid) {
    require(p.kind() == PacketKind::schrodinger_model, "model residual needs a model packet");
    check_resolution(p, *grid);
    GridField out{grid, std::vector<cplx>(grid->size()), "residual"};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = grid->x[i];
        const PacketSample s = p.eval(t, x);
        const cplx eps = I * s.vt + x * x * s.vxx + 2.0 * x * s.vx + 2.0 * x * s.vx.real();
        out.values[i] = std::sqrt(x) * eps;
    }
    return out;
}

double residual_model(const Packet& p, double t, const Grid1D& grid) {
    auto g = std::make_shared<Grid1D>(grid);
    return l2_dx(residual_field_model(p, t, g));
}

GridField residual_field_schrodinger(const Packet& p, const SchrodingerSpec& spec, double t, GridPtr grid) {
    require(p.background() != nullptr, "general residual needs a background packet");
    check_resolution(p, *grid);
    const Background& bg = *p.background();
    const double a1 = spec.alpha1, b1 = spec.beta1, sc = spec.sigma_c();
    const cplx mu = spec.mu1;
    GridField out{grid, std::vector<cplx>(grid->size()), "residual"};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = grid->x[i];
        const PacketSample s = p.eval(t, x);
        if (s.v == 0.0 && s.vx == 0.0 && s.vxx == 0.0 && s.vt == 0.0) continue;
        const BgJet j = bg.jet(t, x);
        const cplx f = j.f.c[0], fx = j.f.d(1), fxx = j.f.d(2);
        const double af2 = std::norm(f);
        const cplx V = std::conj(f) * fxx + a1 * std::norm(fx) + 2.0 * mu * af2;
        const cplx W = f * fxx + b1 * fx * fx + mu * f * f;
        const cplx eps = I * s.vt + af2 * s.vxx + a1 * f * (std::conj(fx) * s.vx + fx * std::conj(s.vx)) +
                         2.0 * b1 * std::conj(f) * fx * s.vx + V * s.v + W * std::conj(s.v);
        out.values[i] = std::pow(std::sqrt(af2), -sc) * eps;
    }
    return out;
}

double residual_schrodinger(const Packet& p, const SchrodingerSpec& spec, double t, GridPtr grid) {
    return l2_dx(residual_field_schrodinger(p, spec, t, std::move(grid)));
}

GridField residual_field_kdv(const Packet& p, const KdvSpec& spec, double t, GridPtr grid) {
    require(p.kind() == PacketKind::kdv, "KdV residual needs a KdV packet");
    check_resolution(p, *grid);
    const Background& bg = *p.background();
    const double a1 = spec.alpha1, mu = spec.mu1, sc = spec.sigma_c();
    const int m = spec.m;
    const double x_exact = bg.x_exact();
    GridField out{grid, std::vector<cplx>(grid->size()), "residual"};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = grid->x[i];
        if (x > x_exact) continue;
        const PacketSample s = p.eval(t, x);
        const BgJet j = bg.jet(t, x);
        const double f = j.f.c[0].real(), fx = j.f.d(1).real(), fxx = j.f.d(2).real(), fxxx = j.f.d(3).real();
        const double eps = s.vt.real() + f * s.vxxx.real() + a1 * fx * s.vxx.real() +
                           (a1 * fxx + mu * std::pow(f, m - 1)) * s.vx.real() +
                           (fxxx + (m - 1) * mu * std::pow(f, m - 2) * fx) * s.v.real();
        out.values[i] = std::pow(f, -sc / 3.0) * eps;
    }
    return out;
}

double residual_kdv(const Packet& p, const KdvSpec& spec, double t, GridPtr grid) {
    return l2_dx(residual_field_kdv(p, spec, t, std::move(grid)));
}

namespace {

// |f| for Schrödinger packets, x for the model, f for KdV
double base_weight(const Packet& p, double t, double x) {
    switch (p.kind()) {
    case PacketKind::schrodinger_model:
        return x;
    case PacketKind::schrodinger_general:
        return std::abs(p.background()->f(t, x));
    case PacketKind::kdv:
        return p.background()->f(t, x).real();
    }
    return 1.0;
}

double weight_power(const Packet& p, double sigma_c, double gamma) {
    switch (p.kind()) {
    case PacketKind::schrodinger_model:
        return 0.5 + gamma;
    case PacketKind::schrodinger_general:
        return -sigma_c + gamma;
    case PacketKind::kdv:
        return (-sigma_c + gamma) / 3.0;
    }
    return 0.0;
}

} // namespace

double packet_weighted_norm(const Packet& p, double sigma_c, double gamma, double pnorm, double t, int npw) {
    auto g = packet_grid(p, t, npw);
    GridField f = packet_field(p, t, g);
    const double e = weight_power(p, sigma_c, gamma);
    std::vector<double> w(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) w[i] = std::pow(base_weight(p, t, g->x[i]), e * pnorm);
    // explicit weights multiply |v|^p, so raise the pointwise weight to p
    WeightSpec ws{WeightSpec::Kind::explicit_values, 0.0, w, pnorm, false};
    return weighted_norm(f, ws);
}

double packet_regularity_norm(const Packet& p, double sigma_c, int n, double t, int npw) {
    require(n >= 0 && n <= 2, "regularity norms implemented for n <= 2");
    require(p.kind() != PacketKind::kdv, "regularity norm is for Schrödinger packets");
    auto g = packet_grid(p, t, npw);
    GridField out{g, std::vector<cplx>(g->size()), "regularity"};
    const bool model = p.kind() == PacketKind::schrodinger_model;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double x = g->x[i];
        const PacketSample s = p.eval(t, x);
        double a = x, ax = 1.0;
        if (!model) {
            const BgJet j = p.background()->jet(t, x);
            const cplx f = j.f.c[0], fx = j.f.d(1);
            a = std::abs(f);
            ax = (std::conj(f) * fx).real() / a;
        }
        cplx v = s.v;
        if (n == 1) v = a * s.vx;
        if (n == 2) v = a * (ax * s.vx + a * s.vxx);
        const double e = model ? 0.5 : -sigma_c;
        out.values[i] = std::pow(a, e) * v;
    }
    return l2_dx(out);
}

DegenerationReport degeneration_report(const Packet& p, double sigma_c, double gamma_prime, double pnorm, int s,
                                       const std::vector<double>& times, int npw) {
    require(times.size() >= 3, "degeneration fit needs at least three times");
    DegenerationReport r;
    r.times = times;
    for (double t : times) r.norms.push_back(packet_weighted_norm(p, sigma_c, gamma_prime + s, pnorm, t, npw));
    for (double v : r.norms)
        if (!(v > 1e-300)) fail(ErrorKind::DegenerateFit, "packet norm vanished");
    std::tie(r.fitted_rate, r.r_squared) = log_fit(times, r.norms);
    const double ex = gamma_prime + s + 1.0 / pnorm - 0.5;
    const double lam = std::abs(p.lambda());
    if (p.kind() == PacketKind::kdv) {
        const Background& bg = *p.background();
        const double A = bg.A();
        // window average of β(t) = (f_xxx(t,0)/6)^{1/3}
        const double xs = 0.5 * bg.x_exact();
        double beta = 0.0;
        for (double t : times) beta += std::cbrt(bg.jet(t, xs).f.c[3].real());
        beta /= static_cast<double>(times.size());
        r.predicted_rate = -3.0 * beta * std::pow(A, 2.0 / 3.0) * lam * lam * ex;
    } else {
        const double A = p.background() ? p.background()->A() : 1.0;
        r.predicted_rate = -2.0 * lam * A * A * ex;
    }
    return r;
}

double support_right_endpoint(const Packet& p, double t, double rel_tol, int npw) {
    auto g = packet_grid(p, t, npw, 0.2);
    const GridField f = packet_field(p, t, g);
    double mx = 0.0;
    for (const auto& v : f.values) mx = std::max(mx, std::abs(v));
    double right = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
        if (std::abs(f.values[i]) > rel_tol * mx) right = std::max(right, g->x[i]);
    return right;
}

double support_envelope(const Packet& p, double t) {
    const double lam = std::abs(p.lambda());
    switch (p.kind()) {
    case PacketKind::schrodinger_model:
        return std::exp(p.support_y(0.0).second - 2.0 * lam * t);
    case PacketKind::schrodinger_general: {
        const double A = p.background()->A();
        return std::exp(-lam * A * A * t) * p.background()->x1();
    }
    case PacketKind::kdv: {
        const Background& bg = *p.background();
        const double A = bg.A();
        // on the cubic region x(0, y) = x_eff e^y
        const double xc = 0.5 * bg.x_exact();
        const double x_eff = xc * std::exp(-y_transform(bg, 0.0, xc, YKind::kdv));
        const double beta = std::cbrt(bg.jet(t, xc).f.c[3].real());
        return x_eff * std::exp(-3.0 * beta * std::pow(A, 2.0 / 3.0) * lam * lam * t);
    }
    }
    return 0.0;
}

double schrodinger_validity_margin(const Packet& p, double t, const Grid1D& grid) {
    const auto* sp = dynamic_cast<const SchrodingerPacket*>(&p);
    require(sp != nullptr, "validity margin applies to general Schrödinger packets");
    return sp->validity_margin(t, grid);
}

cplx bilinear_pairing(const GridField& u, const GridField& v, const Background& bg, double sigma_c, PairingKind kind,
                      double t) {
    const double gamma = kind == PairingKind::schrodinger ? -2.0 * sigma_c : -2.0 * sigma_c / 3.0;
    return weighted_pairing(u, v, WeightSpec::abs_f(gamma), &bg, t);
}

} // namespace dlab
