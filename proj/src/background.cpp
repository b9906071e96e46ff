#include "dlab/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "dlab/error.hpp"

namespace dlab {

namespace {

constexpr double kLogPanel = 0.5;
constexpr int kGluePanels = 8;

class DsLinear final : public Background {
public:
    DsLinear(const SchrodingerSpec& spec, double x1) : omega_(spec.alpha1 + spec.beta1), x1_(x1) {}

    BackgroundKind kind() const override { return BackgroundKind::ds_linear; }
    BgJet jet(double t, double x) const override {
        const cplx e = std::polar(1.0, omega_ * t);
        BgJet j;
        j.f.c[0] = x * e;
        j.f.c[1] = e;
        j.ft.c[0] = cplx(0.0, omega_) * x * e;
        j.ft.c[1] = cplx(0.0, omega_) * e;
        return j;
    }
    double x1() const override { return x1_; }
    double A() const override { return 1.0; }
    bool rotating_real_profile() const override { return true; }
    Json descriptor() const override { return Json{{"kind", "ds_linear"}, {"omega", omega_}, {"x1", x1_}}; }

private:
    double omega_;
    double x1_;
};

class KdvCubic final : public Background {
public:
    KdvCubic(double alpha1, double beta0, double x1, double x_cut, double glue)
        : alpha1_(alpha1), beta0_(beta0), x1_(x1), x_cut_(x_cut), glue_(glue) {}

    BackgroundKind kind() const override { return BackgroundKind::kdv_cubic; }

    BgJet jet(double t, double x) const override {
        const double b = kdv_beta(alpha1_, beta0_, t);
        const double bdot = kdv_beta_rhs(alpha1_, b);
        const Jet<double, 4> p = profile(x);
        BgJet j;
        j.f = complexify(p * (b * b * b));
        j.ft = complexify(truncate<2>(p) * (3.0 * b * b * bdot));
        return j;
    }
    double x1() const override { return x1_; }
    double A() const override { return beta0_ * beta0_ * beta0_; }
    double x_exact() const override { return x_cut_; }
    Json descriptor() const override {
        return Json{{"kind", "kdv_cubic"}, {"alpha1", alpha1_}, {"beta0", beta0_},
                    {"x1", x1_},          {"x_cut", x_cut_},   {"glue", glue_}};
    }

private:
    Jet<double, 4> profile(double x) const {
        const auto X = Jet<double, 4>::variable(x);
        Jet<double, 4> p = X * X * X;
        if (x > x_cut_ && glue_ != 0.0) {
            const double w = x1_ - x_cut_;
            Jet<double, 4> u;
            u.c[0] = (x - x_cut_) / w;
            u.c[1] = 1.0 / w;
            const Jet<double, 4> kappa = exp(-(1.0 / u)) * glue_;
            p = p * exp(-kappa);
        }
        return p;
    }

    double alpha1_, beta0_, x1_, x_cut_, glue_;
};

class Sampled final : public Background {
public:
    Sampled(std::vector<double> x, std::vector<cplx> f, double x1, std::optional<double> A)
        : x_(std::move(x)), f_(std::move(f)), x1_(x1) {
        require(x_.size() >= 8 && x_.size() == f_.size(), "sampled background needs >= 8 matching samples");
        const double h = x_[1] - x_[0];
        for (std::size_t i = 1; i < x_.size(); ++i)
            require(std::abs(x_[i] - x_[i - 1] - h) < 1e-9 * std::max(1.0, std::abs(h)),
                    "sampled background requires uniform spacing");
        std::vector<double> re(f_.size()), im(f_.size());
        for (std::size_t i = 0; i < f_.size(); ++i) {
            re[i] = f_[i].real();
            im[i] = f_[i].imag();
        }
        re_ = std::make_unique<Spline>(re, x_.front(), h);
        im_ = std::make_unique<Spline>(im, x_.front(), h);
        lo_ = x_.front();
        hi_ = x_.back();
        A_ = A ? *A : std::abs(cplx(re_->prime(0.0), im_->prime(0.0)));
    }

    BackgroundKind kind() const override { return BackgroundKind::sampled; }

    BgJet jet(double, double x) const override {
        const double range = hi_ - lo_;
        const double h3 = std::cbrt(std::numeric_limits<double>::epsilon()) * range;
        const double h4 = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * range;
        const double xc = std::clamp(x, lo_ + 2.0 * h4, hi_ - 2.0 * h4);
        auto d2 = [&](double s) { return cplx(re_->double_prime(s), im_->double_prime(s)); };
        BgJet j;
        j.f.c[0] = cplx((*re_)(x), (*im_)(x));
        j.f.c[1] = cplx(re_->prime(x), im_->prime(x));
        j.f.c[2] = d2(x) / 2.0;
        j.f.c[3] = (d2(xc + h3) - d2(xc - h3)) / (2.0 * h3) / 6.0;
        j.f.c[4] = (d2(xc + h4) - 2.0 * d2(xc) + d2(xc - h4)) / (h4 * h4) / 24.0;
        return j;
    }
    double x1() const override { return x1_; }
    double A() const override { return A_; }
    Json descriptor() const override {
        Json xs = Json::array(), re = Json::array(), im = Json::array();
        for (std::size_t i = 0; i < x_.size(); ++i) {
            xs.push_back(x_[i]);
            re.push_back(f_[i].real());
            im.push_back(f_[i].imag());
        }
        return Json{{"kind", "sampled"}, {"x1", x1_}, {"A", A_}, {"x", xs}, {"re", re}, {"im", im}};
    }

private:
    using Spline = boost::math::interpolators::cardinal_quintic_b_spline<double>;
    std::vector<double> x_;
    std::vector<cplx> f_;
    double x1_;
    double lo_ = 0, hi_ = 0, A_ = 1;
    std::unique_ptr<Spline> re_, im_;
};

// ∫_{xa}^{xb} g(x) dx for 0 < xa, xb, composite Gauss-Legendre in u = ln x with a panel
// layout that depends only on the endpoints; the non-analytic point x_exact is a panel break.
template <class G>
double path_integral(const Background& bg, double xa, double xb, G&& g) {
    if (xa == xb) return 0.0;
    double sign = 1.0;
    if (xa > xb) {
        std::swap(xa, xb);
        sign = -1.0;
    }
    using Rule = boost::math::quadrature::gauss<double, 10>;
    auto log_part = [&](double a, double b) {
        const double ua = std::log(a), ub = std::log(b);
        const int n = std::max(1, static_cast<int>(std::ceil((ub - ua) / kLogPanel)));
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double pa = ua + (ub - ua) * k / n, pb = ua + (ub - ua) * (k + 1) / n;
            s += Rule::integrate([&](double u) {
                const double x = std::exp(u);
                return x * g(x);
            }, pa, pb);
        }
        return s;
    };
    const double xe = bg.x_exact();
    if (xa < xe && xe < xb) {
        double s = log_part(xa, xe);
        for (int k = 0; k < kGluePanels; ++k) {
            const double pa = xe + (xb - xe) * k / kGluePanels, pb = xe + (xb - xe) * (k + 1) / kGluePanels;
            s += Rule::integrate(g, pa, pb);
        }
        return sign * s;
    }
    return sign * log_part(xa, xb);
}

double abs_f_checked(const Background& bg, double t, double x) {
    const double m = std::abs(bg.f(t, x));
    if (!(m >= 1e-300)) fail(ErrorKind::DegenerateOnPath, "f vanishes on the integration path");
    return m;
}

double ftilde_checked(const Background& bg, double t, double x) {
    const double v = bg.f(t, x).real() / bg.A();
    if (!(v >= 1e-300)) fail(ErrorKind::DegenerateOnPath, "f is not positive on the integration path");
    return v;
}

double inv_speed(const Background& bg, double t, double x, YKind kind) {
    if (kind == YKind::schrodinger) return 1.0 / abs_f_checked(bg, t, x);
    return std::pow(ftilde_checked(bg, t, x), -1.0 / 3.0);
}

void require_positive_x(double x) {
    if (!(x > 0.0)) fail(ErrorKind::DegenerateOnPath, "y-transform requires x > 0");
}

} // namespace

BackgroundPtr ds_linear_background(const SchrodingerSpec& spec, double x1) {
    require(x1 > 0.0, "x1 must be positive");
    return std::make_shared<DsLinear>(spec, x1);
}

BackgroundPtr kdv_cubic_background(double alpha1, double beta0, double x1, double x_cut, double glue) {
    require(beta0 > 0.0, "beta0 must be positive");
    require(0.0 < x_cut && x_cut <= x1, "need 0 < x_cut <= x1");
    return std::make_shared<KdvCubic>(alpha1, beta0, x1, x_cut, glue);
}

BackgroundPtr sampled_background(std::vector<double> x, std::vector<cplx> f, double x1, std::optional<double> A) {
    return std::make_shared<Sampled>(std::move(x), std::move(f), x1, A);
}

BackgroundPtr background_from_json(const Json& d, const SchrodingerSpec* sspec, const KdvSpec* kspec) {
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "ds_linear") {
        require(sspec != nullptr, "ds_linear background needs a Schrödinger model");
        return ds_linear_background(*sspec, d.value("x1", 1.0));
    }
    if (kind == "kdv_cubic") {
        require(kspec != nullptr, "kdv_cubic background needs a KdV model");
        const double x1 = d.value("x1", 1.0);
        return kdv_cubic_background(kspec->alpha1, d.value("beta0", 1.0), x1, d.value("x_cut", 0.95 * x1),
                                    d.value("glue", 1.0));
    }
    if (kind == "sampled") {
        std::vector<double> x = d.at("x").get<std::vector<double>>();
        std::vector<double> re = d.at("re").get<std::vector<double>>();
        std::vector<double> im = d.value("im", std::vector<double>(re.size(), 0.0));
        require(re.size() == x.size() && im.size() == x.size(), "sampled background arrays differ in length");
        std::vector<cplx> f(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = cplx(re[i], im[i]);
        std::optional<double> A;
        if (d.contains("A")) A = d.at("A").get<double>();
        return sampled_background(std::move(x), std::move(f), d.value("x1", 1.0), A);
    }
    fail(ErrorKind::SchemaError, "unknown background kind '" + kind + "'");
}

double kdv_beta_rhs(double alpha1, double beta) { return -(2.0 + 6.0 * alpha1) * std::pow(beta, 4); }

double kdv_beta(double alpha1, double beta0, double t) {
    const double bracket = 1.0 + 3.0 * (2.0 + 6.0 * alpha1) * beta0 * beta0 * beta0 * t;
    if (!(bracket > 0.0)) fail(ErrorKind::BetaBlowup, "beta ODE leaves its domain at t = " + std::to_string(t));
    return beta0 * std::cbrt(1.0 / bracket);
}

cplx schrodinger_background_residual(const Background& bg, const SchrodingerSpec& s, double t, double x) {
    const BgJet j = bg.jet(t, x);
    const cplx f = j.f.c[0], fx = j.f.d(1), fxx = j.f.d(2), ft = j.ft.c[0];
    const double m2 = std::norm(f);
    return cplx(0, 1) * ft + m2 * fxx + s.alpha1 * f * std::norm(fx) + s.beta1 * std::conj(f) * fx * fx +
           s.mu1 * m2 * f;
}

double kdv_background_residual(const Background& bg, const KdvSpec& s, double t, double x) {
    const BgJet j = bg.jet(t, x);
    const double f = j.f.c[0].real(), fx = j.f.d(1).real(), fxx = j.f.d(2).real(), fxxx = j.f.d(3).real();
    const double ft = j.ft.c[0].real();
    return ft + f * fxxx + s.alpha1 * fx * fxx + s.mu1 * std::pow(f, s.m - 1) * fx;
}

void check_x1_condition(const Background& bg, int samples) {
    const double x1 = bg.x1();
    const double fx0 = std::abs(bg.jet(0.0, 0.0).f.c[1]);
    double sup = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = -x1 + 2.0 * x1 * i / (samples - 1);
        sup = std::max(sup, std::abs(bg.jet(0.0, x).f.d(2)));
    }
    if (!(sup * x1 < fx0 / 2.0))
        fail(ErrorKind::X1ConditionViolated,
             "sup|f_xx(0,.)| x1 = " + std::to_string(sup * x1) + " >= f_x(0,0)/2 = " + std::to_string(fx0 / 2.0));
}

double y_transform(const Background& bg, double t, double x, YKind kind) {
    require_positive_x(x);
    return -path_integral(bg, x, bg.x1(), [&](double s) { return inv_speed(bg, t, s, kind); });
}

Jet<double, 3> y_jet(const Background& bg, double t, double x, YKind kind) {
    const BgJet j = bg.jet(t, x);
    Jet<double, 2> speed;
    if (kind == YKind::schrodinger) {
        const auto f = truncate<2>(j.f);
        const Jet<double, 2> m2 = real(f * conj(f));
        if (!(m2.c[0] > 0.0)) fail(ErrorKind::DegenerateOnPath, "f vanishes at the evaluation point");
        speed = pow(m2, -0.5);
    } else {
        const Jet<double, 2> ft = real(truncate<2>(j.f)) / bg.A();
        if (!(ft.c[0] > 0.0)) fail(ErrorKind::DegenerateOnPath, "f is not positive at the evaluation point");
        speed = pow(ft, -1.0 / 3.0);
    }
    return integrate(speed, y_transform(bg, t, x, kind));
}

double y_inverse(const Background& bg, double t, double y, YKind kind) {
    const double x1 = bg.x1();
    if (y == 0.0) return x1;
    // Newton in u = ln x, safeguarded by a bracket
    double scale = kind == YKind::schrodinger ? abs_f_checked(bg, t, x1) / x1 : std::cbrt(ftilde_checked(bg, t, x1)) / x1;
    double u = std::log(x1) + y * scale;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double x = std::exp(u);
        const double g = y_transform(bg, t, x, kind) - y;
        if (g < 0.0) lo = std::max(lo, u);
        else hi = std::min(hi, u);
        const double dg = x * inv_speed(bg, t, x, kind);
        double step = -g / dg;
        double next = u + step;
        if (!(next > lo && next < hi)) {
            if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
            else next = u + std::clamp(step, -5.0, 5.0);
        }
        if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u))) return std::exp(next);
        u = next;
    }
    fail(ErrorKind::DegenerateOnPath, "y_inverse did not converge");
}

double dt_y_partial(const Background& bg, double t, double x, double x_upper, YKind kind) {
    require_positive_x(x);
    if (bg.rotating_real_profile()) return 0.0;
    if (kind == YKind::schrodinger) {
        return path_integral(bg, x, x_upper, [&](double s) {
            const BgJet j = bg.jet(t, s);
            const double m = std::abs(j.f.c[0]);
            return (std::conj(j.f.c[0]) * j.ft.c[0]).real() / (m * m * m);
        });
    }
    const double A = bg.A();
    return path_integral(bg, x, x_upper, [&](double s) {
        const BgJet j = bg.jet(t, s);
        const double ft = j.f.c[0].real() / A;
        return std::pow(ft, -4.0 / 3.0) * (j.ft.c[0].real() / A) / 3.0;
    });
}

double dt_y(const Background& bg, double t, double x, YKind kind) { return dt_y_partial(bg, t, x, bg.x1(), kind); }

double dt_y_equation_form(const Background& bg, const KdvSpec& spec, double t, double x, double x_upper) {
    require_positive_x(x);
    const double A = bg.A();
    return path_integral(bg, x, x_upper, [&](double s) {
        const BgJet j = bg.jet(t, s);
        const double f = j.f.c[0].real(), fx = j.f.d(1).real(), fxx = j.f.d(2).real(), fxxx = j.f.d(3).real();
        const double ft = -(f * fxxx + spec.alpha1 * fx * fxx + spec.mu1 * std::pow(f, spec.m - 1) * fx);
        return std::pow(f / A, -4.0 / 3.0) * (ft / A) / 3.0;
    });
}

std::vector<TaylorCoeffState> taylor_ode_schrodinger(const SchrodingerSpec& spec, std::vector<cplx> coeffs0,
                                                     double t_end, double rel_tol, int samples) {
    require(!coeffs0.empty(), "need at least one Taylor coefficient");
    require(std::abs(coeffs0[0]) == 0.0, "coeffs0[0] must vanish (f has a zero at a)");
    require(samples >= 2, "need at least two output samples");
    const int K = static_cast<int>(coeffs0.size()) - 1;
    std::vector<double> fact(K + 3, 1.0);
    for (int k = 1; k < K + 3; ++k) fact[k] = fact[k - 1] * k;

    using State = std::vector<double>;
    auto mul = [K](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        std::vector<cplx> r(K + 1, 0.0);
        for (int i = 0; i <= K; ++i)
            for (int j = 0; i + j <= K; ++j) r[i + j] += a[i] * b[j];
        return r;
    };
    auto rhs = [&](const State& s, State& ds, double) {
        std::vector<cplx> p(K + 1), px(K + 1, 0.0), pxx(K + 1, 0.0), pb(K + 1), pxb(K + 1);
        for (int k = 0; k <= K; ++k) p[k] = cplx(s[2 * k], s[2 * k + 1]);
        for (int k = 0; k < K; ++k) px[k] = double(k + 1) * p[k + 1];
        for (int k = 0; k + 1 < K; ++k) pxx[k] = double((k + 1) * (k + 2)) * p[k + 2];
        for (int k = 0; k <= K; ++k) {
            pb[k] = std::conj(p[k]);
            pxb[k] = std::conj(px[k]);
        }
        const auto m2 = mul(p, pb);
        auto n = mul(m2, pxx);
        const auto t2 = mul(p, mul(px, pxb));
        const auto t3 = mul(pb, mul(px, px));
        const auto t4 = mul(m2, p);
        for (int k = 0; k <= K; ++k) {
            const cplx nk = n[k] + spec.alpha1 * t2[k] + spec.beta1 * t3[k] + spec.mu1 * t4[k];
            const cplx dp = cplx(0, 1) * nk; // i f_t = -N(f)
            ds[2 * k] = dp.real();
            ds[2 * k + 1] = dp.imag();
        }
    };

    State s(2 * (K + 1));
    for (int k = 0; k <= K; ++k) {
        const cplx p = coeffs0[k] / fact[k];
        s[2 * k] = p.real();
        s[2 * k + 1] = p.imag();
    }
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i) times[i] = t_end * i / (samples - 1);
    std::vector<TaylorCoeffState> out;
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(rel_tol * 1e-3, rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), t_end == 0.0 ? 1e-3 : t_end / 64.0,
                         [&](const State& x, double t) {
                             TaylorCoeffState st;
                             st.t = t;
                             st.coeffs.resize(K + 1);
                             for (int k = 0; k <= K; ++k) st.coeffs[k] = cplx(x[2 * k], x[2 * k + 1]) * fact[k];
                             out.push_back(std::move(st));
                         });
    return out;
}

double y_capital_norm(const Background& bg, double t, double a, double b, int samples) {
    require(b > a && samples >= 2, "bad interval for the Y-norm");
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
    for (int i = 1; i < samples; ++i) {
        const double x = a + (b - a) * i / (samples - 1);
        const BgJet j = bg.jet(t, x);
        const double f = j.f.c[0].real();
        if (!(f > 0.0)) fail(ErrorKind::NonpositiveField, "f <= 0 at x = " + std::to_string(x));
        t1 = std::max(t1, std::abs(std::pow(f, -2.0 / 3.0) * j.f.d(1).real()));
        t2 = std::max(t2, std::abs(std::pow(f, -1.0 / 3.0) * j.f.d(2).real()));
        t3 = std::max(t3, std::abs(f));
        t4 = std::max(t4, std::abs(j.f.d(3).real()));
    }
    return t1 * t1 * t1 + std::pow(t2, 1.5) + t3 + t4;
}

} // namespace dlab
