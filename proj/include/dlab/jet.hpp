#pragma once

// Truncated Taylor series arithmetic. c[k] holds f^(k)(x0)/k!.

#include <array>
#include <cmath>
#include <complex>

namespace dlab {

using cplx = std::complex<double>;

template <class T, int N>
struct Jet {
    std::array<T, N + 1> c{};

    static Jet constant(T v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    static Jet variable(T v) {
        Jet j;
        j.c[0] = v;
        if constexpr (N >= 1) j.c[1] = T(1);
        return j;
    }

    T value() const { return c[0]; }
    // k-th derivative at the expansion point
    T d(int k) const {
        double fact = 1.0;
        for (int i = 2; i <= k; ++i) fact *= i;
        return c[k] * fact;
    }

    Jet& operator+=(const Jet& o) {
        for (int k = 0; k <= N; ++k) c[k] += o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
        return *this;
    }
    Jet& operator*=(T s) {
        for (auto& v : c) v *= s;
        return *this;
    }
};

template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, const Jet<T, N>& b) { return a += b; }
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, const Jet<T, N>& b) { return a -= b; }
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a) {
    for (auto& v : a.c) v = -v;
    return a;
}
template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, T s) {
    a.c[0] += s;
    return a;
}
template <class T, int N>
Jet<T, N> operator+(T s, Jet<T, N> a) { return a + s; }
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, T s) {
    a.c[0] -= s;
    return a;
}
template <class T, int N>
Jet<T, N> operator-(T s, const Jet<T, N>& a) { return -a + s; }
template <class T, int N>
Jet<T, N> operator*(Jet<T, N> a, T s) { return a *= s; }
template <class T, int N>
Jet<T, N> operator*(T s, Jet<T, N> a) { return a *= s; }
template <class T, int N>
Jet<T, N> operator/(Jet<T, N> a, T s) { return a *= T(1) / s; }

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
    Jet<T, N> r;
    for (int k = 0; k <= N; ++k) {
        T s{};
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}

template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
    Jet<T, N> r;
    for (int k = 0; k <= N; ++k) {
        T s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}

template <class T, int N>
Jet<T, N> operator/(T s, const Jet<T, N>& b) { return Jet<T, N>::constant(s) / b; }

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
    Jet<T, N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        T s{};
        for (int i = 1; i <= k; ++i) s += double(i) * a.c[i] * r.c[k - i];
        r.c[k] = s / double(k);
    }
    return r;
}

template <class T, int N>
Jet<T, N> log(const Jet<T, N>& a) {
    Jet<T, N> r;
    r.c[0] = std::log(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        T s = double(k) * a.c[k];
        for (int i = 1; i < k; ++i) s -= double(i) * r.c[i] * a.c[k - i];
        r.c[k] = s / (double(k) * a.c[0]);
    }
    return r;
}

// a^p for a(x0) away from the branch cut
template <class T, int N>
Jet<T, N> pow(const Jet<T, N>& a, double p) {
    Jet<T, N> r;
    r.c[0] = std::pow(a.c[0], p);
    for (int k = 1; k <= N; ++k) {
        T s{};
        for (int i = 1; i <= k; ++i) s += (p * i - (k - i)) * a.c[i] * r.c[k - i];
        r.c[k] = s / (double(k) * a.c[0]);
    }
    return r;
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& a) { return pow(a, 0.5); }

template <class T, int N>
void sincos(const Jet<T, N>& a, Jet<T, N>& s, Jet<T, N>& co) {
    s = Jet<T, N>{};
    co = Jet<T, N>{};
    s.c[0] = std::sin(a.c[0]);
    co.c[0] = std::cos(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        T ss{}, cc{};
        for (int i = 1; i <= k; ++i) {
            ss += double(i) * a.c[i] * co.c[k - i];
            cc -= double(i) * a.c[i] * s.c[k - i];
        }
        s.c[k] = ss / double(k);
        co.c[k] = cc / double(k);
    }
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
    Jet<T, N> s, c;
    sincos(a, s, c);
    return s;
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
    Jet<T, N> s, c;
    sincos(a, s, c);
    return c;
}

template <int N>
Jet<cplx, N> conj(const Jet<cplx, N>& a) {
    Jet<cplx, N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = std::conj(a.c[k]);
    return r;
}

template <int N>
Jet<double, N> real(const Jet<cplx, N>& a) {
    Jet<double, N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k].real();
    return r;
}

template <int N>
Jet<double, N> imag(const Jet<cplx, N>& a) {
    Jet<double, N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k].imag();
    return r;
}

template <int N>
Jet<cplx, N> complexify(const Jet<double, N>& a) {
    Jet<cplx, N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k];
    return r;
}

// Change of truncation order (drops or zero-pads coefficients).
template <int M, class T, int N>
Jet<T, M> truncate(const Jet<T, N>& a) {
    Jet<T, M> r;
    for (int k = 0; k <= M && k <= N; ++k) r.c[k] = a.c[k];
    return r;
}

// Series of f' (last coefficient is lost).
template <class T, int N>
Jet<T, N - 1> derivative(const Jet<T, N>& a) {
    Jet<T, N - 1> r;
    for (int k = 0; k < N; ++k) r.c[k] = double(k + 1) * a.c[k + 1];
    return r;
}

// Series of the primitive with value v0 at the expansion point.
template <class T, int N>
Jet<T, N + 1> integrate(const Jet<T, N>& a, T v0) {
    Jet<T, N + 1> r;
    r.c[0] = v0;
    for (int k = 0; k <= N; ++k) r.c[k + 1] = a.c[k] / double(k + 1);
    return r;
}

// outer expanded at inner.value(); returns outer(inner(x)).
template <class T, class U, int N>
Jet<T, N> compose(const Jet<T, N>& outer, const Jet<U, N>& inner) {
    Jet<T, N> q;
    for (int k = 1; k <= N; ++k) q.c[k] = T(inner.c[k]);
    Jet<T, N> r = Jet<T, N>::constant(outer.c[N]);
    for (int k = N - 1; k >= 0; --k) r = r * q + outer.c[k];
    return r;
}

// Inverse function series: given y(x) about x0, returns x(y) about y(x0).
template <int N>
Jet<double, N> reverse(const Jet<double, N>& y, double x0) {
    Jet<double, N> x;
    if constexpr (N >= 1) x.c[1] = 1.0 / y.c[1];
    Jet<double, N> ys = y;
    ys.c[0] = 0.0;
    for (int k = 2; k <= N; ++k) {
        // coefficient k of ys(x(e)) must vanish; it is linear in x.c[k] with slope y1
        Jet<double, N> comp = compose(ys, x);
        x.c[k] -= comp.c[k] / y.c[1];
    }
    x.c[0] = x0;
    return x;
}

} // namespace dlab
