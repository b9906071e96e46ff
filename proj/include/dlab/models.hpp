#pragma once

#include <complex>

namespace dlab {

// i u_t + |u|^2 u_xx + α₁ u|u_x|^2 + β₁ ū u_x^2 + μ₁|u|^2 u = 0 (μ₁ = 0 for the exact backgrounds)
struct SchrodingerSpec {
    double alpha1 = 1.0;
    double beta1 = 1.0;
    std::complex<double> mu1{0.0, 0.0};

    double sigma_c() const { return -(alpha1 / 2.0 + beta1 - 1.0); }
};

// u_t + u u_xxx + α₁ u_x u_xx + (μ₁/m)(u^m)_x = 0
struct KdvSpec {
    double alpha1 = 3.0;
    double mu1 = 0.0;
    int m = 2;

    double sigma_c() const { return -(alpha1 - 1.5); }
};

struct Exponents {
    double sigma_c;
    int s_c;
};

Exponents schrodinger_exponents(const SchrodingerSpec& spec);
Exponents kdv_exponents(const KdvSpec& spec);

} // namespace dlab
