#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "dlab/background.hpp"
#include "dlab/grid.hpp"
#include "dlab/jet.hpp"
#include "dlab/models.hpp"
#include "dlab/norms.hpp"

namespace dlab {

// amplitude * exp(-1/(1-z^2)), z = (s - mid)/half, supported in (lo, hi)
class BumpProfile {
public:
    BumpProfile(double lo, double hi, cplx amplitude = 1.0);
    // unit L² norm; the phase of `phase` is kept
    static BumpProfile normalized(double lo, double hi, cplx phase = 1.0);
    // default profile on (x1/2, x1)
    static BumpProfile standard(double x1, cplx phase = 1.0) { return normalized(0.5 * x1, x1, phase); }

    Jet<cplx, 4> jet(double s) const;
    cplx operator()(double s) const { return jet(s).c[0]; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    cplx amplitude() const { return amp_; }
    // Σ_{j<=n} ||(L ∂)^j g||_{L²}
    double sobolev(int n, double L = 1.0) const;

private:
    double lo_, hi_;
    cplx amp_;
};

// profile in a y-coordinate with three derivatives
struct YProfile {
    std::function<Jet<cplx, 3>(double)> jet;
    double lo = 0.0;
    double hi = 0.0;

    // Σ_{j<=n} ||∂_y^j a||_{L²_y}, n <= 3
    double sobolev(int n) const;
};

// a0(y) = e^y g0(e^y): the model packet whose initial value matches g0(x) e^{iλ ln x}
YProfile model_profile_from_g0(const BumpProfile& g0);
// a0(y) = x1^{1/2} g0(x(0, y)) for the background's y-coordinate
YProfile y_profile_from_g0(const BumpProfile& g0, BackgroundPtr bg, YKind kind);

enum class PacketKind { schrodinger_model, schrodinger_general, kdv };

struct PacketSample {
    cplx v, vx, vxx, vxxx, vt;
};

class Packet {
public:
    virtual ~Packet() = default;
    virtual PacketKind kind() const = 0;
    virtual double lambda() const = 0;
    virtual PacketSample eval(double t, double x) const = 0;
    // y-interval containing the support at time t
    virtual std::pair<double, double> support_y(double t) const = 0;
    virtual double x_of_y(double t, double y) const = 0;
    virtual double dx_dy(double t, double x) const = 0;
    // prefactor: 0 for the model packet, else the background
    virtual const Background* background() const { return nullptr; }
};

using PacketPtr = std::shared_ptr<const Packet>;

struct PacketOptions {
    // keep the 1/(2iλ) conjugate correction
    bool correction = true;
    // a = exp(wkb_sign * iλS) a0
    int wkb_sign = -1;
    // KdV: cosine (default) or sine phase
    bool sine = false;
};

PacketPtr model_packet_schrodinger(double lambda, YProfile a0, PacketOptions opt = {});
PacketPtr packet_schrodinger(BackgroundPtr bg, const SchrodingerSpec& spec, double lambda, const BumpProfile& g0,
                             PacketOptions opt = {});
PacketPtr packet_kdv(BackgroundPtr bg, const KdvSpec& spec, double lambda, const BumpProfile& g0,
                     PacketOptions opt = {});

// uniform y-grid over the padded support at t, mapped to x; step 2π/(|λ| npw)
GridPtr packet_grid(const Packet& p, double t, int nodes_per_wavelength = 24, double pad = 0.1);
GridField packet_field(const Packet& p, double t, GridPtr grid);

// model: ||ε||_{L²_w}, w = |x|
double residual_model(const Packet& p, double t, const Grid1D& grid);
// ||ε||_{L²_w} with and without the support mask are equal; the field form is used by tests
GridField residual_field_model(const Packet& p, double t, GridPtr grid);
// general Schrödinger: weighted residual |f|^{-σ_c} ε as a field, and its L² norm
GridField residual_field_schrodinger(const Packet& p, const SchrodingerSpec& spec, double t, GridPtr grid);
double residual_schrodinger(const Packet& p, const SchrodingerSpec& spec, double t, GridPtr grid);
// KdV: f^{-σ_c/3} (∂_t + L_f) φ, restricted to the exact region x <= x_exact
GridField residual_field_kdv(const Packet& p, const KdvSpec& spec, double t, GridPtr grid);
double residual_kdv(const Packet& p, const KdvSpec& spec, double t, GridPtr grid);

// weight exponents for the packet norms: model |x|^{1/2+γ}, Schrödinger |f|^{-σ_c+γ}, KdV f^{(-σ_c+γ)/3}
double packet_weighted_norm(const Packet& p, double sigma_c, double gamma, double pnorm, double t,
                            int nodes_per_wavelength = 24);
// Schrödinger ||| f|^{-σ_c} (|f| ∂_x)^n φ̃||_{L²}, model uses |x| for |f|
double packet_regularity_norm(const Packet& p, double sigma_c, int n, double t, int nodes_per_wavelength = 24);

struct DegenerationReport {
    std::vector<double> times;
    std::vector<double> norms;
    double fitted_rate = 0.0;
    double r_squared = 0.0;
    double predicted_rate = 0.0;
};

// fits log ||weight · packet||_{L^p} against t; the weight exponent is γ' + s
DegenerationReport degeneration_report(const Packet& p, double sigma_c, double gamma_prime, double pnorm, int s,
                                       const std::vector<double>& times, int nodes_per_wavelength = 24);

// rightmost x where |packet| exceeds rel_tol · max on the grid
double support_right_endpoint(const Packet& p, double t, double rel_tol = 1e-12, int nodes_per_wavelength = 24);
// predicted envelope: e^{-|λ|A²t} x1 (Schrödinger), C x1 e^{-3β(t)A^{2/3}λ²t} (KdV)
double support_envelope(const Packet& p, double t);

// general Schrödinger packets: min of 1 + ∂_y S over the support at t (the construction needs >= 1/2)
double schrodinger_validity_margin(const Packet& p, double t, const Grid1D& grid);

enum class PairingKind { schrodinger, kdv };
// ∫ W u conj(v) dx with W = |f|^{-2σ_c} or f^{-2σ_c/3}
cplx bilinear_pairing(const GridField& u, const GridField& v, const Background& bg, double sigma_c, PairingKind kind,
                      double t);

} // namespace dlab
