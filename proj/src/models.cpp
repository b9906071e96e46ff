#include "dlab/models.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/error.hpp"

namespace dlab {

namespace {

// smallest integer strictly greater than s; floor(s)+1 already covers integer s
int next_integer_above(double s) { return static_cast<int>(std::floor(s)) + 1; }

} // namespace

Exponents schrodinger_exponents(const SchrodingerSpec& spec) {
    require(std::isfinite(spec.alpha1) && std::isfinite(spec.beta1), "non-finite coefficients");
    const double sc = spec.sigma_c();
    return {sc, std::max(2, next_integer_above(sc - 0.5))};
}

Exponents kdv_exponents(const KdvSpec& spec) {
    require(std::isfinite(spec.alpha1) && std::isfinite(spec.mu1), "non-finite coefficients");
    const double sc = spec.sigma_c();
    return {sc, std::max(5, next_integer_above(sc - 0.5))};
}

const char* error_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::WeightSingularOnSupport: return "WeightSingularOnSupport";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NonpositiveField: return "NonpositiveField";
    case ErrorKind::NonrealPower: return "NonrealPower";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::OutsideDomainOfValidity: return "OutsideDomainOfValidity";
    case ErrorKind::NoDoubling: return "NoDoubling";
    case ErrorKind::PrincipalVanishes: return "PrincipalVanishes";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::BetaBlowup: return "BetaBlowup";
    case ErrorKind::DegenerateOnPath: return "DegenerateOnPath";
    case ErrorKind::X1ConditionViolated: return "X1ConditionViolated";
    case ErrorKind::UnstableGrowth: return "UnstableGrowth";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace dlab
