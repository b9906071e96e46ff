#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

enum class ErrorKind {
    WeightSingularOnSupport,
    GridTooCoarse,
    NonpositiveField,
    NonrealPower,
    BlowupDetected,
    OutsideDomainOfValidity,
    NoDoubling,
    PrincipalVanishes,
    UnderResolved,
    BetaBlowup,
    DegenerateOnPath,
    X1ConditionViolated,
    UnstableGrowth,
    DegenerateFit,
    SchemaError,
    InvalidArgument,
};

const char* error_name(ErrorKind kind);

class LabError : public std::runtime_error {
public:
    LabError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw LabError(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

} // namespace dlab
