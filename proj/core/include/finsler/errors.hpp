#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Configuration / input errors (bad grammar, source outside table, ...).
// The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures during a computation. The CLI maps these to exit code 3
// and prints name() on the diagnostic stream.
struct NumericError : std::runtime_error {
    NumericError(std::string error_name, const std::string& msg)
        : std::runtime_error(error_name + ": " + msg), name_(std::move(error_name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

#define FINSLER_DEFINE_ERROR(NAME)                                           \
    struct NAME : NumericError {                                             \
        explicit NAME(const std::string& msg) : NumericError(#NAME, msg) {}  \
    }

FINSLER_DEFINE_ERROR(NoIntersection);
FINSLER_DEFINE_ERROR(GrazingHit);
FINSLER_DEFINE_ERROR(NotConvex);
FINSLER_DEFINE_ERROR(DegenerateCurve);
FINSLER_DEFINE_ERROR(NonGeneric);
FINSLER_DEFINE_ERROR(DomainEscape);
FINSLER_DEFINE_ERROR(CoincidentPoints);
FINSLER_DEFINE_ERROR(FieldTooStrong);
FINSLER_DEFINE_ERROR(GrazingIncidence);
FINSLER_DEFINE_ERROR(NoTransversalSolution);
FINSLER_DEFINE_ERROR(NoConvergence);
FINSLER_DEFINE_ERROR(ImageNotConvex);
FINSLER_DEFINE_ERROR(PencilBroken);
FINSLER_DEFINE_ERROR(TangentArc);
FINSLER_DEFINE_ERROR(NoProgress);
FINSLER_DEFINE_ERROR(DegenerateCenterCurve);
FINSLER_DEFINE_ERROR(WeakFieldViolation);
FINSLER_DEFINE_ERROR(CuspCountMismatch);

#undef FINSLER_DEFINE_ERROR

// Envelope collapsed below the degeneracy threshold; carries the collapse
// point so callers can still report it.
struct DegenerateEnvelope : NumericError {
    DegenerateEnvelope(const std::string& msg, double cx, double cy, double diam)
        : NumericError("DegenerateEnvelope", msg), center_x(cx), center_y(cy), diameter(diam) {}
    double center_x;
    double center_y;
    double diameter;
};

}  // namespace finsler
