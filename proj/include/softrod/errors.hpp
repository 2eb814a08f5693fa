#pragma once

#include <stdexcept>
#include <string>

namespace softrod {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SOFTROD_DEFINE_ERROR(Name)                         \
    class Name : public Error {                            \
    public:                                                \
        explicit Name(const std::string &what)             \
            : Error(std::string(#Name ": ") + what) {}     \
    }

// kinematics
SOFTROD_DEFINE_ERROR(NotSkewSymmetric);
SOFTROD_DEFINE_ERROR(ZeroQuaternion);
SOFTROD_DEFINE_ERROR(GridMismatch);
SOFTROD_DEFINE_ERROR(InvalidGrid);

// single actuator continuum model
SOFTROD_DEFINE_ERROR(OutOfWall);
SOFTROD_DEFINE_ERROR(CollapsedWall);
SOFTROD_DEFINE_ERROR(QuadratureFailure);
SOFTROD_DEFINE_ERROR(NonPhysical);
SOFTROD_DEFINE_ERROR(DegenerateSamples);
SOFTROD_DEFINE_ERROR(InvalidParameter);

// constitutive law
SOFTROD_DEFINE_ERROR(NonPositiveStiffness);

// time stepping and integration
SOFTROD_DEFINE_ERROR(InsufficientHistory);
SOFTROD_DEFINE_ERROR(NumericalBlowup);

// configuration and files
SOFTROD_DEFINE_ERROR(ParseError);
SOFTROD_DEFINE_ERROR(IoError);

#undef SOFTROD_DEFINE_ERROR

/// Shooting did not reach tolerance. Carries the best residual seen.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string &what, double best_force_residual,
                  double best_moment_residual, int iterations)
        : Error("NoConvergence: " + what),
          best_force(best_force_residual),
          best_moment(best_moment_residual),
          iterations(iterations) {}

    double best_force;
    double best_moment;
    int iterations;
};

} // namespace softrod
