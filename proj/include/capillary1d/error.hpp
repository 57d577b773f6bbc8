#pragma once

#include <stdexcept>
#include <string>

namespace capillary1d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: parameters, initial data, configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The time integrator gave up (step-size underflow, non-finite state).
class IntegratorError : public Error {
public:
    IntegratorError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage_(stage) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// sup|u| reached the entropy anchor a.
class AnchorViolation : public Error {
public:
    AnchorViolation(double sup_u, double anchor)
        : Error("entropy anchor violated: sup|u| = " + std::to_string(sup_u) +
                " >= a = " + std::to_string(anchor)),
          sup_u_(sup_u), anchor_(anchor) {}

    double sup_u() const noexcept { return sup_u_; }
    double anchor() const noexcept { return anchor_; }

private:
    double sup_u_;
    double anchor_;
};

}  // namespace capillary1d
