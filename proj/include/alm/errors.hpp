#pragma once

#include <stdexcept>
#include <string>

namespace alm {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, out-of-range index, invalid parameter.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// The Riccati flow left the exponential-moment domain.
class DomainError : public Error {
public:
    DomainError(const std::string& what, double blowup_time)
        : Error(what), blowup_time_(blowup_time) {}

    /// Time (flow lag) at which the blow-up was detected.
    double blowup_time() const noexcept { return blowup_time_; }

private:
    double blowup_time_;
};

/// A calibration target could not be reached along the manifold.
class FitError : public Error {
public:
    FitError(const std::string& what, int index = -1, double maturity = 0.0)
        : Error(what), index_(index), maturity_(maturity) {}

    int index() const noexcept { return index_; }
    double maturity() const noexcept { return maturity_; }

private:
    int index_;
    double maturity_;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Contract with a vanishing annuity or empty legs.
class DegenerateContractError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ComparisonError : public Error {
public:
    using Error::Error;
};

}  // namespace alm
