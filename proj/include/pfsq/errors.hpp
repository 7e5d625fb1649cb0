#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace pfsq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an input value was violated (negative rate, m < 1, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A node would run at utilization >= 1.
class SaturationError : public Error {
public:
    SaturationError(std::string resource, double utilization);

    const std::string& resource() const noexcept { return resource_; }
    double utilization() const noexcept { return utilization_; }

private:
    std::string resource_;
    double utilization_;
};

/// No stable routing exists for the offered load.
class InfeasibleError : public Error {
public:
    InfeasibleError(double arrival_rate, double capacity);

    double arrival_rate() const noexcept { return arrival_rate_; }
    /// Maximum stable throughput, sum of 1/S_k.
    double capacity() const noexcept { return capacity_; }

private:
    double arrival_rate_;
    double capacity_;
};

/// Simulation could not continue (event clock lost precision or overflowed).
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace pfsq
