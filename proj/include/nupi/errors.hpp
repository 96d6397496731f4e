#pragma once

#include <stdexcept>
#include <string>

namespace nupi {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix sizes or agent counts.
struct DimensionError : Error {
    using Error::Error;
};

/// Invalid argument value (zero gain, nonpositive parameter, empty list, ...).
struct ArgumentError : Error {
    using Error::Error;
};

/// Violated structural assumption, e.g. a graph that is not strongly connected
/// where strong connectivity is required.
struct StructureError : Error {
    using Error::Error;
};

/// A documented operation precondition does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

/// Query outside the time range covered by a finite schedule.
struct OutOfRangeError : Error {
    using Error::Error;
};

/// Operation applied to the wrong agent model (SI vs DI).
struct ModelError : Error {
    using Error::Error;
};

/// Malformed input file; the message carries file and line when known.
struct ParseError : Error {
    using Error::Error;
};

/// Simulation state became non-finite or exceeded the blowup guard.
class DivergenceError : public Error {
public:
    explicit DivergenceError(double time)
        : Error("state diverged at t = " + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace nupi
