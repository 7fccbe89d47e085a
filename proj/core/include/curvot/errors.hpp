#pragma once

#include <stdexcept>
#include <string>

namespace curvot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All masses (or densities) of a measure are zero.
struct ZeroTotalMass : Error {
    ZeroTotalMass() : Error("total mass is zero") {}
    explicit ZeroTotalMass(const std::string& what) : Error(what) {}
};

/// All active segments of a polyline are degenerate.
struct ZeroTotalLength : Error {
    ZeroTotalLength() : Error("total active segment length is zero") {}
};

/// Input geometry is degenerate beyond what the algorithm tolerates.
struct DegenerateInput : Error {
    using Error::Error;
};

/// The segment tracer stopped making progress; usually a tolerance violation.
struct TraceStall : Error {
    using Error::Error;
};

/// A shape derivative was requested from a dual potential that is not
/// converged to the declared tolerance.
struct StaleDual : Error {
    using Error::Error;
};

struct ParseError : Error {
    int line;
    ParseError(const std::string& what, int line_number)
        : Error(what + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace curvot
