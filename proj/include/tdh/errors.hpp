#pragma once

#include <stdexcept>
#include <string>

namespace tdh {

// Base class so callers can catch everything from this library at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};

// diode
struct NoNdr : Error {
    using Error::Error;
};
struct FitDiverged : Error {
    using Error::Error;
};

// circuit
struct StepUnstable : Error {
    using Error::Error;
};

// spectral
struct TraceTooShort : Error {
    using Error::Error;
};
struct NoSignal : Error {
    using Error::Error;
};
struct ZeroDcPower : Error {
    using Error::Error;
};
struct InsufficientPoints : Error {
    using Error::Error;
};

// signature / fingerprint
struct GridMismatch : Error {
    using Error::Error;
};
struct DuplicateId : Error {
    using Error::Error;
};
struct TooFewSweeps : Error {
    using Error::Error;
};
struct EmptyDatabase : Error {
    using Error::Error;
};

// Schema / file problems carry the offending field path ("rows[3].power").
struct SchemaError : Error {
    std::string field_path;
    SchemaError(const std::string& path, const std::string& msg)
        : Error(path + ": " + msg), field_path(path) {}
};

// link budget
struct NonPositiveInput : Error {
    using Error::Error;
};
struct InfeasibleAtContact : Error {
    using Error::Error;
};

// config / CLI
struct ConfigError : Error {
    std::string field_path;
    int line = 0;
    ConfigError(const std::string& path, int line_no, const std::string& msg)
        : Error(path + (line_no > 0 ? " (line " + std::to_string(line_no) + ")" : "") + ": " + msg),
          field_path(path),
          line(line_no) {}
};

}  // namespace tdh
