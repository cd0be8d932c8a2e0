#pragma once

#include <stdexcept>
#include <string>

namespace ndsf {

// Every error raised by the library derives from Error so callers can catch
// the whole family at once; the subclasses map onto CLI exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };

// Invalid or inconsistent configuration. `field` carries the JSON path of the
// offending entry when known (e.g. "model.gamma").
struct ConfigError : Error {
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field(std::move(field)) {}
    std::string field;
};

// Raised when the accumulated discarded weight of an evolution exceeds the
// configured budget. Samples up to last_valid_time were already delivered.
struct TruncationOverflow : Error {
    TruncationOverflow(double last_valid_time, double accumulated_discard)
        : Error("truncation budget exhausted after t = " + std::to_string(last_valid_time)),
          last_valid_time(last_valid_time),
          accumulated_discard(accumulated_discard) {}
    double last_valid_time;
    double accumulated_discard;
};

}  // namespace ndsf
