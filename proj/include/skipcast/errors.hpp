#ifndef SKIPCAST_ERRORS_HPP
#define SKIPCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace skipcast {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- trace ---
struct FileNotFound : Error {
    using Error::Error;
};
struct ParseError : Error {
    ParseError(std::string msg, int line_arg)
        : Error(std::move(msg) + " (line " + std::to_string(line_arg) + ")"), line(line_arg) {}
    int line;
};
struct EmptyTrace : Error {
    using Error::Error;
};
struct InvalidSpec : Error {
    using Error::Error;
};

// --- forecast ---
struct EmptyHistory : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct DivergedTraining : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};

// --- protocol ---
struct ValueOverflow : Error {
    using Error::Error;
};
struct TruncatedPacket : Error {
    using Error::Error;
};
struct BadTypeTag : Error {
    using Error::Error;
};
struct ProtocolViolation : Error {
    using Error::Error;
};

// --- sim ---
struct TraceTooShort : Error {
    using Error::Error;
};
struct ForecastDiverged : Error {
    using Error::Error;
};

// --- cli / config ---
struct ConfigError : Error {
    ConfigError(const std::string& field_arg, const std::string& msg)
        : Error("config field '" + field_arg + "': " + msg), field(field_arg) {}
    std::string field;
};

} // namespace skipcast

#endif
