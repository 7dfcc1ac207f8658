#pragma once

#include <stdexcept>
#include <string>

namespace hadmin {

// Every engine failure derives from Error so the CLI can map classes to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration: ranges, probability vectors, capacity ranges with no divisor.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Disease knowledge base does not cover a department that was selected.
class CoverageError : public Error {
public:
    using Error::Error;
};

// Malformed input document (JSON, JSONL, YAML shape, model output).
class FormatError : public Error {
public:
    using Error::Error;
};

// Timestamp or slot index outside the operating grid / horizon.
class RangeError : public Error {
public:
    using Error::Error;
};

// Attempt to book a slot that is already busy.
class BookingConflict : public Error {
public:
    using Error::Error;
};

// Unknown resource, physician, department or appointment.
class NotFound : public Error {
public:
    using Error::Error;
};

// Operation is illegal at the current virtual time (past slots, running appointments).
class TemporalError : public Error {
public:
    using Error::Error;
};

// Backend I/O failure. Carries the id of the resource being written when known.
class BackendError : public Error {
public:
    BackendError(const std::string& what, std::string resource_id = {})
        : Error(resource_id.empty() ? what : what + " (resource " + resource_id + ")"),
          resource_id_(std::move(resource_id)) {}

    const std::string& resource_id() const noexcept { return resource_id_; }

private:
    std::string resource_id_;
};

} // namespace hadmin
