#pragma once

#include <stdexcept>
#include <string>

namespace blockctm {

/// Base of every library error. `kind()` is a stable, machine-readable tag
/// used by the CLI and HTTP layers when reporting failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "domain"; }
};

/// An operation was invoked with inputs violating its precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "precondition"; }
};

class DimensionError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "dimension"; }
};

/// Malformed, truncated or unsupported file / byte stream.
class FormatError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "format"; }
};

class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "io"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "config"; }
};

/// Feature extraction failed for one data set item.
class ExtractionError : public Error {
public:
    ExtractionError(std::string image_id, const std::string& message)
        : Error("image '" + image_id + "': " + message), image_id_(std::move(image_id)) {}
    [[nodiscard]] const char* kind() const noexcept override { return "extraction"; }
    [[nodiscard]] const std::string& image_id() const noexcept { return image_id_; }

private:
    std::string image_id_;
};

}  // namespace blockctm
