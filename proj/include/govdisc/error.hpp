#pragma once

#include <stdexcept>
#include <string>

namespace govdisc {

// Exit codes are part of the CLI contract.
enum class ExitCode : int {
    Success = 0,
    ValidationFailed = 1,
    Config = 2,
    Data = 3,
    Numerical = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept = 0;
};

/// Bad options, hyperparameters, plans or mismatched models.
class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Config; }
};

/// Missing or misnamed columns / schema keys. Carries the offending name.
class SchemaError : public ConfigError {
public:
    SchemaError(std::string name, const std::string& what)
        : ConfigError(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Model file that cannot be interpreted (unknown format id or version).
class FormatError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Model file whose checksum does not match its body.
class CorruptionError : public FormatError {
public:
    using FormatError::FormatError;
};

class DataError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Data; }
};

/// Layer selection outside the available layers or selecting nothing.
class RangeError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Numerical; }
};

/// Refit coefficient outside [-M, M].
class BigMViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace govdisc
