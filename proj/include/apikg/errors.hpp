#pragma once

#include <stdexcept>
#include <string>

namespace apikg {

// Base class for every failure the pipeline can surface. The exit code
// groups errors the way the CLI reports them: 2 = configuration,
// 3 = provider/transport, 4 = bad data (inputs, model output, artifacts).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ProviderError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

// Transport gave up: endpoint unreachable, non-retryable status, or all
// retry attempts exhausted.
class ProviderUnavailable : public ProviderError {
public:
    using ProviderError::ProviderError;
};

// Replay backend has no recorded response for (unit, prompt hash).
class FixtureMiss : public ProviderError {
public:
    using ProviderError::ProviderError;
};

// The configured request cap would be exceeded by the next call.
class BudgetExceeded : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class DuplicateId : public DataError {
public:
    using DataError::DataError;
};

// Model output did not match the unit's output grammar, even after the
// one allowed repair retry.
class MalformedOutput : public DataError {
public:
    using DataError::DataError;
};

class MalformedTemplate : public DataError {
public:
    using DataError::DataError;
};

class MissingBinding : public DataError {
public:
    explicit MissingBinding(const std::string& slot)
        : DataError("missing binding for input variable '" + slot + "'"), slot_(slot) {}
    const std::string& slot() const noexcept { return slot_; }

private:
    std::string slot_;
};

class UnknownSlot : public DataError {
public:
    explicit UnknownSlot(const std::string& slot)
        : DataError("binding refers to undeclared input variable '" + slot + "'"), slot_(slot) {}
    const std::string& slot() const noexcept { return slot_; }

private:
    std::string slot_;
};

// A fusion mapping failed to cover every low-level type (only raised in
// strict mode; the default path repairs with singleton categories).
class CoverageGap : public DataError {
public:
    using DataError::DataError;
};

class EmptyVocabulary : public DataError {
public:
    using DataError::DataError;
};

class EmptyKG : public DataError {
public:
    using DataError::DataError;
};

// Model used a type label that is not part of the guiding schema
// (fatal in strict mode; dropped with a warning otherwise).
class UnknownType : public DataError {
public:
    using DataError::DataError;
};

class MissingAnnotation : public DataError {
public:
    using DataError::DataError;
};

}  // namespace apikg
