/// @file error.hpp
/// @brief Exception hierarchy shared by all fbjudge modules.
///
/// Every failure the harness reports is an `fbjudge::Error` carrying a short
/// stable `kind()` string. Batch stages record `kind()` in failure manifests,
/// so the strings are part of the on-disk format.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbjudge {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// ---------------------------------------------------------------------------
// corpus / io

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t line, std::string field, const std::string& message)
        : Error("SchemaError",
                "line " + std::to_string(line) + ", field '" + field + "': " + message),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id)
        : Error("DuplicateId", "duplicate id '" + id + "'"), id_(std::move(id)) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

// ---------------------------------------------------------------------------
// prompts

class MissingField : public Error {
public:
    explicit MissingField(std::string field)
        : Error("MissingField", "missing or empty field '" + field + "'"),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class TemplateError : public Error {
public:
    explicit TemplateError(const std::string& message) : Error("TemplateError", message) {}
};

// ---------------------------------------------------------------------------
// backends

class BackendError : public Error {
public:
    using Error::Error;
};

class AuthError : public BackendError {
public:
    explicit AuthError(const std::string& message) : BackendError("AuthError", message) {}
};

class BudgetExceeded : public BackendError {
public:
    explicit BudgetExceeded(const std::string& message)
        : BackendError("BudgetExceeded", message) {}
};

class TransportError : public BackendError {
public:
    explicit TransportError(const std::string& message)
        : BackendError("TransportError", message) {}
};

/// Non-transient HTTP failure (4xx other than 401/403/429). Never retried.
class HttpStatusError : public BackendError {
public:
    HttpStatusError(int status, const std::string& message)
        : BackendError("HttpStatusError", message), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Server answered 200 but the body is not a chat completion.
class ProtocolError : public BackendError {
public:
    explicit ProtocolError(const std::string& message) : BackendError("ProtocolError", message) {}
};

class EmptyResponse : public BackendError {
public:
    explicit EmptyResponse(const std::string& message) : BackendError("EmptyResponse", message) {}
};

class UnscriptedRequest : public BackendError {
public:
    explicit UnscriptedRequest(const std::string& message)
        : BackendError("UnscriptedRequest", message) {}
};

// ---------------------------------------------------------------------------
// judge

class JudgmentParseError : public Error {
public:
    JudgmentParseError(std::string kind, int criterion, const std::string& message)
        : Error(std::move(kind), message), criterion_(criterion) {}

    /// 1-based criterion number the error refers to.
    int criterion() const noexcept { return criterion_; }

private:
    int criterion_;
};

class MissingCriterion : public JudgmentParseError {
public:
    explicit MissingCriterion(int n)
        : JudgmentParseError("MissingCriterion", n,
                             "no answer for criterion (" + std::to_string(n) + ")") {}
};

class DuplicateCriterion : public JudgmentParseError {
public:
    explicit DuplicateCriterion(int n)
        : JudgmentParseError("DuplicateCriterion", n,
                             "criterion (" + std::to_string(n) + ") answered more than once") {}
};

class MalformedAnswer : public JudgmentParseError {
public:
    explicit MalformedAnswer(int n)
        : JudgmentParseError("MalformedAnswer", n,
                             "answer to criterion (" + std::to_string(n) + ") is not Yes/No") {}
};

class UnknownRequest : public Error {
public:
    explicit UnknownRequest(const std::string& id)
        : Error("UnknownRequest", "request id '" + id + "' is not in the corpus") {}
};

// ---------------------------------------------------------------------------
// metrics / aggregate / cli

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("EmptyInput", what + " is empty") {}
};

class InvalidBeta : public Error {
public:
    explicit InvalidBeta(double beta)
        : Error("InvalidBeta", "beta must be > 0, got " + std::to_string(beta)) {}
};

class NoLabeledItems : public Error {
public:
    explicit NoLabeledItems(const std::string& message) : Error("NoLabeledItems", message) {}
};

class NoJudgments : public Error {
public:
    explicit NoJudgments(const std::string& message) : Error("NoJudgments", message) {}
};

class NoItems : public Error {
public:
    explicit NoItems(const std::string& message) : Error("NoItems", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

class UnknownBackend : public Error {
public:
    explicit UnknownBackend(const std::string& name)
        : Error("UnknownBackend", "backend '" + name + "' is not defined in the config") {}
};

}  // namespace fbjudge
