#pragma once

#include <stdexcept>
#include <string>

namespace sv {

enum class ErrorCode {
    // scene bundle
    MissingAsset,
    DimensionMismatch,
    ManifestInvalid,
    // structured-output parsing
    SchemaError,
    // remote backends
    TransportError,
    AuthError,
    ParseError,
    // verification
    WeightError,
    // search
    EmptyCandidateSet,
    // export
    ObjectMismatch,
    BadLength,
    LengthMismatch,
    // generic
    IoError,
};

const char* error_code_name(ErrorCode code);

/// Process exit code associated with each error class (documented in the README).
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Detail of a rejected planner/LLM response. Each kind triggers resampling by the caller.
enum class SchemaErrorKind {
    missing_field,
    bad_type,
    frame_budget_mismatch,
    M_out_of_range,
    frame_count,
    unknown_object,
    invalid_box,
};

const char* schema_error_kind_name(SchemaErrorKind kind);

class SchemaError : public Error {
public:
    SchemaError(SchemaErrorKind kind, std::string detail)
        : Error(ErrorCode::SchemaError,
                std::string(schema_error_kind_name(kind)) + ": " + detail),
          kind_(kind) {}

    SchemaErrorKind kind() const { return kind_; }

private:
    SchemaErrorKind kind_;
};

}  // namespace sv
