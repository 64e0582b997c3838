#include "sv/error.hpp"

namespace sv {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingAsset: return "MissingAsset";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ManifestInvalid: return "ManifestInvalid";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::WeightError: return "WeightError";
        case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
        case ErrorCode::ObjectMismatch: return "ObjectMismatch";
        case ErrorCode::BadLength: return "BadLength";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

int error_exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingAsset: return 4;
        case ErrorCode::DimensionMismatch: return 5;
        case ErrorCode::ManifestInvalid: return 6;
        case ErrorCode::SchemaError: return 7;
        case ErrorCode::TransportError: return 8;
        case ErrorCode::AuthError: return 9;
        case ErrorCode::ParseError: return 10;
        case ErrorCode::WeightError: return 11;
        case ErrorCode::EmptyCandidateSet: return 12;
        case ErrorCode::ObjectMismatch: return 13;
        case ErrorCode::BadLength: return 14;
        case ErrorCode::LengthMismatch: return 15;
        case ErrorCode::IoError: return 16;
    }
    return 1;
}

const char* schema_error_kind_name(SchemaErrorKind kind) {
    switch (kind) {
        case SchemaErrorKind::missing_field: return "missing_field";
        case SchemaErrorKind::bad_type: return "bad_type";
        case SchemaErrorKind::frame_budget_mismatch: return "frame_budget_mismatch";
        case SchemaErrorKind::M_out_of_range: return "M_out_of_range";
        case SchemaErrorKind::frame_count: return "frame_count";
        case SchemaErrorKind::unknown_object: return "unknown_object";
        case SchemaErrorKind::invalid_box: return "invalid_box";
    }
    return "schema";
}

}  // namespace sv
