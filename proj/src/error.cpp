#include "error.hpp"

namespace scratchkit {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedArchive: return "MalformedArchive";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::GraphInconsistency: return "GraphInconsistency";
    case ErrorCode::ValidationFailure: return "ValidationFailure";
    case ErrorCode::DuplicateOpcode: return "DuplicateOpcode";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::EmptyTemplate: return "EmptyTemplate";
    case ErrorCode::EmptyFinal: return "EmptyFinal";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DanglingEnd: return "DanglingEnd";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::IdCollision: return "IdCollision";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyQuestion: return "EmptyQuestion";
    case ErrorCode::NoBlockArray: return "NoBlockArray";
    case ErrorCode::EmptyBlockArray: return "EmptyBlockArray";
    case ErrorCode::TransportFailure: return "TransportFailure";
    case ErrorCode::PromptTooLong: return "PromptTooLong";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace scratchkit
