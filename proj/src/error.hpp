#pragma once

#include <stdexcept>
#include <string>

namespace scratchkit {

enum class ErrorCode {
    MalformedArchive,
    MalformedJson,
    GraphInconsistency,
    ValidationFailure,
    DuplicateOpcode,
    MissingField,
    NoMatch,
    EmptyCatalog,
    EmptyTemplate,
    EmptyFinal,
    OutOfRange,
    ArityMismatch,
    DanglingEnd,
    UnknownTarget,
    IdCollision,
    EmptyCorpus,
    EmptyQuestion,
    NoBlockArray,
    EmptyBlockArray,
    TransportFailure,
    PromptTooLong,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace scratchkit
