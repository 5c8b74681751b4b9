#pragma once
// Error type shared by every module. The C API maps ErrorCode 1:1 onto
// lp_status values, so keep the two enums in the same order.

#include <stdexcept>
#include <string>

namespace lexiphylo {

enum class ErrorCode : int {
    InvalidArgument = 1,
    Io,
    ParseError,
    UnknownSymbol,
    EmptyForm,
    DuplicateDoculect,
    UnknownConcept,
    EmptyCorpus,
    NoAlignedPairs,
    NoPairsAboveTheta,
    MaxEvaluationsExceeded,
    EmptyList,
    NoSharedConcepts,
    UndefinedConcept,
    MissingDistance,
    DegenerateLabels,
    ItemSetMismatch,
    InsufficientFamilies,
    TaxaMismatch,
    NameCollision,
    SyntaxError,
    MissingEntries,
    TooFewTaxa,
    LeafNotFound,
    NoCandidate,
    NoResolvedQuartets,
    UnrootedTree,
    OutOfRange,
    ZeroVector,
    SizeMismatch,
    SingularCovariance,
    StageFailure,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace lexiphylo
