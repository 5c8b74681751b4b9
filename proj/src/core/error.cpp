#include "lexiphylo/error.hpp"

namespace lexiphylo {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::EmptyForm: return "EmptyForm";
        case ErrorCode::DuplicateDoculect: return "DuplicateDoculect";
        case ErrorCode::UnknownConcept: return "UnknownConcept";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::NoAlignedPairs: return "NoAlignedPairs";
        case ErrorCode::NoPairsAboveTheta: return "NoPairsAboveTheta";
        case ErrorCode::MaxEvaluationsExceeded: return "MaxEvaluationsExceeded";
        case ErrorCode::EmptyList: return "EmptyList";
        case ErrorCode::NoSharedConcepts: return "NoSharedConcepts";
        case ErrorCode::UndefinedConcept: return "UndefinedConcept";
        case ErrorCode::MissingDistance: return "MissingDistance";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::ItemSetMismatch: return "ItemSetMismatch";
        case ErrorCode::InsufficientFamilies: return "InsufficientFamilies";
        case ErrorCode::TaxaMismatch: return "TaxaMismatch";
        case ErrorCode::NameCollision: return "NameCollisionAfterSanitization";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::MissingEntries: return "MissingEntries";
        case ErrorCode::TooFewTaxa: return "TooFewTaxa";
        case ErrorCode::LeafNotFound: return "LeafNotFound";
        case ErrorCode::NoCandidate: return "NoCandidate";
        case ErrorCode::NoResolvedQuartets: return "NoResolvedQuartets";
        case ErrorCode::UnrootedTree: return "UnrootedTree";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::StageFailure: return "StageFailure";
    }
    return "Unknown";
}

}  // namespace lexiphylo
