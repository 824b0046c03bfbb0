#pragma once

#include <stdexcept>
#include <string>

namespace labelset {

enum class ErrorCode {
    NegativeProbability,
    RowSumViolation,
    IndexOutOfRange,
    EmptyVolume,
    EmptyLabelSet,
    DimsMismatch,
    NotLeafPartition,
    StepTooSmall,
    OutOfDomain,
    LPrimeIsFullSpace,
    ShapeMismatch,
    TooFewVolumes,
    NonFiniteLoss,
    BadMagic,
    TruncatedFile,
    InvalidBitmask,
    NonFiniteValue,
    InvalidHeader,
    ConfigInvalid,
    MissingData,
    IoError,
    InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NegativeProbability: return "NegativeProbability";
        case ErrorCode::RowSumViolation:     return "RowSumViolation";
        case ErrorCode::IndexOutOfRange:     return "IndexOutOfRange";
        case ErrorCode::EmptyVolume:         return "EmptyVolume";
        case ErrorCode::EmptyLabelSet:       return "EmptyLabelSet";
        case ErrorCode::DimsMismatch:        return "DimsMismatch";
        case ErrorCode::NotLeafPartition:    return "NotLeafPartition";
        case ErrorCode::StepTooSmall:        return "StepTooSmall";
        case ErrorCode::OutOfDomain:         return "OutOfDomain";
        case ErrorCode::LPrimeIsFullSpace:   return "LPrimeIsFullSpace";
        case ErrorCode::ShapeMismatch:       return "ShapeMismatch";
        case ErrorCode::TooFewVolumes:       return "TooFewVolumes";
        case ErrorCode::NonFiniteLoss:       return "NonFiniteLoss";
        case ErrorCode::BadMagic:            return "BadMagic";
        case ErrorCode::TruncatedFile:       return "TruncatedFile";
        case ErrorCode::InvalidBitmask:      return "InvalidBitmask";
        case ErrorCode::NonFiniteValue:      return "NonFiniteValue";
        case ErrorCode::InvalidHeader:       return "InvalidHeader";
        case ErrorCode::ConfigInvalid:       return "ConfigInvalid";
        case ErrorCode::MissingData:         return "MissingData";
        case ErrorCode::IoError:             return "IoError";
        case ErrorCode::InvalidArgument:     return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) raise(code, message);
}

}  // namespace labelset
