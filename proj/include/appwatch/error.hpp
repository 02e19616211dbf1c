#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace appwatch {

enum class Errc {
    InvalidDate,
    InvalidRecord,
    MalformedLine,
    DuplicateAppId,
    DateMismatch,
    StarsOutOfRange,
    NonPositiveRank,
    IoFailure,
    SnapshotNotFound,
    ConcurrentWrite,
    InvalidOrder,
    EmptyRange,
    EmptyInput,
    EmptyWindow,
    NoRemovals,
    InvalidArgument,
    SingleClass,
    NonFiniteFeature,
    DimensionMismatch,
    EmptyDataset,
    TooFewSamples,
    DegenerateLabels,
    ConfigInvalid,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace appwatch
