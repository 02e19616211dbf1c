#include "appwatch/error.hpp"

namespace appwatch {

std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::InvalidDate: return "InvalidDate";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::DuplicateAppId: return "DuplicateAppId";
    case Errc::DateMismatch: return "DateMismatch";
    case Errc::StarsOutOfRange: return "StarsOutOfRange";
    case Errc::NonPositiveRank: return "NonPositiveRank";
    case Errc::IoFailure: return "IoFailure";
    case Errc::SnapshotNotFound: return "SnapshotNotFound";
    case Errc::ConcurrentWrite: return "ConcurrentWrite";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::NoRemovals: return "NoRemovals";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SingleClass: return "SingleClass";
    case Errc::NonFiniteFeature: return "NonFiniteFeature";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

}  // namespace appwatch
