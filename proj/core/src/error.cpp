#include "ebench/error.hpp"

namespace ebench {

auto
to_string(ErrorCode code) -> std::string_view
{
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyEndpoint: return "EmptyEndpoint";
    case ErrorCode::EmptyModels: return "EmptyModels";
    case ErrorCode::DuplicateModel: return "DuplicateModel";
    case ErrorCode::EmptyLoads: return "EmptyLoads";
    case ErrorCode::NonPositiveLoad: return "NonPositiveLoad";
    case ErrorCode::DuplicateLoad: return "DuplicateLoad";
    case ErrorCode::NonPositiveRepeats: return "NonPositiveRepeats";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::RateWithBurst: return "RateWithBurst";
    case ErrorCode::MissingDataset: return "MissingDataset";
    case ErrorCode::NonPositiveMaxPrompts: return "NonPositiveMaxPrompts";
    case ErrorCode::NonPositiveInterval: return "NonPositiveInterval";
    case ErrorCode::NonPositiveMaxTokens: return "NonPositiveMaxTokens";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InsufficientPrompts: return "InsufficientPrompts";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::AllRequestsFailed: return "AllRequestsFailed";
    case ErrorCode::NoSources: return "NoSources";
    case ErrorCode::SourceInitFailure: return "SourceInitFailure";
    case ErrorCode::NotRunning: return "NotRunning";
    case ErrorCode::AlreadyRunning: return "AlreadyRunning";
    case ErrorCode::UnsortedSamples: return "UnsortedSamples";
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::ZeroRequests: return "ZeroRequests";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
    case ErrorCode::PortInUse: return "PortInUse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      line_(line)
{
}

}  // namespace ebench
