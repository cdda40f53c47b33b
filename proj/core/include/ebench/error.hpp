#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ebench {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  EmptyEndpoint,
  EmptyModels,
  DuplicateModel,
  EmptyLoads,
  NonPositiveLoad,
  DuplicateLoad,
  NonPositiveRepeats,
  NonPositiveRate,
  RateWithBurst,
  MissingDataset,
  NonPositiveMaxPrompts,
  NonPositiveInterval,
  NonPositiveMaxTokens,
  InvalidGrid,
  // planning / dataset
  InsufficientPrompts,
  FileNotFound,
  MalformedRecord,
  EmptyDataset,
  // load generation
  EndpointUnreachable,
  AllRequestsFailed,
  // energy
  NoSources,
  SourceInitFailure,
  NotRunning,
  AlreadyRunning,
  UnsortedSamples,
  InvalidSample,
  // analysis
  ZeroRequests,
  UnknownSource,
  EmptyInput,
  TooFewPoints,
  DegenerateInput,
  // report / io
  SchemaMismatch,
  Io,
  PortInUse,
};

auto to_string(ErrorCode code) -> std::string_view;

/// Exception carrying a machine-checkable code. `line()` is set for
/// record-level dataset errors (1-based line number).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  [[nodiscard]] auto code() const noexcept -> ErrorCode { return code_; }
  [[nodiscard]] auto line() const noexcept -> std::optional<std::size_t>
  {
    return line_;
  }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace ebench
