// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vig {

enum class ErrorKind {
  NonFiniteInput,
  EmptyAnswer,
  NonPositivePerplexity,
  ProbabilityOutOfRange,
  NoMultimodalSamples,
  EmptyRanking,
  InconsistentInput,
  InvalidConfig,
  SchemaViolation,
  EncodingError,
  UnknownSampleId,
  UnknownToken,
  UnknownContext,
  EmptyGroupSet,
  InvalidScale,
  DegenerateImage,
  MalformedHeader,
  TruncatedPixelData,
  ProviderFailure,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for a failure of this kind: 1 usage, 2 data
/// validation, 3 provider or internal.
int exit_code_for(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
// line() is 1-based and only meaningful for errors raised while reading a
// line-delimited corpus (0 otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0);

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace vig
