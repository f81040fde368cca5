// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/error.hpp"

namespace vig {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::EmptyAnswer: return "EmptyAnswer";
    case ErrorKind::NonPositivePerplexity: return "NonPositivePerplexity";
    case ErrorKind::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorKind::NoMultimodalSamples: return "NoMultimodalSamples";
    case ErrorKind::EmptyRanking: return "EmptyRanking";
    case ErrorKind::InconsistentInput: return "InconsistentInput";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::EncodingError: return "EncodingError";
    case ErrorKind::UnknownSampleId: return "UnknownSampleId";
    case ErrorKind::UnknownToken: return "UnknownToken";
    case ErrorKind::UnknownContext: return "UnknownContext";
    case ErrorKind::EmptyGroupSet: return "EmptyGroupSet";
    case ErrorKind::InvalidScale: return "InvalidScale";
    case ErrorKind::DegenerateImage: return "DegenerateImage";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedPixelData: return "TruncatedPixelData";
    case ErrorKind::ProviderFailure: return "ProviderFailure";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidScale:
      return 1;
    case ErrorKind::UnknownToken:
    case ErrorKind::UnknownContext:
    case ErrorKind::ProviderFailure:
    case ErrorKind::Io:
      return 3;
    default:
      return 2;
  }
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, std::size_t line) {
  std::string out(to_string(kind));
  if (line != 0) out += " at line " + std::to_string(line);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(kind, message, line)), kind_(kind), line_(line) {}

}  // namespace vig
