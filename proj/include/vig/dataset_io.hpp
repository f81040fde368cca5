// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Line-delimited JSON corpus records (`*.vig.jsonl`).
//
// One object per line:
//   {"schema_version":"1","sample_id":"s1","modality":"multimodal",
//    "group":"coco","question":"...",
//    "answer_tokens":[{"token_id":7,"token_text":"white"}, ...],
//    "nll_with":[...],"nll_without":[...]}
//
// nll_with/nll_without are the scorer's per-token NLLs (nats) with and
// without the image. They are absent on unscored skeletons and always absent
// on text_only records. `score` adds "sample_vig" and "token_vigs"; `select`
// adds "loss_mask". Unrecognized keys are carried through untouched.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "vig/core.hpp"
#include "vig/error.hpp"
#include "vig/selection.hpp"

namespace vig {

inline constexpr std::string_view kSchemaVersion = "1";

struct AnswerToken {
  std::int64_t token_id = 0;
  std::string token_text;

  bool operator==(const AnswerToken&) const = default;
};

struct RawSampleRecord {
  std::string schema_version{kSchemaVersion};
  std::string sample_id;
  Modality modality = Modality::Multimodal;
  std::string group;
  std::string question;
  std::vector<AnswerToken> answer_tokens;
  std::optional<std::vector<double>> nll_with;
  std::optional<std::vector<double>> nll_without;

  // Derived fields written by the tool itself.
  std::optional<double> sample_vig;
  std::optional<std::vector<double>> token_vigs;
  std::optional<std::vector<bool>> loss_mask;

  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool scored() const { return nll_with.has_value() && nll_without.has_value(); }

  /// Recomputes VIG from the stored NLLs. Requires a scored multimodal record.
  VigResult compute_vig() const;
  /// Table row used by selection and analysis. Throws SchemaViolation for an
  /// unscored multimodal record.
  ScoredSample to_scored() const;

  bool operator==(const RawSampleRecord&) const = default;
};

enum class Validation { Strict, Lenient };

/// Parses and validates one line. Throws SchemaViolation / EncodingError with
/// the given line number attached.
RawSampleRecord parse_record(std::string_view line, std::size_t line_no,
                             std::string_view schema_version = kSchemaVersion);

/// Compact single-line JSON, no trailing newline. Doubles are written with
/// round-trip precision.
std::string serialize_record(const RawSampleRecord& record);

bool is_valid_utf8(std::string_view s);

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ReaderOptions {
  std::string schema_version{kSchemaVersion};
  Validation mode = Validation::Strict;
  bool check_duplicate_ids = true;
};

// Pull-based reader holding one record at a time. Blank lines are skipped.
// In strict mode the first invalid record throws; in lenient mode it is
// recorded in issues() and skipped. Duplicate-id detection keeps the set of
// ids seen so far.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in, ReaderOptions options = {});

  std::optional<RawSampleRecord> next();

  /// Raw (line number, text) batch for callers that parse in parallel; pass
  /// the parsed records back through admit() in order.
  std::vector<std::pair<std::size_t, std::string>> next_lines(std::size_t max_lines);
  /// Duplicate-id check for externally parsed records. Returns false (lenient)
  /// or throws (strict) on a violation.
  bool admit(const RawSampleRecord& record, std::size_t line_no);
  /// Routes a parse failure through the validation mode.
  void reject(const Error& error);

  const std::vector<ParseIssue>& issues() const { return issues_; }
  std::size_t lines_read() const { return line_no_; }

 private:
  std::istream& in_;
  ReaderOptions options_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
  std::vector<ParseIssue> issues_;
};

std::vector<RawSampleRecord> parse_corpus(std::istream& in, const ReaderOptions& options = {},
                                          std::vector<ParseIssue>* issues = nullptr);

struct WriteSummary {
  std::size_t written = 0;
  std::size_t omitted = 0;

  bool operator==(const WriteSummary&) const = default;
};

// Emits selected records with a "loss_mask" aligned to answer_tokens and
// omits the rest. Throws UnknownSampleId for a record the outcome never saw.
class MaskedCorpusWriter {
 public:
  MaskedCorpusWriter(const SelectionOutcome& outcome, std::ostream& sink);

  /// Returns true when the record was written.
  bool write(const RawSampleRecord& record);
  WriteSummary summary() const { return summary_; }

 private:
  const SelectionOutcome& outcome_;
  std::ostream& sink_;
  std::unordered_set<std::string_view> dropped_;
  WriteSummary summary_;
};

WriteSummary write_masked_corpus(std::span<const RawSampleRecord> records, const SelectionOutcome& outcome,
                                 std::ostream& sink);

}  // namespace vig
