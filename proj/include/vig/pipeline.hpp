// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// File-to-file commands behind the vig_curate CLI. Every command reads its
// inputs from disk and writes inspectable artifacts, so runs compose through
// files and can be audited step by step. Failures surface as vig::Error; use
// exit_code_for() to map them to process exit codes.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "vig/dataset_io.hpp"
#include "vig/selection.hpp"

namespace vig {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kBypassNote = "no VIG-based selection";

struct CommonOptions {
  Validation validation = Validation::Strict;
  unsigned jobs = 1;  // worker cap; outputs do not depend on it
};

struct ScoreOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> synthetic_world;
  CommonOptions common;
};

struct ScoreSummary {
  std::size_t records = 0;
  std::size_t multimodal = 0;
  std::size_t provider_scored = 0;  // NLLs filled in by the synthetic world
  std::size_t rejected = 0;         // lenient mode only
};

/// Attaches "sample_vig" and "token_vigs" to every multimodal record, scoring
/// skeletons with the synthetic world when one is given. Writes the corpus
/// and `<output>.manifest.json`.
ScoreSummary run_score(const ScoreOptions& opts);

struct SelectOptions {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  double p_percent = 70.0;
  CommonOptions common;
};

struct SelectSummary {
  std::optional<double> tau_p;
  std::size_t multimodal = 0;
  std::size_t selected_multimodal = 0;
  std::size_t text_only = 0;
  AccountingStats accounting;
  WriteSummary written;
  std::size_t rejected = 0;
};

inline constexpr std::string_view kMaskedCorpusName = "masked.vig.jsonl";
inline constexpr std::string_view kSelectionName = "selection.json";
inline constexpr std::string_view kManifestName = "manifest.json";

/// Writes masked.vig.jsonl, selection.json and manifest.json into out_dir.
SelectSummary run_select(const SelectOptions& opts);

enum class ReportKind { Distribution, Tokens, Scatter, Efficiency };

std::string_view to_string(ReportKind kind);
std::optional<ReportKind> report_kind_from_string(std::string_view s);

struct ReportOptions {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  ReportKind kind = ReportKind::Efficiency;
  std::size_t bins = 20;
  std::size_t min_occurrences = 20;
  std::size_t top_k = 20;
  double p_percent = 70.0;  // efficiency only
  CommonOptions common;
};

// Output files per kind, all inside out_dir:
//   dist        distribution.csv, histograms/<group>.json
//   tokens      tokens_top.csv, tokens_bottom.csv
//   scatter     scatter.csv
//   efficiency  efficiency.csv
// plus manifest_<kind>.json.
void run_report(const ReportOptions& opts);

struct BlurOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  double scale = 0.05;
};

void run_blur(const BlurOptions& opts);

/// UTC ISO-8601 with seconds; honours SOURCE_DATE_EPOCH when set.
std::string utc_timestamp();

nlohmann::ordered_json make_manifest(std::string_view command, nlohmann::ordered_json config,
                                     const std::string& input_digest, std::optional<double> tau_p,
                                     const std::optional<AccountingStats>& counters);

nlohmann::ordered_json accounting_json(const AccountingStats& stats);

}  // namespace vig
