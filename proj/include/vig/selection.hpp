// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vig/core.hpp"

namespace vig {

enum class Modality { Multimodal, TextOnly };

std::string_view to_string(Modality m);

struct ScoredSample {
  std::string sample_id;
  std::string group;
  Modality modality = Modality::Multimodal;
  std::optional<VigResult> vig;  // absent for text-only samples
  std::size_t token_count = 0;

  /// Checks the modality/vig/token_count invariants; throws InconsistentInput.
  void validate() const;
};

struct SelectionConfig {
  double p_percent = 70.0;

  bool bypass() const { return p_percent == 100.0; }
  /// Throws InvalidConfig unless 0 < p <= 100.
  void validate() const;
};

struct AccountingStats {
  std::uint64_t total_tokens = 0;
  std::uint64_t sample_tokens = 0;
  std::uint64_t active_tokens = 0;
  double delta_sample_pct = 0.0;  // 100 * (1 - sample_tokens / total_tokens)
  double delta_active_pct = 0.0;  // 100 * (1 - active_tokens / total_tokens)

  bool operator==(const AccountingStats&) const = default;
};

struct SelectionOutcome {
  double p_percent = 100.0;
  std::optional<double> tau_p;            // absent in bypass mode
  std::vector<std::string> selected_ids;  // input order
  std::vector<std::string> dropped_ids;   // multimodal samples below tau_p, input order
  std::map<std::string, std::vector<bool>> token_masks;
  AccountingStats accounting;

  bool operator==(const SelectionOutcome&) const = default;
};

/// Multimodal ids ordered by (VIG descending, id ascending).
/// Throws NoMultimodalSamples when there is nothing to rank.
std::vector<std::string> rank_samples(std::span<const ScoredSample> samples);

/// VIG of the ceil(p*N/100)-th entry (1-based) of a descending ranking.
/// Expects 0 < p < 100; bypass is handled by select().
double compute_threshold(std::span<const double> ranked_vigs, double p_percent);

/// Number of samples in the nominal top-p% of n, never less than one.
std::size_t top_count(std::size_t n, double p_percent);

/// Sample- and token-level selection sharing one threshold. Text-only
/// samples always pass through with all-true masks. Samples tied with the
/// threshold are all kept, so more than top_count() may be selected.
SelectionOutcome select(std::span<const ScoredSample> samples, const SelectionConfig& cfg);

/// Supervision counters over multimodal answer tokens. Throws
/// InconsistentInput if the outcome references unknown ids or mask lengths
/// disagree with the samples.
AccountingStats accounting(const SelectionOutcome& outcome, std::span<const ScoredSample> samples);

/// 100 * (1 - retained / total); 0 when total is 0.
double reduction_pct(std::uint64_t retained, std::uint64_t total);

/// Signed integer-percent rendering of a reduction, e.g. 34.4 -> "-34%",
/// 0 -> "0%". Rounds half away from zero.
std::string format_reduction(double reduction_pct);

struct PublishedThreshold {
  std::string_view model;
  double p_percent;
  double tau;
};

// Thresholds reported for real LVLM scorers at p = 70 (plus the LLaVA-1.5 7B
// sweep over p). Reference only: reproducing them needs the original models.
inline constexpr std::array<PublishedThreshold, 5> kPublishedThresholds{{
    {"LLaVA-1.5 7B", 70.0, -0.021},
    {"LLaVA-1.5 13B", 70.0, 0.046},
    {"ShareGPT4V 7B", 70.0, -0.042},
    {"LLaVA-1.5 7B", 50.0, 0.031},
    {"LLaVA-1.5 7B", 30.0, 0.124},
}};

std::string published_thresholds_text();

}  // namespace vig
