// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <unordered_map>
#include <unordered_set>

#include "vig/error.hpp"

namespace vig {

std::string_view to_string(Modality m) {
  return m == Modality::Multimodal ? "multimodal" : "text_only";
}

void ScoredSample::validate() const {
  if (modality == Modality::TextOnly) {
    if (vig) throw Error(ErrorKind::InconsistentInput, "text-only sample '" + sample_id + "' carries a VIG");
    return;
  }
  if (!vig) throw Error(ErrorKind::InconsistentInput, "multimodal sample '" + sample_id + "' is unscored");
  if (vig->token_vigs.empty() || vig->token_vigs.size() != token_count) {
    throw Error(ErrorKind::InconsistentInput, "sample '" + sample_id + "' token count mismatch");
  }
}

void SelectionConfig::validate() const {
  if (!(p_percent > 0.0 && p_percent <= 100.0)) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("p must lie in (0, 100], got {}", p_percent));
  }
}

std::vector<std::string> rank_samples(std::span<const ScoredSample> samples) {
  std::vector<const ScoredSample*> mm;
  for (const auto& s : samples) {
    if (s.modality == Modality::Multimodal) {
      s.validate();
      mm.push_back(&s);
    }
  }
  if (mm.empty()) throw Error(ErrorKind::NoMultimodalSamples, "no multimodal samples to rank");
  std::sort(mm.begin(), mm.end(), [](const ScoredSample* a, const ScoredSample* b) {
    if (a->vig->sample_vig != b->vig->sample_vig) return a->vig->sample_vig > b->vig->sample_vig;
    return a->sample_id < b->sample_id;
  });
  std::vector<std::string> ids;
  ids.reserve(mm.size());
  for (const auto* s : mm) ids.push_back(s->sample_id);
  return ids;
}

std::size_t top_count(std::size_t n, double p_percent) {
  // p * n is exact for integral p; the quotient is exact whenever it is integral.
  const double k = std::ceil(p_percent * static_cast<double>(n) / 100.0);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

double compute_threshold(std::span<const double> ranked_vigs, double p_percent) {
  if (ranked_vigs.empty()) throw Error(ErrorKind::EmptyRanking, "cannot threshold an empty ranking");
  if (!(p_percent > 0.0 && p_percent < 100.0)) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("threshold needs 0 < p < 100, got {}", p_percent));
  }
  return ranked_vigs[top_count(ranked_vigs.size(), p_percent) - 1];
}

SelectionOutcome select(std::span<const ScoredSample> samples, const SelectionConfig& cfg) {
  cfg.validate();
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& s : samples) {
      s.validate();
      if (!seen.insert(s.sample_id).second) {
        throw Error(ErrorKind::InconsistentInput, "duplicate sample id '" + s.sample_id + "'");
      }
    }
  }

  SelectionOutcome out;
  out.p_percent = cfg.p_percent;

  if (cfg.bypass()) {
    for (const auto& s : samples) {
      out.selected_ids.push_back(s.sample_id);
      out.token_masks.emplace(s.sample_id, std::vector<bool>(s.token_count, true));
    }
    out.accounting = accounting(out, samples);
    return out;
  }

  std::vector<double> ranked;
  for (const auto& s : samples) {
    if (s.modality == Modality::Multimodal) ranked.push_back(s.vig->sample_vig);
  }
  if (ranked.empty()) throw Error(ErrorKind::NoMultimodalSamples, "no multimodal samples to rank");
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  const double tau = compute_threshold(ranked, cfg.p_percent);
  out.tau_p = tau;

  for (const auto& s : samples) {
    if (s.modality == Modality::TextOnly) {
      out.selected_ids.push_back(s.sample_id);
      out.token_masks.emplace(s.sample_id, std::vector<bool>(s.token_count, true));
      continue;
    }
    if (!(s.vig->sample_vig >= tau)) {
      out.dropped_ids.push_back(s.sample_id);
      continue;
    }
    std::vector<bool> mask(s.token_count);
    for (std::size_t t = 0; t < s.token_count; ++t) mask[t] = s.vig->token_vigs[t] >= tau;
    out.selected_ids.push_back(s.sample_id);
    out.token_masks.emplace(s.sample_id, std::move(mask));
  }
  out.accounting = accounting(out, samples);
  return out;
}

double reduction_pct(std::uint64_t retained, std::uint64_t total) {
  if (total == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(retained) / static_cast<double>(total));
}

std::string format_reduction(double reduction) {
  const long rounded = std::lround(reduction);
  if (rounded == 0) return "0%";
  return fmt::format("{}%", -rounded);
}

AccountingStats accounting(const SelectionOutcome& outcome, std::span<const ScoredSample> samples) {
  std::unordered_map<std::string_view, const ScoredSample*> by_id;
  by_id.reserve(samples.size());
  AccountingStats stats;
  for (const auto& s : samples) {
    by_id.emplace(s.sample_id, &s);
    if (s.modality == Modality::Multimodal) stats.total_tokens += s.token_count;
  }
  for (const auto& id : outcome.selected_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::InconsistentInput, "selected id '" + id + "' not in samples");
    const ScoredSample& s = *it->second;
    auto mit = outcome.token_masks.find(id);
    if (mit == outcome.token_masks.end() || mit->second.size() != s.token_count) {
      throw Error(ErrorKind::InconsistentInput, "mask for '" + id + "' missing or misaligned");
    }
    if (s.modality != Modality::Multimodal) continue;
    stats.sample_tokens += s.token_count;
    stats.active_tokens += static_cast<std::uint64_t>(std::count(mit->second.begin(), mit->second.end(), true));
  }
  stats.delta_sample_pct = reduction_pct(stats.sample_tokens, stats.total_tokens);
  stats.delta_active_pct = reduction_pct(stats.active_tokens, stats.total_tokens);
  return stats;
}

std::string published_thresholds_text() {
  std::string out = "Published selection thresholds (reference only, not recomputed):\n";
  for (const auto& t : kPublishedThresholds) {
    out += fmt::format("  {:<14} p={:<3} tau={:+.3f}\n", t.model, t.p_percent, t.tau);
  }
  return out;
}

}  // namespace vig
