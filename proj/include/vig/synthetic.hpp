// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Deterministic stand-in for an LVLM scorer. A bigram model whose next-token
// tables depend on whether the image carries a visual attribute: the
// "present" table plays the image-conditioned pass and the "absent" table the
// blurred-image pass. Token classes:
//
//   grounded     P_present = boost * P_absent
//   neutral      P_present = P_absent (bitwise identical)
//   anti_visual  scaled down to keep each table normalized
//
// so grounded tokens score ln(boost), neutral tokens score exactly 0 and
// anti-visual tokens score negative.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vig/dataset_io.hpp"

namespace vig {

enum class TokenClass { Grounded, Neutral, AntiVisual };

std::string_view to_string(TokenClass c);

struct SyntheticWorld {
  std::string bos = "<s>";  // context of the first answer token; not in the vocabulary
  std::vector<std::string> vocabulary;
  std::vector<TokenClass> classes;  // parallel to vocabulary; metadata only
  // (previous token text, attribute present) -> distribution over vocabulary
  std::map<std::pair<std::string, bool>, std::vector<double>> context_tables;
  // sample_id -> whether its image carries the attribute; unlisted ids do.
  std::map<std::string, bool> attribute_assignment;

  /// Every table covers the vocabulary, sums to 1 within 1e-9, has p > 0.
  void validate() const;

  std::int64_t token_index(std::string_view text) const;  // -1 if absent
  bool attribute_present(const std::string& sample_id) const;

  nlohmann::ordered_json to_json() const;
  static SyntheticWorld from_json(const nlohmann::json& j);
};

/// The shipped world: colors and physical states grounded, function words
/// neutral, hedging words anti-visual. boost must lie in (1, 9).
SyntheticWorld default_world(double boost = 4.0);

/// Fills nll_with / nll_without from the world tables:
///   nll_with[t]    = -ln P(token_t | prev, attribute assigned to the sample)
///   nll_without[t] = -ln P(token_t | prev, attribute absent)
/// Records that already carry NLLs and text-only records are returned as is.
/// Throws UnknownToken / UnknownContext.
RawSampleRecord synthetic_score(const SyntheticWorld& world, RawSampleRecord skeleton);

struct SyntheticCorpusOptions {
  std::size_t records = 1000;
  double text_only_fraction = 0.05;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 24;
  std::uint64_t seed = 0;
};

// Unscored skeletons in four groups: "caption" (grounded + neutral tokens,
// at least one grounded), "text_prior" (anti-visual + neutral, at least one
// anti-visual), "mixed" (anything) and text-only "text".
class SyntheticCorpusGenerator {
 public:
  SyntheticCorpusGenerator(const SyntheticWorld& world, SyntheticCorpusOptions options);

  bool done() const { return emitted_ >= options_.records; }
  RawSampleRecord next();

 private:
  const SyntheticWorld& world_;
  SyntheticCorpusOptions options_;
  std::mt19937_64 rng_;
  std::size_t emitted_ = 0;
  std::vector<std::size_t> grounded_, neutral_, anti_;
};

}  // namespace vig
