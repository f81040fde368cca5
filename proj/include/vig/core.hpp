// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Visual information gain (VIG) numerics.
 *
 * Every quantity is in nats. A token's VIG is the drop in its negative
 * log-likelihood when the model is conditioned on the image:
 *
 *     VIG_t = nll_without[t] - nll_with[t]
 *
 * and a sample's VIG is the mean of its token VIGs, which is the same thing
 * as log(PPL_without / PPL_with). Positive values mean the image made the
 * answer more predictable.
 *
 * All functions are pure and thread-safe.
 */

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vig {

struct TokenNllPair {
  std::string token_text;
  std::int64_t token_id = 0;
  double nll_without = 0.0;
  double nll_with = 0.0;
};

struct VigResult {
  double sample_vig = 0.0;
  std::vector<double> token_vigs;
};

struct PerplexityPair {
  double ppl_without = 1.0;
  double ppl_with = 1.0;
};

/// nll_without - nll_with. Throws NonFiniteInput on NaN/inf.
double token_vig(const TokenNllPair& pair);
double token_vig(double nll_without, double nll_with);

/// Per-token VIGs and their mean. Throws EmptyAnswer for an empty answer.
VigResult sample_vig(std::span<const TokenNllPair> tokens);
VigResult sample_vig(std::span<const double> nll_without, std::span<const double> nll_with);

/// log(ppl_without / ppl_with). Throws NonPositivePerplexity.
double vig_from_perplexities(const PerplexityPair& p);

/// exp(mean(nlls)).
double perplexity_from_nlls(std::span<const double> nlls);

/// KL(onehot || q_without) - KL(onehot || q_with) given each condition's
/// probability of the ground-truth token. Under a one-hot target the entropy
/// terms vanish and this reduces to -ln q_without + ln q_with.
double kl_onehot_gap(double q_without_prob_of_gt, double q_with_prob_of_gt);

/// Mean of a non-empty vector, compensated and clamped into [min, max] so that
/// max(values) >= mean(values) holds in floating point too.
double stable_mean(std::span<const double> values);

}  // namespace vig
