// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/core.hpp"

#include <algorithm>
#include <cmath>

#include "vig/error.hpp"

namespace vig {

namespace {

void require_finite_nll(double v, const char* which) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFiniteInput, std::string(which) + " is not finite");
  }
}

}  // namespace

double token_vig(double nll_without, double nll_with) {
  require_finite_nll(nll_without, "nll_without");
  require_finite_nll(nll_with, "nll_with");
  return nll_without - nll_with;
}

double token_vig(const TokenNllPair& pair) { return token_vig(pair.nll_without, pair.nll_with); }

double stable_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyAnswer, "mean of an empty sequence");
  // Neumaier summation.
  double sum = 0.0;
  double comp = 0.0;
  double lo = values.front();
  double hi = values.front();
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = (sum + comp) / static_cast<double>(values.size());
  // The exact mean lies in [lo, hi]; rounding must not push it outside, or a
  // sample could clear a threshold that none of its tokens clears.
  return std::clamp(mean, lo, hi);
}

VigResult sample_vig(std::span<const TokenNllPair> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::EmptyAnswer, "answer has no tokens");
  VigResult out;
  out.token_vigs.reserve(tokens.size());
  for (const auto& t : tokens) out.token_vigs.push_back(token_vig(t));
  out.sample_vig = stable_mean(out.token_vigs);
  return out;
}

VigResult sample_vig(std::span<const double> nll_without, std::span<const double> nll_with) {
  if (nll_without.size() != nll_with.size()) {
    throw Error(ErrorKind::InconsistentInput, "NLL vectors differ in length");
  }
  if (nll_without.empty()) throw Error(ErrorKind::EmptyAnswer, "answer has no tokens");
  VigResult out;
  out.token_vigs.reserve(nll_without.size());
  for (std::size_t t = 0; t < nll_without.size(); ++t) {
    out.token_vigs.push_back(token_vig(nll_without[t], nll_with[t]));
  }
  out.sample_vig = stable_mean(out.token_vigs);
  return out;
}

double vig_from_perplexities(const PerplexityPair& p) {
  if (!(p.ppl_without > 0.0) || !(p.ppl_with > 0.0)) {
    throw Error(ErrorKind::NonPositivePerplexity, "perplexities must be strictly positive");
  }
  if (!std::isfinite(p.ppl_without) || !std::isfinite(p.ppl_with)) {
    throw Error(ErrorKind::NonFiniteInput, "perplexity is not finite");
  }
  return std::log(p.ppl_without) - std::log(p.ppl_with);
}

double perplexity_from_nlls(std::span<const double> nlls) {
  if (nlls.empty()) throw Error(ErrorKind::EmptyAnswer, "no NLLs");
  for (double v : nlls) require_finite_nll(v, "nll");
  return std::exp(stable_mean(nlls));
}

double kl_onehot_gap(double q_without_prob_of_gt, double q_with_prob_of_gt) {
  for (double q : {q_without_prob_of_gt, q_with_prob_of_gt}) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw Error(ErrorKind::ProbabilityOutOfRange, "probability must lie in (0, 1]");
    }
  }
  const double kl_without = -std::log(q_without_prob_of_gt);
  const double kl_with = -std::log(q_with_prob_of_gt);
  return kl_without - kl_with;
}

}  // namespace vig
