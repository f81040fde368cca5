// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/synthetic.hpp"

#include <cmath>
#include <fmt/format.h>

#include "vig/error.hpp"

namespace vig {

using nlohmann::ordered_json;

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::Grounded: return "grounded";
    case TokenClass::Neutral: return "neutral";
    case TokenClass::AntiVisual: return "anti_visual";
  }
  return "neutral";
}

namespace {

TokenClass class_from_string(const std::string& s) {
  if (s == "grounded") return TokenClass::Grounded;
  if (s == "neutral") return TokenClass::Neutral;
  if (s == "anti_visual") return TokenClass::AntiVisual;
  throw Error(ErrorKind::InvalidConfig, "unknown token class '" + s + "'");
}

}  // namespace

void SyntheticWorld::validate() const {
  if (vocabulary.empty()) throw Error(ErrorKind::InvalidConfig, "world has an empty vocabulary");
  if (classes.size() != vocabulary.size()) throw Error(ErrorKind::InvalidConfig, "token classes misaligned");
  for (const auto& [key, dist] : context_tables) {
    if (dist.size() != vocabulary.size()) {
      throw Error(ErrorKind::InvalidConfig, "table for '" + key.first + "' does not cover the vocabulary");
    }
    double sum = 0.0;
    for (double p : dist) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::InvalidConfig, "table for '" + key.first + "' has a non-positive probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidConfig, fmt::format("table for '{}' sums to {}", key.first, sum));
    }
  }
}

std::int64_t SyntheticWorld::token_index(std::string_view text) const {
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (vocabulary[i] == text) return static_cast<std::int64_t>(i);
  }
  return -1;
}

bool SyntheticWorld::attribute_present(const std::string& sample_id) const {
  auto it = attribute_assignment.find(sample_id);
  return it == attribute_assignment.end() ? true : it->second;
}

ordered_json SyntheticWorld::to_json() const {
  ordered_json j;
  j["format"] = "vig-synthetic-world/1";
  j["bos"] = bos;
  auto vocab = ordered_json::array();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    vocab.push_back({{"text", vocabulary[i]}, {"class", std::string(to_string(classes[i]))}});
  }
  j["vocabulary"] = std::move(vocab);
  auto contexts = ordered_json::array();
  for (const auto& [key, dist] : context_tables) {
    contexts.push_back({{"prev", key.first}, {"attribute", key.second}, {"probs", dist}});
  }
  j["contexts"] = std::move(contexts);
  auto assign = ordered_json::object();
  for (const auto& [id, present] : attribute_assignment) assign[id] = present;
  j["attribute_assignment"] = std::move(assign);
  return j;
}

SyntheticWorld SyntheticWorld::from_json(const nlohmann::json& j) {
  SyntheticWorld w;
  try {
    if (j.value("format", "") != "vig-synthetic-world/1") {
      throw Error(ErrorKind::InvalidConfig, "not a vig-synthetic-world/1 document");
    }
    w.bos = j.value("bos", "<s>");
    for (const auto& v : j.at("vocabulary")) {
      w.vocabulary.push_back(v.at("text").get<std::string>());
      w.classes.push_back(class_from_string(v.value("class", "neutral")));
    }
    for (const auto& c : j.at("contexts")) {
      auto key = std::make_pair(c.at("prev").get<std::string>(), c.at("attribute").get<bool>());
      if (!w.context_tables.emplace(key, c.at("probs").get<std::vector<double>>()).second) {
        throw Error(ErrorKind::InvalidConfig, "duplicate context '" + key.first + "'");
      }
    }
    if (j.contains("attribute_assignment")) {
      for (const auto& [id, present] : j.at("attribute_assignment").items()) {
        w.attribute_assignment[id] = present.get<bool>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("malformed world: ") + e.what());
  }
  w.validate();
  return w;
}

SyntheticWorld default_world(double boost) {
  if (!(boost > 1.0 && boost < 9.0)) throw Error(ErrorKind::InvalidConfig, "boost must lie in (1, 9)");

  SyntheticWorld w;
  const std::vector<std::string> grounded = {"white", "black",    "red",   "blue",     "lying",
                                             "flying", "sitting", "standing", "reading", "crowd"};
  const std::vector<std::string> neutral = {"a", "of", "the", "which", "are", "The", "is", "on", "in", "and", "with", "ize"};
  const std::vector<std::string> anti = {"usually", "typically", "probably", "generally", "often", "-"};
  for (const auto& t : grounded) w.vocabulary.push_back(t), w.classes.push_back(TokenClass::Grounded);
  for (const auto& t : neutral) w.vocabulary.push_back(t), w.classes.push_back(TokenClass::Neutral);
  for (const auto& t : anti) w.vocabulary.push_back(t), w.classes.push_back(TokenClass::AntiVisual);

  // Class masses of the attribute-absent table. Anti-visual mass must exceed
  // (boost - 1) * grounded mass for the present table to stay positive.
  constexpr double kGroundedMass = 0.05;
  constexpr double kNeutralMass = 0.55;
  constexpr double kAntiMass = 0.40;

  std::vector<std::string> contexts{w.bos};
  contexts.insert(contexts.end(), w.vocabulary.begin(), w.vocabulary.end());

  const std::size_t v = w.vocabulary.size();
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    std::vector<double> weight(v);
    double class_total[3] = {0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < v; ++j) {
      weight[j] = 1.0 + static_cast<double>((c * 7 + j * 3) % 5);
      class_total[static_cast<int>(w.classes[j])] += weight[j];
    }
    const double mass[3] = {kGroundedMass, kNeutralMass, kAntiMass};
    std::vector<double> absent(v);
    double grounded_sum = 0.0;
    double anti_sum = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      const int k = static_cast<int>(w.classes[j]);
      absent[j] = mass[k] * weight[j] / class_total[k];
      if (w.classes[j] == TokenClass::Grounded) grounded_sum += absent[j];
      if (w.classes[j] == TokenClass::AntiVisual) anti_sum += absent[j];
    }
    const double anti_scale = (anti_sum - (boost - 1.0) * grounded_sum) / anti_sum;
    std::vector<double> present(v);
    for (std::size_t j = 0; j < v; ++j) {
      switch (w.classes[j]) {
        case TokenClass::Grounded: present[j] = absent[j] * boost; break;
        case TokenClass::Neutral: present[j] = absent[j]; break;
        case TokenClass::AntiVisual: present[j] = absent[j] * anti_scale; break;
      }
    }
    w.context_tables[{contexts[c], false}] = std::move(absent);
    w.context_tables[{contexts[c], true}] = std::move(present);
  }
  w.validate();
  return w;
}

RawSampleRecord synthetic_score(const SyntheticWorld& world, RawSampleRecord r) {
  if (r.modality == Modality::TextOnly || r.scored()) return r;
  if (r.answer_tokens.empty()) throw Error(ErrorKind::EmptyAnswer, "record '" + r.sample_id + "' has no answer");
  const bool present = world.attribute_present(r.sample_id);
  std::vector<double> with;
  std::vector<double> without;
  with.reserve(r.answer_tokens.size());
  without.reserve(r.answer_tokens.size());
  std::string prev = world.bos;
  for (const auto& tok : r.answer_tokens) {
    if (tok.token_id < 0 || static_cast<std::size_t>(tok.token_id) >= world.vocabulary.size()) {
      throw Error(ErrorKind::UnknownToken, fmt::format("token id {} not in the world vocabulary", tok.token_id));
    }
    const auto& text = world.vocabulary[static_cast<std::size_t>(tok.token_id)];
    if (!tok.token_text.empty() && tok.token_text != text) {
      throw Error(ErrorKind::UnknownToken,
                  fmt::format("token id {} is '{}' in the world, record says '{}'", tok.token_id, text, tok.token_text));
    }
    auto with_it = world.context_tables.find({prev, present});
    auto without_it = world.context_tables.find({prev, false});
    if (with_it == world.context_tables.end() || without_it == world.context_tables.end()) {
      throw Error(ErrorKind::UnknownContext, "no table for context '" + prev + "'");
    }
    const auto idx = static_cast<std::size_t>(tok.token_id);
    with.push_back(-std::log(with_it->second[idx]));
    without.push_back(-std::log(without_it->second[idx]));
    prev = text;
  }
  r.nll_with = std::move(with);
  r.nll_without = std::move(without);
  return r;
}

SyntheticCorpusGenerator::SyntheticCorpusGenerator(const SyntheticWorld& world, SyntheticCorpusOptions options)
    : world_(world), options_(options), rng_(options.seed) {
  if (options_.min_tokens < 1 || options_.max_tokens < options_.min_tokens) {
    throw Error(ErrorKind::InvalidConfig, "invalid answer length range");
  }
  for (std::size_t i = 0; i < world.classes.size(); ++i) {
    switch (world.classes[i]) {
      case TokenClass::Grounded: grounded_.push_back(i); break;
      case TokenClass::Neutral: neutral_.push_back(i); break;
      case TokenClass::AntiVisual: anti_.push_back(i); break;
    }
  }
  if (grounded_.empty() || neutral_.empty() || anti_.empty()) {
    throw Error(ErrorKind::InvalidConfig, "world needs grounded, neutral and anti-visual tokens");
  }
}

RawSampleRecord SyntheticCorpusGenerator::next() {
  RawSampleRecord r;
  r.sample_id = fmt::format("syn-{:07}", emitted_++);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> length(options_.min_tokens, options_.max_tokens);
  const std::size_t n = length(rng_);

  auto pick = [&](const std::vector<std::size_t>& from) {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng_)];
  };
  auto push = [&](std::size_t idx) {
    r.answer_tokens.push_back({static_cast<std::int64_t>(idx), world_.vocabulary[idx]});
  };

  if (unit(rng_) < options_.text_only_fraction) {
    r.modality = Modality::TextOnly;
    r.group = "text";
    r.question = "Continue the sentence.";
    for (std::size_t t = 0; t < n; ++t) push(pick(neutral_));
    return r;
  }

  std::uniform_int_distribution<int> group(0, 2);
  const int g = group(rng_);
  std::uniform_int_distribution<std::size_t> pos(0, n - 1);
  const std::size_t anchor = pos(rng_);
  if (g == 0) {
    r.group = "caption";
    r.question = "Describe the image.";
    for (std::size_t t = 0; t < n; ++t) push(t == anchor || unit(rng_) < 0.3 ? pick(grounded_) : pick(neutral_));
  } else if (g == 1) {
    r.group = "text_prior";
    r.question = "Answer from common knowledge.";
    for (std::size_t t = 0; t < n; ++t) push(t == anchor || unit(rng_) < 0.3 ? pick(anti_) : pick(neutral_));
  } else {
    r.group = "mixed";
    r.question = "What is happening in the image?";
    for (std::size_t t = 0; t < n; ++t) {
      const double u = unit(rng_);
      push(u < 0.25 ? pick(grounded_) : u < 0.45 ? pick(anti_) : pick(neutral_));
    }
  }
  return r;
}

}  // namespace vig
