// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/dataset_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "vig/error.hpp"

namespace vig {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kKnownKeys[] = {
    "schema_version", "sample_id", "modality",   "group",      "question",  "answer_tokens",
    "nll_with",       "nll_without", "sample_vig", "token_vigs", "loss_mask",
};

bool is_known_key(std::string_view key) {
  for (auto k : kKnownKeys) {
    if (k == key) return true;
  }
  return false;
}

[[noreturn]] void violation(const std::string& msg, std::size_t line) {
  throw Error(ErrorKind::SchemaViolation, msg, line);
}

const ordered_json& require(const ordered_json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) violation(std::string("missing field '") + key + "'", line);
  return *it;
}

std::string require_string(const ordered_json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) violation(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

std::vector<double> number_array(const ordered_json& v, const char* key, std::size_t line, bool non_negative) {
  if (!v.is_array()) violation(std::string("field '") + key + "' must be an array", line);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) violation(std::string("field '") + key + "' must hold numbers", line);
    const double d = x.get<double>();
    if (!std::isfinite(d)) violation(std::string("non-finite value in '") + key + "'", line);
    if (non_negative && d < 0.0) violation(std::string("negative NLL in '") + key + "'", line);
    out.push_back(d);
  }
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

VigResult RawSampleRecord::compute_vig() const {
  if (modality != Modality::Multimodal || !scored()) {
    throw Error(ErrorKind::SchemaViolation, "record '" + sample_id + "' has no NLL pair to score");
  }
  return vig::sample_vig(*nll_without, *nll_with);
}

ScoredSample RawSampleRecord::to_scored() const {
  ScoredSample s;
  s.sample_id = sample_id;
  s.group = group;
  s.modality = modality;
  s.token_count = answer_tokens.size();
  if (modality == Modality::Multimodal) s.vig = compute_vig();
  return s;
}

RawSampleRecord parse_record(std::string_view line, std::size_t line_no, std::string_view schema_version) {
  if (!is_valid_utf8(line)) throw Error(ErrorKind::EncodingError, "line is not valid UTF-8", line_no);
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    violation(std::string("malformed JSON: ") + e.what(), line_no);
  } catch (const nlohmann::json::out_of_range& e) {
    violation(std::string("number out of range: ") + e.what(), line_no);
  }
  if (!obj.is_object()) violation("record must be a JSON object", line_no);

  RawSampleRecord r;
  r.schema_version = require_string(obj, "schema_version", line_no);
  if (r.schema_version != schema_version) {
    violation("schema_version '" + r.schema_version + "' != expected '" + std::string(schema_version) + "'", line_no);
  }
  r.sample_id = require_string(obj, "sample_id", line_no);
  if (r.sample_id.empty()) violation("empty sample_id", line_no);
  const auto modality = require_string(obj, "modality", line_no);
  if (modality == "multimodal") {
    r.modality = Modality::Multimodal;
  } else if (modality == "text_only") {
    r.modality = Modality::TextOnly;
  } else {
    violation("unknown modality '" + modality + "'", line_no);
  }
  r.group = require_string(obj, "group", line_no);
  r.question = require_string(obj, "question", line_no);

  const auto& tokens = require(obj, "answer_tokens", line_no);
  if (!tokens.is_array()) violation("'answer_tokens' must be an array", line_no);
  r.answer_tokens.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!t.is_object()) violation("answer token must be an object", line_no);
    const auto& id = require(t, "token_id", line_no);
    if (!id.is_number_integer() || id.get<std::int64_t>() < 0) violation("token_id must be an integer >= 0", line_no);
    r.answer_tokens.push_back({id.get<std::int64_t>(), require_string(t, "token_text", line_no)});
  }

  const bool has_with = obj.contains("nll_with");
  const bool has_without = obj.contains("nll_without");
  if (r.modality == Modality::TextOnly) {
    if (has_with || has_without) violation("text_only record must not carry NLLs", line_no);
  } else {
    if (r.answer_tokens.empty()) violation("multimodal record has no answer tokens", line_no);
    if (has_with != has_without) violation("nll_with and nll_without must appear together", line_no);
    if (has_with) {
      r.nll_with = number_array(obj["nll_with"], "nll_with", line_no, true);
      r.nll_without = number_array(obj["nll_without"], "nll_without", line_no, true);
      if (r.nll_with->size() != r.answer_tokens.size() || r.nll_without->size() != r.answer_tokens.size()) {
        violation("NLL lengths (" + std::to_string(r.nll_with->size()) + ", " + std::to_string(r.nll_without->size()) +
                      ") do not match " + std::to_string(r.answer_tokens.size()) + " answer tokens",
                  line_no);
      }
    }
  }

  if (auto it = obj.find("sample_vig"); it != obj.end()) {
    if (!it->is_number() || !std::isfinite(it->get<double>())) violation("'sample_vig' must be a finite number", line_no);
    r.sample_vig = it->get<double>();
  }
  if (auto it = obj.find("token_vigs"); it != obj.end()) {
    r.token_vigs = number_array(*it, "token_vigs", line_no, false);
    if (r.token_vigs->size() != r.answer_tokens.size()) violation("'token_vigs' length mismatch", line_no);
  }
  if (auto it = obj.find("loss_mask"); it != obj.end()) {
    if (!it->is_array()) violation("'loss_mask' must be an array", line_no);
    std::vector<bool> mask;
    for (const auto& b : *it) {
      if (!b.is_boolean()) violation("'loss_mask' must hold booleans", line_no);
      mask.push_back(b.get<bool>());
    }
    if (mask.size() != r.answer_tokens.size()) violation("'loss_mask' length mismatch", line_no);
    r.loss_mask = std::move(mask);
  }

  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!is_known_key(it.key())) r.extra[it.key()] = it.value();
  }
  return r;
}

std::string serialize_record(const RawSampleRecord& r) {
  ordered_json obj;
  obj["schema_version"] = r.schema_version;
  obj["sample_id"] = r.sample_id;
  obj["modality"] = std::string(to_string(r.modality));
  obj["group"] = r.group;
  obj["question"] = r.question;
  auto tokens = ordered_json::array();
  for (const auto& t : r.answer_tokens) {
    ordered_json tok;
    tok["token_id"] = t.token_id;
    tok["token_text"] = t.token_text;
    tokens.push_back(std::move(tok));
  }
  obj["answer_tokens"] = std::move(tokens);
  if (r.nll_with) obj["nll_with"] = *r.nll_with;
  if (r.nll_without) obj["nll_without"] = *r.nll_without;
  if (r.sample_vig) obj["sample_vig"] = *r.sample_vig;
  if (r.token_vigs) obj["token_vigs"] = *r.token_vigs;
  if (r.loss_mask) obj["loss_mask"] = *r.loss_mask;
  for (auto it = r.extra.begin(); it != r.extra.end(); ++it) obj[it.key()] = it.value();
  return obj.dump();
}

CorpusReader::CorpusReader(std::istream& in, ReaderOptions options) : in_(in), options_(std::move(options)) {}

std::vector<std::pair<std::size_t, std::string>> CorpusReader::next_lines(std::size_t max_lines) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  while (out.size() < max_lines && std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.emplace_back(line_no_, std::move(line));
  }
  if (in_.bad()) throw Error(ErrorKind::Io, "read failure", line_no_);
  return out;
}

void CorpusReader::reject(const Error& error) {
  if (options_.mode == Validation::Strict) throw error;
  issues_.push_back({error.line(), error.what()});
}

bool CorpusReader::admit(const RawSampleRecord& record, std::size_t line_no) {
  if (!options_.check_duplicate_ids) return true;
  if (seen_ids_.insert(record.sample_id).second) return true;
  reject(Error(ErrorKind::SchemaViolation, "duplicate sample_id '" + record.sample_id + "'", line_no));
  return false;
}

std::optional<RawSampleRecord> CorpusReader::next() {
  while (true) {
    auto batch = next_lines(1);
    if (batch.empty()) return std::nullopt;
    auto& [line_no, text] = batch.front();
    try {
      auto record = parse_record(text, line_no, options_.schema_version);
      if (admit(record, line_no)) return record;
    } catch (const Error& e) {
      reject(e);
    }
  }
}

std::vector<RawSampleRecord> parse_corpus(std::istream& in, const ReaderOptions& options,
                                          std::vector<ParseIssue>* issues) {
  CorpusReader reader(in, options);
  std::vector<RawSampleRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  if (issues) *issues = reader.issues();
  return out;
}

MaskedCorpusWriter::MaskedCorpusWriter(const SelectionOutcome& outcome, std::ostream& sink)
    : outcome_(outcome), sink_(sink) {
  dropped_.reserve(outcome.dropped_ids.size());
  for (const auto& id : outcome.dropped_ids) dropped_.insert(id);
}

bool MaskedCorpusWriter::write(const RawSampleRecord& record) {
  auto it = outcome_.token_masks.find(record.sample_id);
  if (it == outcome_.token_masks.end()) {
    if (!dropped_.contains(record.sample_id)) {
      throw Error(ErrorKind::UnknownSampleId, "record '" + record.sample_id + "' is not covered by the selection");
    }
    ++summary_.omitted;
    return false;
  }
  if (it->second.size() != record.answer_tokens.size()) {
    throw Error(ErrorKind::InconsistentInput, "mask length mismatch for '" + record.sample_id + "'");
  }
  RawSampleRecord out = record;
  out.loss_mask = it->second;
  sink_ << serialize_record(out) << '\n';
  if (!sink_) throw Error(ErrorKind::Io, "write failure");
  ++summary_.written;
  return true;
}

WriteSummary write_masked_corpus(std::span<const RawSampleRecord> records, const SelectionOutcome& outcome,
                                 std::ostream& sink) {
  MaskedCorpusWriter writer(outcome, sink);
  for (const auto& r : records) writer.write(r);
  return writer.summary();
}

}  // namespace vig
