// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

#include "vig/error.hpp"

namespace vig {

GroupDistribution summarize_group(std::string group, std::vector<double> values, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::InvalidConfig, "bins must be >= 1");
  if (values.empty()) throw Error(ErrorKind::EmptyGroupSet, "group '" + group + "' is empty");

  GroupDistribution d;
  d.group = std::move(group);
  d.count = values.size();
  const auto n = static_cast<double>(values.size());
  d.mean = stable_mean(values);

  double m2 = 0.0;
  double m3 = 0.0;
  std::size_t positive = 0;
  for (double v : values) {
    const double dv = v - d.mean;
    m2 += dv * dv;
    m3 += dv * dv * dv;
    if (v > 0.0) ++positive;
  }
  d.fraction_positive = static_cast<double>(positive) / n;
  d.std = values.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  m2 /= n;
  m3 /= n;
  if (values.size() >= 3 && m2 > 0.0) {
    d.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * m3 / std::pow(m2, 1.5);
  }

  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  d.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);

  const double lo = values.front();
  const double hi = values.back();
  if (lo == hi) {
    d.histogram.push_back({lo, hi, values.size()});
    return d;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  auto edge = [&](std::size_t k) { return k == bins ? hi : lo + width * static_cast<double>(k); };
  d.histogram.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) d.histogram[k] = {edge(k), edge(k + 1), 0};
  for (double v : values) {
    auto k = std::min(static_cast<std::size_t>((v - lo) / width), bins - 1);
    // Settle against the stored edges so the boundary rule holds exactly.
    while (k > 0 && v < d.histogram[k].left) --k;
    while (k + 1 < bins && v >= d.histogram[k + 1].left) ++k;
    ++d.histogram[k].count;
  }
  return d;
}

void DistributionAccumulator::add(const ScoredSample& sample) {
  if (sample.modality != Modality::Multimodal) return;
  if (!sample.vig) throw Error(ErrorKind::InconsistentInput, "sample '" + sample.sample_id + "' is unscored");
  add(sample.group, sample.vig->sample_vig);
}

void DistributionAccumulator::add(const std::string& group, double sample_vig) { values_[group].push_back(sample_vig); }

void DistributionAccumulator::merge(const DistributionAccumulator& other) {
  for (const auto& [g, vs] : other.values_) {
    auto& dst = values_[g];
    dst.insert(dst.end(), vs.begin(), vs.end());
  }
}

std::vector<GroupDistribution> DistributionAccumulator::finish(std::size_t bins) const {
  if (bins == 0) throw Error(ErrorKind::InvalidConfig, "bins must be >= 1");
  if (values_.empty()) throw Error(ErrorKind::EmptyGroupSet, "no multimodal samples to summarize");
  std::vector<GroupDistribution> out;
  out.reserve(values_.size());
  for (const auto& [g, vs] : values_) out.push_back(summarize_group(g, vs, bins));
  return out;
}

std::vector<GroupDistribution> distribution_report(std::span<const ScoredSample> scored, std::size_t bins) {
  DistributionAccumulator acc;
  for (const auto& s : scored) acc.add(s);
  return acc.finish(bins);
}

void TokenAggregator::add(const RawSampleRecord& record) {
  if (record.modality != Modality::Multimodal) return;
  const auto vig = record.compute_vig();
  for (std::size_t t = 0; t < record.answer_tokens.size(); ++t) {
    add(record.answer_tokens[t].token_text, vig.token_vigs[t]);
  }
}

void TokenAggregator::add(const std::string& token_text, double diff) {
  auto& s = sums_[token_text];
  ++s.n;
  s.total += diff;
}

void TokenAggregator::merge(const TokenAggregator& other) {
  for (const auto& [text, s] : other.sums_) {
    auto& dst = sums_[text];
    dst.n += s.n;
    dst.total += s.total;
  }
}

std::vector<TokenAggregate> TokenAggregator::aggregates(std::size_t min_occurrences) const {
  if (min_occurrences == 0) throw Error(ErrorKind::InvalidConfig, "min_occurrences must be >= 1");
  std::vector<TokenAggregate> out;
  for (const auto& [text, s] : sums_) {
    if (s.n >= min_occurrences) out.push_back({text, s.n, s.total / static_cast<double>(s.n)});
  }
  return out;
}

TokenReport TokenAggregator::finish(std::size_t min_occurrences, std::size_t top_k) const {
  auto all = aggregates(min_occurrences);
  TokenReport r;
  r.top = all;
  std::sort(r.top.begin(), r.top.end(), [](const TokenAggregate& a, const TokenAggregate& b) {
    if (a.mean_loss_diff != b.mean_loss_diff) return a.mean_loss_diff > b.mean_loss_diff;
    return a.token_text < b.token_text;
  });
  r.bottom = std::move(all);
  std::sort(r.bottom.begin(), r.bottom.end(), [](const TokenAggregate& a, const TokenAggregate& b) {
    if (a.mean_loss_diff != b.mean_loss_diff) return a.mean_loss_diff < b.mean_loss_diff;
    return a.token_text < b.token_text;
  });
  if (r.top.size() > top_k) r.top.resize(top_k);
  if (r.bottom.size() > top_k) r.bottom.resize(top_k);
  return r;
}

TokenReport token_aggregate_report(std::span<const RawSampleRecord> scored, std::size_t min_occurrences,
                                   std::size_t top_k) {
  TokenAggregator agg;
  for (const auto& r : scored) agg.add(r);
  return agg.finish(min_occurrences, top_k);
}

std::vector<ScatterRow> scatter_rows(const RawSampleRecord& record) {
  std::vector<ScatterRow> rows;
  if (record.modality != Modality::Multimodal) return rows;
  if (!record.scored()) throw Error(ErrorKind::SchemaViolation, "record '" + record.sample_id + "' is unscored");
  rows.reserve(record.answer_tokens.size());
  for (std::size_t t = 0; t < record.answer_tokens.size(); ++t) {
    const double with = (*record.nll_with)[t];
    const double without = (*record.nll_without)[t];
    rows.push_back({with, without, token_vig(without, with), record.answer_tokens[t].token_text});
  }
  return rows;
}

std::vector<ScatterRow> scatter_export(std::span<const RawSampleRecord> scored) {
  std::vector<ScatterRow> rows;
  for (const auto& r : scored) {
    auto part = scatter_rows(r);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return rows;
}

std::string format_fixed6(double v) {
  auto s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_distribution_csv(std::ostream& out, std::span<const GroupDistribution> dists) {
  out << kDistributionHeader << '\n';
  for (const auto& d : dists) {
    out << csv_escape(d.group) << ',' << d.count << ',' << format_fixed6(d.mean) << ',' << format_fixed6(d.median)
        << ',' << format_fixed6(d.std) << ',' << format_fixed6(d.skewness) << ','
        << format_fixed6(d.fraction_positive) << '\n';
  }
}

nlohmann::ordered_json histogram_json(const GroupDistribution& d) {
  nlohmann::ordered_json j;
  j["group"] = d.group;
  j["count"] = d.count;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : d.histogram) {
    bins.push_back({{"bin_left", b.left}, {"bin_right", b.right}, {"count", b.count}});
  }
  j["bins"] = std::move(bins);
  return j;
}

void write_tokens_csv(std::ostream& out, std::span<const TokenAggregate> rows) {
  out << kTokensHeader << '\n';
  for (const auto& r : rows) {
    out << csv_escape(r.token_text) << ',' << r.occurrences << ',' << format_fixed6(r.mean_loss_diff) << '\n';
  }
}

void write_scatter_header(std::ostream& out) { out << kScatterHeader << '\n'; }

void write_scatter_rows(std::ostream& out, std::span<const ScatterRow> rows) {
  for (const auto& r : rows) {
    out << format_fixed6(r.nll_with) << ',' << format_fixed6(r.nll_without) << ',' << format_fixed6(r.diff) << ','
        << csv_escape(r.token_text) << '\n';
  }
}

std::string efficiency_row(const AccountingStats& s) {
  return fmt::format("{},{},{},{},{}", s.total_tokens, s.sample_tokens, s.active_tokens,
                     format_reduction(s.delta_sample_pct), format_reduction(s.delta_active_pct));
}

void write_efficiency_csv(std::ostream& out, const AccountingStats& stats) {
  out << kEfficiencyHeader << '\n' << efficiency_row(stats) << '\n';
}

}  // namespace vig
