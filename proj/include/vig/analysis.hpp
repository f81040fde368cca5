// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vig/dataset_io.hpp"
#include "vig/selection.hpp"

namespace vig {

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

struct GroupDistribution {
  std::string group;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;       // sample standard deviation (n - 1), 0 for n = 1
  double skewness = 0.0;  // adjusted Fisher-Pearson G1, 0 when undefined
  std::vector<HistogramBin> histogram;
  double fraction_positive = 0.0;
};

/// Summary statistics and an equal-width histogram over [min, max]. Bins are
/// left-closed right-open except the last, which is closed. A constant
/// sample yields one degenerate bin [v, v].
GroupDistribution summarize_group(std::string group, std::vector<double> values, std::size_t bins);

/// Collects sample VIGs per group; text-only samples are ignored.
class DistributionAccumulator {
 public:
  void add(const ScoredSample& sample);
  void add(const std::string& group, double sample_vig);
  void merge(const DistributionAccumulator& other);

  /// One entry per group, ordered by group tag. Throws EmptyGroupSet when no
  /// multimodal sample was added, InvalidConfig when bins == 0.
  std::vector<GroupDistribution> finish(std::size_t bins) const;

 private:
  std::map<std::string, std::vector<double>> values_;
};

std::vector<GroupDistribution> distribution_report(std::span<const ScoredSample> scored, std::size_t bins);

struct TokenAggregate {
  std::string token_text;
  std::size_t occurrences = 0;
  double mean_loss_diff = 0.0;
};

struct TokenReport {
  std::vector<TokenAggregate> top;     // mean descending, ties by token text
  std::vector<TokenAggregate> bottom;  // mean ascending, ties by token text
};

// Groups token VIGs by exact surface string.
class TokenAggregator {
 public:
  void add(const RawSampleRecord& record);
  void add(const std::string& token_text, double diff);
  void merge(const TokenAggregator& other);

  /// All tokens with at least min_occurrences, unsorted.
  std::vector<TokenAggregate> aggregates(std::size_t min_occurrences) const;
  TokenReport finish(std::size_t min_occurrences, std::size_t top_k) const;

 private:
  struct Sum {
    std::size_t n = 0;
    double total = 0.0;
  };
  std::map<std::string, Sum> sums_;
};

TokenReport token_aggregate_report(std::span<const RawSampleRecord> scored, std::size_t min_occurrences,
                                   std::size_t top_k);

struct ScatterRow {
  double nll_with = 0.0;
  double nll_without = 0.0;
  double diff = 0.0;  // nll_without - nll_with
  std::string token_text;
};

/// One row per answer token of every scored multimodal record.
std::vector<ScatterRow> scatter_rows(const RawSampleRecord& record);
std::vector<ScatterRow> scatter_export(std::span<const RawSampleRecord> scored);

// Fixed-format writers. Reals are printed with 6 decimals.
std::string format_fixed6(double v);
std::string csv_escape(std::string_view field);

inline constexpr std::string_view kDistributionHeader = "group,count,mean,median,std,skewness,fraction_positive";
inline constexpr std::string_view kTokensHeader = "token,occurrences,mean_loss_diff";
inline constexpr std::string_view kScatterHeader = "nll_with,nll_without,diff,token";
inline constexpr std::string_view kEfficiencyHeader =
    "total_tokens,sample_tokens,active_tokens,delta_sample,delta_active";

void write_distribution_csv(std::ostream& out, std::span<const GroupDistribution> dists);
nlohmann::ordered_json histogram_json(const GroupDistribution& dist);
void write_tokens_csv(std::ostream& out, std::span<const TokenAggregate> rows);
void write_scatter_header(std::ostream& out);
void write_scatter_rows(std::ostream& out, std::span<const ScatterRow> rows);
std::string efficiency_row(const AccountingStats& stats);
void write_efficiency_csv(std::ostream& out, const AccountingStats& stats);

}  // namespace vig
