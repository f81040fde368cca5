// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fmt/format.h>
#include <fstream>
#include <variant>

#include "parallel.hpp"
#include "vig/analysis.hpp"
#include "vig/blur.hpp"
#include "vig/digest.hpp"
#include "vig/error.hpp"
#include "vig/synthetic.hpp"

namespace vig {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kBatchLines = 4096;

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, mode | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
  return out;
}

void write_json_file(const fs::path& p, const ordered_json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failure on '" + p.string() + "'");
}

void close_checked(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write failure on '" + p.string() + "'");
}

ReaderOptions reader_options(const CommonOptions& c) {
  ReaderOptions o;
  o.mode = c.validation;
  return o;
}

std::string_view to_string(Validation v) { return v == Validation::Strict ? "strict" : "lenient"; }

ordered_json common_json(const CommonOptions& c) {
  return {{"validation", std::string(to_string(c.validation))}, {"jobs", c.jobs}};
}

// Parses batches of lines on up to `jobs` threads, applies `transform` to each
// admitted record (also in parallel) and hands the results to `sink` in input
// order. Parse failures follow the reader's validation mode; anything thrown
// by `transform` or `sink` propagates.
template <class Transform, class Sink>
void process_corpus(CorpusReader& reader, const ReaderOptions& ro, unsigned jobs, Transform&& transform, Sink&& sink) {
  while (true) {
    auto lines = reader.next_lines(kBatchLines);
    if (lines.empty()) break;
    std::vector<std::variant<std::monostate, RawSampleRecord, Error>> parsed(lines.size());
    detail::parallel_for(lines.size(), jobs, [&](std::size_t i) {
      try {
        parsed[i] = parse_record(lines[i].second, lines[i].first, ro.schema_version);
      } catch (const Error& e) {
        parsed[i] = e;
      }
    });
    std::vector<std::size_t> admitted;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (auto* err = std::get_if<Error>(&parsed[i])) {
        reader.reject(*err);
      } else if (reader.admit(std::get<RawSampleRecord>(parsed[i]), lines[i].first)) {
        admitted.push_back(i);
      }
    }
    detail::parallel_for(admitted.size(), jobs,
                         [&](std::size_t k) { transform(std::get<RawSampleRecord>(parsed[admitted[k]])); });
    for (std::size_t i : admitted) sink(std::move(std::get<RawSampleRecord>(parsed[i])));
  }
}

void require_scored(const RawSampleRecord& r) {
  if (r.modality == Modality::Multimodal && !r.scored()) {
    throw Error(ErrorKind::SchemaViolation, "multimodal record '" + r.sample_id + "' is unscored");
  }
}

}  // namespace

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json accounting_json(const AccountingStats& s) {
  return {{"total_tokens", s.total_tokens},
          {"sample_tokens", s.sample_tokens},
          {"active_tokens", s.active_tokens},
          {"delta_sample_pct", s.delta_sample_pct},
          {"delta_active_pct", s.delta_active_pct},
          {"delta_sample", format_reduction(s.delta_sample_pct)},
          {"delta_active", format_reduction(s.delta_active_pct)}};
}

ordered_json make_manifest(std::string_view command, ordered_json config, const std::string& input_digest,
                           std::optional<double> tau_p, const std::optional<AccountingStats>& counters) {
  ordered_json m;
  m["tool_version"] = std::string(kToolVersion);
  m["command"] = std::string(command);
  m["config"] = std::move(config);
  m["input_digest"] = input_digest;
  m["tau_p"] = tau_p ? ordered_json(*tau_p) : ordered_json(nullptr);
  m["counters"] = counters ? accounting_json(*counters) : ordered_json(nullptr);
  m["timestamp"] = utc_timestamp();
  return m;
}

ScoreSummary run_score(const ScoreOptions& opts) {
  std::optional<SyntheticWorld> world;
  std::string world_digest;
  if (opts.synthetic_world) {
    try {
      auto in = open_in(*opts.synthetic_world);
      world = SyntheticWorld::from_json(nlohmann::json::parse(in));
      world_digest = sha256_file(*opts.synthetic_world);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ProviderFailure, std::string("synthetic world: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::ProviderFailure, std::string("synthetic world: ") + e.what());
    }
  }

  const auto digest = sha256_file(opts.input);
  auto in = open_in(opts.input, std::ios::in | std::ios::binary);
  auto out = open_out(opts.output, std::ios::out | std::ios::binary);
  const auto ro = reader_options(opts.common);
  CorpusReader reader(in, ro);
  ScoreSummary summary;

  std::atomic<std::size_t> provider_scored{0};
  auto transform = [&](RawSampleRecord& r) {
    if (r.modality != Modality::Multimodal) return;
    if (!r.scored()) {
      if (!world) {
        throw Error(ErrorKind::SchemaViolation,
                    "record '" + r.sample_id + "' has no NLLs and no synthetic world was given");
      }
      r = synthetic_score(*world, std::move(r));
      provider_scored.fetch_add(1, std::memory_order_relaxed);
    }
    auto vig = r.compute_vig();
    r.sample_vig = vig.sample_vig;
    r.token_vigs = std::move(vig.token_vigs);
  };
  auto sink = [&](RawSampleRecord&& r) {
    ++summary.records;
    if (r.modality == Modality::Multimodal) ++summary.multimodal;
    out << serialize_record(r) << '\n';
  };
  process_corpus(reader, ro, opts.common.jobs, transform, sink);
  summary.provider_scored = provider_scored.load();
  close_checked(out, opts.output);
  summary.rejected = reader.issues().size();

  ordered_json config = {{"input", opts.input.string()}, {"output", opts.output.string()}};
  config["synthetic_world"] = opts.synthetic_world ? ordered_json(opts.synthetic_world->string()) : ordered_json(nullptr);
  if (world) config["synthetic_world_digest"] = world_digest;
  config.update(common_json(opts.common));
  auto manifest = make_manifest("score", std::move(config), digest, std::nullopt, std::nullopt);
  manifest["records"] = {{"written", summary.records},
                         {"multimodal", summary.multimodal},
                         {"provider_scored", summary.provider_scored},
                         {"rejected", summary.rejected}};
  write_json_file(fs::path(opts.output.string() + ".manifest.json"), manifest);
  return summary;
}

SelectSummary run_select(const SelectOptions& opts) {
  SelectionConfig cfg{opts.p_percent};
  cfg.validate();
  const auto digest = sha256_file(opts.input);
  const auto ro = reader_options(opts.common);

  std::vector<ScoredSample> table;
  std::size_t rejected = 0;
  {
    auto in = open_in(opts.input, std::ios::in | std::ios::binary);
    CorpusReader reader(in, ro);
    std::vector<ScoredSample> batch_scores;
    process_corpus(
        reader, ro, opts.common.jobs,
        [](RawSampleRecord& r) {
          require_scored(r);
          // Cache the table row in the record's derived fields.
          if (r.modality == Modality::Multimodal) {
            auto vig = r.compute_vig();
            r.sample_vig = vig.sample_vig;
            r.token_vigs = std::move(vig.token_vigs);
          }
        },
        [&](RawSampleRecord&& r) {
          ScoredSample s;
          s.sample_id = std::move(r.sample_id);
          s.group = std::move(r.group);
          s.modality = r.modality;
          s.token_count = r.answer_tokens.size();
          if (r.modality == Modality::Multimodal) s.vig = VigResult{*r.sample_vig, std::move(*r.token_vigs)};
          table.push_back(std::move(s));
        });
    rejected = reader.issues().size();
  }

  const auto outcome = select(table, cfg);

  SelectSummary summary;
  summary.tau_p = outcome.tau_p;
  summary.accounting = outcome.accounting;
  summary.rejected = rejected;
  for (const auto& s : table) {
    if (s.modality == Modality::Multimodal) {
      ++summary.multimodal;
    } else {
      ++summary.text_only;
    }
  }
  summary.selected_multimodal = outcome.selected_ids.size() - summary.text_only;
  table.clear();
  table.shrink_to_fit();

  {
    auto in = open_in(opts.input, std::ios::in | std::ios::binary);
    const auto masked_path = opts.out_dir / kMaskedCorpusName;
    auto out = open_out(masked_path, std::ios::out | std::ios::binary);
    CorpusReader reader(in, ro);
    // Rejections were already counted on the first pass.
    MaskedCorpusWriter writer(outcome, out);
    process_corpus(reader, ro, opts.common.jobs, [](RawSampleRecord&) {},
                   [&](RawSampleRecord&& r) { writer.write(r); });
    summary.written = writer.summary();
    close_checked(out, masked_path);
  }

  ordered_json selection;
  selection["tool_version"] = std::string(kToolVersion);
  selection["p"] = opts.p_percent;
  selection["mode"] = cfg.bypass() ? "bypass" : "vig";
  if (cfg.bypass()) selection["note"] = std::string(kBypassNote);
  selection["tau_p"] = outcome.tau_p ? ordered_json(*outcome.tau_p) : ordered_json(nullptr);
  selection["multimodal_samples"] = summary.multimodal;
  selection["selected_multimodal"] = summary.selected_multimodal;
  selection["text_only_samples"] = summary.text_only;
  selection["selected_total"] = outcome.selected_ids.size();
  selection["accounting"] = accounting_json(outcome.accounting);
  selection["input_digest"] = digest;
  write_json_file(opts.out_dir / kSelectionName, selection);

  ordered_json config = {{"input", opts.input.string()}, {"out_dir", opts.out_dir.string()}, {"p", opts.p_percent}};
  config.update(common_json(opts.common));
  auto manifest = make_manifest("select", std::move(config), digest, outcome.tau_p, outcome.accounting);
  if (cfg.bypass()) manifest["note"] = std::string(kBypassNote);
  manifest["rejected_records"] = rejected;
  write_json_file(opts.out_dir / kManifestName, manifest);
  return summary;
}

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::Distribution: return "dist";
    case ReportKind::Tokens: return "tokens";
    case ReportKind::Scatter: return "scatter";
    case ReportKind::Efficiency: return "efficiency";
  }
  return "efficiency";
}

std::optional<ReportKind> report_kind_from_string(std::string_view s) {
  for (auto k : {ReportKind::Distribution, ReportKind::Tokens, ReportKind::Scatter, ReportKind::Efficiency}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

namespace {

std::string file_safe(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

void run_report(const ReportOptions& opts) {
  if (opts.bins == 0) throw Error(ErrorKind::InvalidConfig, "--bins must be >= 1");
  if (opts.min_occurrences == 0) throw Error(ErrorKind::InvalidConfig, "--min-occurrences must be >= 1");
  const auto digest = sha256_file(opts.input);
  const auto ro = reader_options(opts.common);
  auto in = open_in(opts.input, std::ios::in | std::ios::binary);
  CorpusReader reader(in, ro);
  fs::create_directories(opts.out_dir);

  std::optional<double> tau;
  std::optional<AccountingStats> counters;
  auto check = [](RawSampleRecord& r) { require_scored(r); };

  switch (opts.kind) {
    case ReportKind::Distribution: {
      DistributionAccumulator acc;
      process_corpus(reader, ro, opts.common.jobs, check, [&](RawSampleRecord&& r) {
        if (r.modality == Modality::Multimodal) acc.add(r.group, r.compute_vig().sample_vig);
      });
      const auto dists = acc.finish(opts.bins);
      auto out = open_out(opts.out_dir / "distribution.csv", std::ios::out | std::ios::binary);
      write_distribution_csv(out, dists);
      close_checked(out, opts.out_dir / "distribution.csv");
      for (const auto& d : dists) {
        write_json_file(opts.out_dir / "histograms" / (file_safe(d.group) + ".json"), histogram_json(d));
      }
      break;
    }
    case ReportKind::Tokens: {
      TokenAggregator agg;
      process_corpus(reader, ro, opts.common.jobs, check, [&](RawSampleRecord&& r) { agg.add(r); });
      const auto report = agg.finish(opts.min_occurrences, opts.top_k);
      for (const auto& [name, rows] : {std::pair{"tokens_top.csv", &report.top}, {"tokens_bottom.csv", &report.bottom}}) {
        auto out = open_out(opts.out_dir / name, std::ios::out | std::ios::binary);
        write_tokens_csv(out, *rows);
        close_checked(out, opts.out_dir / name);
      }
      break;
    }
    case ReportKind::Scatter: {
      const auto path = opts.out_dir / "scatter.csv";
      auto out = open_out(path, std::ios::out | std::ios::binary);
      write_scatter_header(out);
      process_corpus(reader, ro, opts.common.jobs, check,
                     [&](RawSampleRecord&& r) { write_scatter_rows(out, scatter_rows(r)); });
      close_checked(out, path);
      break;
    }
    case ReportKind::Efficiency: {
      SelectionConfig cfg{opts.p_percent};
      cfg.validate();
      std::vector<ScoredSample> table;
      process_corpus(reader, ro, opts.common.jobs, check,
                     [&](RawSampleRecord&& r) { table.push_back(r.to_scored()); });
      const auto outcome = select(table, cfg);
      tau = outcome.tau_p;
      counters = outcome.accounting;
      const auto path = opts.out_dir / "efficiency.csv";
      auto out = open_out(path, std::ios::out | std::ios::binary);
      write_efficiency_csv(out, outcome.accounting);
      close_checked(out, path);
      break;
    }
  }

  ordered_json config = {{"input", opts.input.string()}, {"out_dir", opts.out_dir.string()},
                         {"kind", std::string(to_string(opts.kind))}};
  switch (opts.kind) {
    case ReportKind::Distribution: config["bins"] = opts.bins; break;
    case ReportKind::Tokens:
      config["min_occurrences"] = opts.min_occurrences;
      config["top_k"] = opts.top_k;
      break;
    case ReportKind::Scatter: break;
    case ReportKind::Efficiency: config["p"] = opts.p_percent; break;
  }
  config.update(common_json(opts.common));
  auto manifest = make_manifest("report", std::move(config), digest, tau, counters);
  manifest["rejected_records"] = reader.issues().size();
  write_json_file(opts.out_dir / fmt::format("manifest_{}.json", to_string(opts.kind)), manifest);
}

void run_blur(const BlurOptions& opts) {
  auto in = open_in(opts.input, std::ios::in | std::ios::binary);
  const auto img = read_ppm(in);
  const auto blurred = gaussian_blur(img, opts.scale);
  auto out = open_out(opts.output, std::ios::out | std::ios::binary);
  write_ppm(out, blurred);
  close_checked(out, opts.output);
}

}  // namespace vig
