// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

// vig_curate: score, select, report and blur from the command line.
//
//   vig_curate score   corpus.vig.jsonl scored.vig.jsonl [--synthetic-world w.json]
//   vig_curate select  scored.vig.jsonl out/ [--p 70]
//   vig_curate report  {dist|tokens|scatter|efficiency} scored.vig.jsonl out/
//   vig_curate blur    --scale 0.05 in.ppm out.ppm
//   vig_curate synth-world  world.json [--boost 4]
//   vig_curate synth-corpus world.json corpus.vig.jsonl [--records N]
//
// Exit codes: 0 ok, 1 usage, 2 data validation, 3 provider/internal.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "vig/dataset_io.hpp"
#include "vig/error.hpp"
#include "vig/pipeline.hpp"
#include "vig/selection.hpp"
#include "vig/synthetic.hpp"

namespace {

struct ValidationFlags {
  bool strict = false;
  bool lenient = false;

  vig::Validation resolve() const { return lenient ? vig::Validation::Lenient : vig::Validation::Strict; }
};

void add_common(CLI::App* cmd, ValidationFlags& v, unsigned& jobs) {
  auto* s = cmd->add_flag("--strict", v.strict, "Abort on the first invalid record (default)");
  auto* l = cmd->add_flag("--lenient", v.lenient, "Skip invalid records and count them in the manifest");
  s->excludes(l);
  cmd->add_option("--jobs", jobs, "Worker threads; results do not depend on this")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv("VIG_CURATE_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw vig::Error(vig::ErrorKind::InvalidConfig, "VIG_CURATE_SEED must be an unsigned integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vig_curate: visual-information-gain data curation for multimodal instruction tuning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vig::kToolVersion));
  app.footer(vig::published_thresholds_text());

  ValidationFlags validation;
  unsigned jobs = 1;

  vig::ScoreOptions score;
  std::string world_path;
  auto* score_cmd = app.add_subcommand("score", "Attach sample and token VIG to a corpus");
  score_cmd->add_option("input", score.input, "Input corpus (*.vig.jsonl)")->required();
  score_cmd->add_option("output", score.output, "Scored corpus to write")->required();
  score_cmd->add_option("--synthetic-world", world_path, "Score NLL-less records with this synthetic world");
  add_common(score_cmd, validation, jobs);

  vig::SelectOptions sel;
  auto* select_cmd = app.add_subcommand("select", "Sample and token selection at the top-p% threshold");
  select_cmd->add_option("input", sel.input, "Scored corpus")->required();
  select_cmd->add_option("out_dir", sel.out_dir, "Directory for masked corpus, selection.json, manifest")
      ->required();
  select_cmd->add_option("--p", sel.p_percent, "Percent of multimodal samples to keep, (0, 100]; 100 = bypass")
      ->capture_default_str();
  add_common(select_cmd, validation, jobs);

  vig::ReportOptions rep;
  std::string kind;
  auto* report_cmd = app.add_subcommand("report", "Distribution, token, scatter and efficiency reports");
  report_cmd->add_option("kind", kind, "dist | tokens | scatter | efficiency")
      ->required()
      ->check(CLI::IsMember({"dist", "tokens", "scatter", "efficiency"}));
  report_cmd->add_option("input", rep.input, "Scored corpus")->required();
  report_cmd->add_option("out_dir", rep.out_dir, "Output directory")->required();
  report_cmd->add_option("--bins", rep.bins, "Histogram bins (dist)")->check(CLI::PositiveNumber)->capture_default_str();
  report_cmd->add_option("--min-occurrences", rep.min_occurrences, "Minimum token count (tokens)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  report_cmd->add_option("--top-k", rep.top_k, "Rows per token list (tokens)")->capture_default_str();
  report_cmd->add_option("--p", rep.p_percent, "Selection percent (efficiency)")->capture_default_str();
  add_common(report_cmd, validation, jobs);

  vig::BlurOptions blur;
  auto* blur_cmd = app.add_subcommand("blur", "Gaussian blur of a P6 image for the without-image pass");
  blur_cmd->add_option("--scale", blur.scale, "sigma = scale * min(width, height)")->capture_default_str();
  blur_cmd->add_option("input", blur.input, "Input P6 PPM")->required();
  blur_cmd->add_option("output", blur.output, "Output P6 PPM")->required();

  std::string world_out;
  double boost = 4.0;
  auto* world_cmd = app.add_subcommand("synth-world", "Write the built-in synthetic scorer world");
  world_cmd->add_option("output", world_out, "World JSON to write")->required();
  world_cmd->add_option("--boost", boost, "P_with / P_without for grounded tokens, (1, 9)")->capture_default_str();

  std::string corpus_world;
  std::string corpus_out;
  vig::SyntheticCorpusOptions corpus_opts;
  auto* corpus_cmd = app.add_subcommand(
      "synth-corpus", "Write an unscored random corpus for a synthetic world (seeded by VIG_CURATE_SEED)");
  corpus_cmd->add_option("world", corpus_world, "World JSON")->required();
  corpus_cmd->add_option("output", corpus_out, "Corpus to write")->required();
  corpus_cmd->add_option("--records", corpus_opts.records, "Number of records")->capture_default_str();
  corpus_cmd->add_option("--text-only-fraction", corpus_opts.text_only_fraction, "Share of text-only records")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const vig::CommonOptions common{validation.resolve(), jobs};
  try {
    if (*score_cmd) {
      score.common = common;
      if (!world_path.empty()) score.synthetic_world = world_path;
      const auto s = vig::run_score(score);
      std::cerr << "scored " << s.multimodal << " multimodal of " << s.records << " records";
      if (s.rejected) std::cerr << ", rejected " << s.rejected;
      std::cerr << '\n';
    } else if (*select_cmd) {
      sel.common = common;
      const auto s = vig::run_select(sel);
      if (s.tau_p) {
        std::cerr << "tau_p = " << *s.tau_p << ", kept " << s.selected_multimodal << " of " << s.multimodal
                  << " multimodal samples\n";
      } else {
        std::cerr << "p = 100: " << vig::kBypassNote << '\n';
      }
    } else if (*report_cmd) {
      rep.common = common;
      rep.kind = *vig::report_kind_from_string(kind);
      vig::run_report(rep);
    } else if (*blur_cmd) {
      vig::run_blur(blur);
    } else if (*world_cmd) {
      const auto world = vig::default_world(boost);
      std::ofstream out(world_out, std::ios::binary | std::ios::trunc);
      out << world.to_json().dump(2) << '\n';
      if (!out) throw vig::Error(vig::ErrorKind::Io, "cannot write '" + world_out + "'");
    } else if (*corpus_cmd) {
      std::ifstream in(corpus_world);
      if (!in) throw vig::Error(vig::ErrorKind::Io, "cannot read '" + corpus_world + "'");
      const auto world = vig::SyntheticWorld::from_json(nlohmann::json::parse(in));
      corpus_opts.seed = seed_from_env();
      vig::SyntheticCorpusGenerator gen(world, corpus_opts);
      std::ofstream out(corpus_out, std::ios::binary | std::ios::trunc);
      while (!gen.done()) out << vig::serialize_record(gen.next()) << '\n';
      if (!out) throw vig::Error(vig::ErrorKind::Io, "cannot write '" + corpus_out + "'");
    }
  } catch (const vig::Error& e) {
    std::cerr << "vig_curate: " << e.what() << '\n';
    return vig::exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "vig_curate: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "vig_curate: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
