// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#define DOCTEST_CONFIG_DISABLE
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fmt/format.h>
#include <functional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "vig/blur.hpp"
#include "vig/core.hpp"
#include "vig/dataset_io.hpp"
#include "vig/pipeline.hpp"
#include "vig/selection.hpp"
#include "vig/synthetic.hpp"

namespace fs = std::filesystem;
using namespace vig;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// 1 and 2 share one corpus of random NLL vectors.
struct NllCase {
  std::vector<double> without, with;
};

std::vector<NllCase> nll_corpus() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 512);
  std::uniform_real_distribution<double> val(0.0, 20.0);
  std::vector<NllCase> out(100'000);
  for (auto& c : out) {
    const auto n = len(rng);
    c.without.resize(n);
    c.with.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.without[i] = val(rng);
      c.with[i] = val(rng);
    }
  }
  return out;
}

Outcome perplexity_identity(const std::vector<NllCase>& corpus) {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& c : corpus) {
    const double a = vig_from_perplexities({perplexity_from_nlls(c.without), perplexity_from_nlls(c.with)});
    const double b = sample_vig(c.without, c.with).sample_vig;
    worst = std::max(worst, std::abs(a - b));
  }
  const double t = seconds_since(t0);
  o.require(worst < 1e-9, fmt::format("max abs error {:.3g}", worst));
  o.require(t < 5.0, fmt::format("runtime {:.2f} s", t));
  if (o.pass) o.detail = fmt::format("max abs error {:.3g}, {:.2f} s", worst, t);
  return o;
}

Outcome decomposition(const std::vector<NllCase>& corpus) {
  Outcome o;
  double worst = 0.0;
  for (const auto& c : corpus) {
    const auto r = sample_vig(c.without, c.with);
    std::vector<double> diffs(c.without.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = c.without[i] - c.with[i];
    if (diffs != r.token_vigs) {
      o.require(false, "token VIGs differ from nll_without - nll_with");
      return o;
    }
    const long double m = oracle::mean_ld(diffs);
    const long double err = std::abs(static_cast<long double>(r.sample_vig) - m);
    const double rel = m == 0.0L ? static_cast<double>(err) : static_cast<double>(err / std::abs(m));
    worst = std::max(worst, rel);
  }
  o.require(worst <= 1e-12, fmt::format("max rel error {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("max rel error {:.3g}", worst);
  return o;
}

Outcome onehot_equivalence() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    // Mix uniform and log-uniform draws to reach tiny probabilities.
    auto draw = [&] { return i % 2 ? std::max(u(rng), 1e-300) : std::exp(-40.0 * u(rng)); };
    const double qa = draw(), qb = draw();
    const double gap = kl_onehot_gap(qa, qb);
    const double tv = token_vig(-std::log(qa), -std::log(qb));
    worst = std::max(worst, std::abs(gap - tv));
  }
  o.require(worst < 1e-12, fmt::format("max abs error {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("max abs error {:.3g}", worst);
  return o;
}

// 4 and 5 run over the same trials.
std::pair<Outcome, Outcome> selection_trials() {
  Outcome eq, nonempty;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> size(1, 10'000);
  const std::vector<double> grid = {30.0, 50.0, 70.0, 100.0};
  std::size_t violations = 0, tie_trials = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto data = testing::random_dataset(rng, size(rng));
    const auto ref_input = testing::to_oracle(data);
    std::set<double> distinct;
    std::size_t n_mm = 0;
    for (const auto& s : data) {
      if (s.vig) {
        distinct.insert(s.vig->sample_vig);
        ++n_mm;
      }
    }
    tie_trials += distinct.size() < n_mm;
    std::optional<SelectionOutcome> prev;
    for (double p : grid) {
      const auto out = select(data, {p});
      const auto ref = oracle::select(ref_input, p);
      const std::set<std::string> got(out.selected_ids.begin(), out.selected_ids.end());
      eq.require(out.tau_p == ref.tau, fmt::format("trial {} p={} threshold mismatch", trial, p));
      eq.require(got == ref.selected, fmt::format("trial {} p={} selected set mismatch", trial, p));
      eq.require(out.token_masks == ref.masks, fmt::format("trial {} p={} mask mismatch", trial, p));
      for (const auto& s : data) {
        if (!s.vig || !got.contains(s.sample_id)) continue;
        const auto& m = out.token_masks.at(s.sample_id);
        if (std::find(m.begin(), m.end(), true) == m.end()) ++violations;
      }
      if (prev) {
        if (prev->tau_p && out.tau_p) {
          eq.require(*prev->tau_p >= *out.tau_p, fmt::format("trial {} threshold not monotone at p={}", trial, p));
        }
        for (const auto& id : prev->selected_ids) {
          eq.require(got.contains(id), fmt::format("trial {} nesting broken at p={}", trial, p));
        }
      }
      prev = out;
    }
  }
  const double t = seconds_since(t0);
  eq.require(t < 60.0, fmt::format("runtime {:.2f} s", t));
  if (eq.pass) eq.detail = fmt::format("500 trials ({} with ties), {:.2f} s", tie_trials, t);
  nonempty.require(violations == 0, fmt::format("{} selected samples with empty masks", violations));
  if (nonempty.pass) nonempty.detail = "0 violations";
  return {eq, nonempty};
}

std::string fixture_record(const std::string& id, const std::vector<double>& token_vigs) {
  RawSampleRecord r;
  r.sample_id = id;
  r.group = "fixture";
  r.question = "q";
  std::vector<double> with, without;
  for (std::size_t t = 0; t < token_vigs.size(); ++t) {
    r.answer_tokens.push_back({static_cast<std::int64_t>(t), "t"});
    with.push_back(2.0);
    without.push_back(2.0 + token_vigs[t]);
  }
  r.nll_with = with;
  r.nll_without = without;
  return serialize_record(r) + "\n";
}

std::string efficiency_csv(const fs::path& dir, const std::string& corpus, double p) {
  testing::write_file(dir / "corpus.jsonl", corpus);
  ReportOptions opts;
  opts.input = dir / "corpus.jsonl";
  opts.out_dir = dir / "out";
  opts.kind = ReportKind::Efficiency;
  opts.p_percent = p;
  run_report(opts);
  return testing::read_file(dir / "out" / "efficiency.csv");
}

Outcome accounting_arithmetic() {
  Outcome o;
  const std::string header = "total_tokens,sample_tokens,active_tokens,delta_sample,delta_active\n";
  const auto dir = testing::scratch_dir("acceptance_accounting");
  // A is kept with one token masked, B is kept with two masked, C is dropped.
  const auto a = efficiency_csv(dir, fixture_record("A", {1, 1, 1, 0}) + fixture_record("B", {1, 1, 1, 1, -1}) +
                                         fixture_record("C", {0, 0, 0, 0, 0, 0}),
                                50.0);
  o.require(a == header + "15,9,7,-40%,-53%\n", "fixture 1: " + a);
  // tau = 0.5 at p = 50 over four samples; X ties at tau.
  const auto b = efficiency_csv(dir, fixture_record("W", {2, 0}) + fixture_record("X", {0.5, 0.5}) +
                                         fixture_record("Y", {0.25, 0.25, 0.25, 0.25}) + fixture_record("Z", {-1, -1}),
                                50.0);
  o.require(b == header + "10,4,3,-60%,-70%\n", "fixture 2: " + b);
  const auto c = efficiency_csv(dir, fixture_record("A", {1, 1, 1, 0}) + fixture_record("B", {1, 1}), 100.0);
  o.require(c == header + "6,6,6,0%,0%\n", "fixture 3: " + c);

  const auto ds = format_reduction(reduction_pct(51'170'000, 58'610'000));
  const auto da = format_reduction(reduction_pct(38'450'000, 58'610'000));
  o.require(ds == "-13%" && da == "-34%", "published row gave " + ds + " / " + da);
  if (o.pass) o.detail = "15/9/7 -40%/-53%; published row -13%/-34%";
  return o;
}

Outcome grounding_signal() {
  Outcome o;
  const auto world = default_world();
  const double ln4 = std::log(4.0);
  const auto dir = testing::scratch_dir("acceptance_grounding");
  SyntheticCorpusOptions copts;
  copts.records = 4000;
  copts.seed = 99;
  SyntheticCorpusGenerator gen(world, copts);
  {
    std::ofstream out(dir / "scored.jsonl", std::ios::binary);
    while (!gen.done()) {
      auto rec = synthetic_score(world, gen.next());
      if (rec.modality == Modality::Multimodal) {
        const auto vr = rec.compute_vig();
        rec.sample_vig = vr.sample_vig;
        rec.token_vigs = vr.token_vigs;
        for (std::size_t t = 0; t < rec.answer_tokens.size(); ++t) {
          const auto idx = world.token_index(rec.answer_tokens[t].token_text);
          const double v = (*rec.token_vigs)[t];
          switch (world.classes[static_cast<std::size_t>(idx)]) {
            case TokenClass::Grounded:
              o.require(std::abs(v - ln4) <= 1e-12, fmt::format("grounded token VIG {:.17g}", v));
              break;
            case TokenClass::Neutral:
              o.require(v == 0.0, fmt::format("neutral token VIG {:.17g}", v));
              break;
            case TokenClass::AntiVisual: break;
          }
        }
      }
      out << serialize_record(rec) << '\n';
    }
  }
  ReportOptions ropts;
  ropts.input = dir / "scored.jsonl";
  ropts.out_dir = dir / "report";
  ropts.kind = ReportKind::Tokens;
  ropts.top_k = world.vocabulary.size();
  run_report(ropts);

  std::istringstream top(testing::read_file(dir / "report" / "tokens_top.csv"));
  std::string line;
  std::getline(top, line);
  std::set<std::string> grounded_seen;
  std::size_t last_grounded = 0, first_neutral = SIZE_MAX, row = 0;
  while (std::getline(top, line)) {
    const auto token = line.substr(0, line.find(','));
    const auto idx = world.token_index(token);
    o.require(idx >= 0, "unknown token in report: " + token);
    if (idx < 0) break;
    const auto cls = world.classes[static_cast<std::size_t>(idx)];
    if (cls == TokenClass::Grounded) {
      last_grounded = row;
      grounded_seen.insert(token);
    }
    if (cls == TokenClass::Neutral) first_neutral = std::min(first_neutral, row);
    ++row;
  }
  std::size_t n_grounded = 0, n_neutral = 0;
  for (auto c : world.classes) {
    n_grounded += c == TokenClass::Grounded;
    n_neutral += c == TokenClass::Neutral;
  }
  o.require(grounded_seen.size() == n_grounded, fmt::format("{} of {} grounded tokens reported", grounded_seen.size(),
                                                            n_grounded));
  o.require(first_neutral != SIZE_MAX, "no neutral token reported");
  o.require(last_grounded < first_neutral, "a neutral token ranks above a grounded token");
  if (o.pass) o.detail = fmt::format("{} grounded ranked above {} neutral", n_grounded, n_neutral);
  return o;
}

Outcome blur_correctness() {
  Outcome o;
  double worst = 0.0;
  for (auto [w, h, scale] : {std::tuple{21, 21, 0.06}, std::tuple{33, 17, 0.05}, std::tuple{16, 40, 0.1}}) {
    PixelImage img{static_cast<std::size_t>(w), static_cast<std::size_t>(h),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(w * h * 3), 0)};
    const std::size_t cx = w / 2, cy = h / 3;
    for (std::size_t c = 0; c < 3; ++c) img.data[(cy * img.width + cx) * 3 + c] = 255;
    const auto got = gaussian_blur_float(img, scale);
    const auto ref = oracle::dense_blur(img.data, w, h, blur_sigma(img.width, img.height, scale));
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(got.data[i] - ref[i]));
  }
  o.require(worst < 1e-6, fmt::format("impulse response max error {:.3g}", worst));

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> dim(1, 48);
  for (int i = 0; i < 50; ++i) {
    const auto w = dim(rng), h = dim(rng);
    PixelImage flat{w, h, {}};
    flat.data.resize(w * h * 3);
    const std::uint8_t rgb[3] = {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                                 static_cast<std::uint8_t>(byte(rng))};
    for (std::size_t k = 0; k < flat.data.size(); ++k) flat.data[k] = rgb[k % 3];
    o.require(gaussian_blur(flat, 0.03 + 0.01 * (i % 20)) == flat, fmt::format("{}x{} constant image changed", w, h));

    PixelImage noise{w, h, {}};
    noise.data.resize(w * h * 3);
    for (auto& b : noise.data) b = static_cast<std::uint8_t>(byte(rng));
    std::ostringstream first;
    write_ppm(first, noise);
    std::istringstream in(first.str());
    const auto back = read_ppm(in);
    std::ostringstream second;
    write_ppm(second, back);
    o.require(back == noise && second.str() == first.str(), fmt::format("{}x{} P6 round trip differs", w, h));
  }
  if (o.pass) o.detail = fmt::format("impulse max error {:.3g}", worst);
  return o;
}

// Runs score -> select -> report efficiency inside `dir` with relative
// paths, so the manifests do not embed the directory name.
bool pipeline_run(const fs::path& dir, const fs::path& world, const fs::path& corpus, unsigned jobs) {
  fs::create_directories(dir);
  const std::string bin = VIG_CURATE_BIN;
  const std::string j = " --jobs " + std::to_string(jobs) + " ";
  const std::string cd = "cd " + q(dir) + " && SOURCE_DATE_EPOCH=0 " + q(bin);
  fs::copy_file(world, dir / "world.json", fs::copy_options::overwrite_existing);
  fs::copy_file(corpus, dir / "corpus.jsonl", fs::copy_options::overwrite_existing);
  return shell(cd + " score" + j + "--synthetic-world world.json corpus.jsonl scored.jsonl") == 0 &&
         shell(cd + " select" + j + "--p 70 scored.jsonl sel") == 0 &&
         shell(cd + " report efficiency" + j + "--p 70 scored.jsonl eff") == 0;
}

const std::vector<std::string> kPipelineFiles = {
    "scored.jsonl", "scored.jsonl.manifest.json", "sel/masked.vig.jsonl", "sel/selection.json",
    "sel/manifest.json", "eff/efficiency.csv", "eff/manifest_efficiency.json"};

// Manifests record the worker count; everything else must match.
std::string without_jobs(const std::string& manifest) {
  auto j = nlohmann::ordered_json::parse(manifest);
  j["config"].erase("jobs");
  return j.dump();
}

Outcome determinism() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto dir = testing::scratch_dir("acceptance_determinism");
  const std::string bin = VIG_CURATE_BIN;
  o.require(shell(q(bin) + " synth-world " + q(dir / "world.json")) == 0, "synth-world failed");
  o.require(shell("VIG_CURATE_SEED=17 " + q(bin) + " synth-corpus --records 100000 " + q(dir / "world.json") + " " +
                  q(dir / "corpus.jsonl")) == 0,
            "synth-corpus failed");
  if (!o.pass) return o;
  const auto t_gen = Clock::now();
  o.require(pipeline_run(dir / "a", dir / "world.json", dir / "corpus.jsonl", 1), "run a failed");
  o.require(pipeline_run(dir / "b", dir / "world.json", dir / "corpus.jsonl", 1), "run b failed");
  o.require(pipeline_run(dir / "c", dir / "world.json", dir / "corpus.jsonl", 8), "run c failed");
  if (!o.pass) return o;
  const double per_run = seconds_since(t_gen) / 3.0;
  for (const auto& f : kPipelineFiles) {
    const auto a = testing::read_file(dir / "a" / f);
    const auto b = testing::read_file(dir / "b" / f);
    const auto c = testing::read_file(dir / "c" / f);
    o.require(!a.empty(), f + " is empty");
    o.require(a == b, f + " differs between repeated runs");
    if (f.ends_with(".json") && f.find("manifest") != std::string::npos) {
      o.require(without_jobs(a) == without_jobs(c), f + " differs between --jobs 1 and --jobs 8");
    } else {
      o.require(a == c, f + " differs between --jobs 1 and --jobs 8");
    }
  }
  o.require(per_run < 120.0, fmt::format("pipeline took {:.1f} s", per_run));
  if (o.pass) {
    o.detail = fmt::format("{} files identical, {:.1f} s per pipeline run ({:.1f} s total)", kPipelineFiles.size(),
                           per_run, seconds_since(t0));
  }
  return o;
}

Outcome published_thresholds() {
  Outcome o;
  const auto dir = testing::scratch_dir("acceptance_help");
  o.require(shell(q(VIG_CURATE_BIN) + " --help > " + q(dir / "help.txt") + " 2>&1") == 0, "--help failed");
  const auto help = testing::read_file(dir / "help.txt");
  for (const char* v : {"-0.021", "+0.046", "-0.042"}) o.require(help.find(v) != std::string::npos, fmt::format("{} missing", v));
  o.require(kPublishedThresholds[0].tau == -0.021 && kPublishedThresholds[1].tau == 0.046 &&
                kPublishedThresholds[2].tau == -0.042,
            "reference table values changed");
  if (o.pass) o.detail = "-0.021 / +0.046 / -0.042 in --help";
  return o;
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  const auto corpus = nll_corpus();
  report(1, "perplexity identity", guarded([&] { return perplexity_identity(corpus); }));
  report(2, "token decomposition", guarded([&] { return decomposition(corpus); }));
  report(3, "one-hot KL equivalence", guarded(onehot_equivalence));
  std::pair<Outcome, Outcome> sel;
  try {
    sel = selection_trials();
  } catch (const std::exception& e) {
    sel = {{false, std::string("exception: ") + e.what()}, {false, "not run"}};
  }
  report(4, "selection oracle equivalence and nesting", sel.first);
  report(5, "non-empty masks", sel.second);
  report(6, "accounting arithmetic", guarded(accounting_arithmetic));
  report(7, "synthetic grounding signal", guarded(grounding_signal));
  report(8, "blur correctness", guarded(blur_correctness));
  report(9, "pipeline determinism", guarded(determinism));
  report(10, "reference thresholds in --help", guarded(published_thresholds));
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
