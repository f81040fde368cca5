// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vig/analysis.hpp"
#include "vig/blur.hpp"
#include "vig/core.hpp"
#include "vig/dataset_io.hpp"
#include "vig/pipeline.hpp"
#include "vig/selection.hpp"
#include "vig/synthetic.hpp"

namespace py = pybind11;
using namespace vig;

namespace {

Validation validation_from(const std::string& s) {
  if (s == "strict") return Validation::Strict;
  if (s == "lenient") return Validation::Lenient;
  throw Error(ErrorKind::InvalidConfig, "validation must be 'strict' or 'lenient'");
}

CommonOptions common(const std::string& validation, unsigned jobs) {
  return {validation_from(validation), jobs};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Visual information gain scoring, selection and reports";

  static py::exception<Error> vig_error(m, "VigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = vig_error;
      py::object inst = exc(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      inst.attr("exit_code") = exit_code_for(e.kind());
      PyErr_SetObject(vig_error.ptr(), inst.ptr());
    }
  });

  m.attr("__version__") = std::string(kToolVersion);

  py::class_<VigResult>(m, "VigResult")
      .def_readonly("sample_vig", &VigResult::sample_vig)
      .def_readonly("token_vigs", &VigResult::token_vigs)
      .def("__repr__", [](const VigResult& r) { return "VigResult(sample_vig=" + std::to_string(r.sample_vig) + ")"; });

  m.def("token_vig", py::overload_cast<double, double>(&token_vig), py::arg("nll_without"), py::arg("nll_with"));
  m.def(
      "sample_vig",
      [](const std::vector<double>& without, const std::vector<double>& with) { return sample_vig(without, with); },
      py::arg("nll_without"), py::arg("nll_with"));
  m.def(
      "vig_from_perplexities",
      [](double ppl_without, double ppl_with) { return vig_from_perplexities({ppl_without, ppl_with}); },
      py::arg("ppl_without"), py::arg("ppl_with"));
  m.def(
      "perplexity_from_nlls", [](const std::vector<double>& nlls) { return perplexity_from_nlls(nlls); },
      py::arg("nlls"));
  m.def("kl_onehot_gap", &kl_onehot_gap, py::arg("q_without"), py::arg("q_with"));

  py::enum_<Modality>(m, "Modality")
      .value("MULTIMODAL", Modality::Multimodal)
      .value("TEXT_ONLY", Modality::TextOnly);

  py::class_<ScoredSample>(m, "ScoredSample")
      .def_static(
          "multimodal",
          [](std::string id, std::vector<double> token_vigs, std::string group) {
            ScoredSample s;
            s.sample_id = std::move(id);
            s.group = std::move(group);
            s.token_count = token_vigs.size();
            if (token_vigs.empty()) throw Error(ErrorKind::EmptyAnswer, "token_vigs is empty");
            VigResult r;
            r.sample_vig = stable_mean(token_vigs);
            r.token_vigs = std::move(token_vigs);
            s.vig = std::move(r);
            return s;
          },
          py::arg("sample_id"), py::arg("token_vigs"), py::arg("group") = "")
      .def_static(
          "text_only",
          [](std::string id, std::size_t tokens, std::string group) {
            ScoredSample s;
            s.sample_id = std::move(id);
            s.group = std::move(group);
            s.modality = Modality::TextOnly;
            s.token_count = tokens;
            return s;
          },
          py::arg("sample_id"), py::arg("token_count"), py::arg("group") = "")
      .def_readonly("sample_id", &ScoredSample::sample_id)
      .def_readonly("group", &ScoredSample::group)
      .def_readonly("modality", &ScoredSample::modality)
      .def_readonly("token_count", &ScoredSample::token_count)
      .def_readonly("vig", &ScoredSample::vig);

  py::class_<AccountingStats>(m, "AccountingStats")
      .def_readonly("total_tokens", &AccountingStats::total_tokens)
      .def_readonly("sample_tokens", &AccountingStats::sample_tokens)
      .def_readonly("active_tokens", &AccountingStats::active_tokens)
      .def_readonly("delta_sample_pct", &AccountingStats::delta_sample_pct)
      .def_readonly("delta_active_pct", &AccountingStats::delta_active_pct);

  py::class_<SelectionOutcome>(m, "SelectionOutcome")
      .def_readonly("p_percent", &SelectionOutcome::p_percent)
      .def_readonly("tau_p", &SelectionOutcome::tau_p)
      .def_readonly("selected_ids", &SelectionOutcome::selected_ids)
      .def_readonly("dropped_ids", &SelectionOutcome::dropped_ids)
      .def_readonly("token_masks", &SelectionOutcome::token_masks)
      .def_readonly("accounting", &SelectionOutcome::accounting);

  m.def(
      "select",
      [](const std::vector<ScoredSample>& samples, double p) { return select(samples, SelectionConfig{p}); },
      py::arg("samples"), py::arg("p") = 70.0);
  m.def(
      "rank_samples", [](const std::vector<ScoredSample>& samples) { return rank_samples(samples); },
      py::arg("samples"));
  m.def("top_count", &top_count, py::arg("n"), py::arg("p"));
  m.def("reduction_pct", &reduction_pct, py::arg("retained"), py::arg("total"));
  m.def("format_reduction", &format_reduction, py::arg("reduction_pct"));
  m.def("published_thresholds", [] {
    py::list out;
    for (const auto& t : kPublishedThresholds) out.append(py::make_tuple(std::string(t.model), t.p_percent, t.tau));
    return out;
  });

  py::class_<GroupDistribution>(m, "GroupDistribution")
      .def_readonly("group", &GroupDistribution::group)
      .def_readonly("count", &GroupDistribution::count)
      .def_readonly("mean", &GroupDistribution::mean)
      .def_readonly("median", &GroupDistribution::median)
      .def_readonly("std", &GroupDistribution::std)
      .def_readonly("skewness", &GroupDistribution::skewness)
      .def_readonly("fraction_positive", &GroupDistribution::fraction_positive)
      .def_property_readonly("histogram", [](const GroupDistribution& d) {
        py::list out;
        for (const auto& b : d.histogram) out.append(py::make_tuple(b.left, b.right, b.count));
        return out;
      });
  m.def(
      "summarize_group",
      [](std::string group, std::vector<double> values, std::size_t bins) {
        return summarize_group(std::move(group), std::move(values), bins);
      },
      py::arg("group"), py::arg("values"), py::arg("bins") = 20);

  // Records cross the boundary as JSON lines.
  m.def(
      "normalize_record",
      [](const std::string& line) {
        auto r = parse_record(line, 1);
        if (r.modality == Modality::Multimodal && r.scored()) {
          auto v = r.compute_vig();
          r.sample_vig = v.sample_vig;
          r.token_vigs = std::move(v.token_vigs);
        }
        return serialize_record(r);
      },
      py::arg("line"), "Validate a corpus line and return it with VIG fields attached when scorable.");
  m.def(
      "synthetic_score_record",
      [](const std::string& world_json, const std::string& line) {
        const auto world = SyntheticWorld::from_json(nlohmann::json::parse(world_json));
        return serialize_record(synthetic_score(world, parse_record(line, 1)));
      },
      py::arg("world_json"), py::arg("line"));
  m.def(
      "default_world_json", [](double boost) { return default_world(boost).to_json().dump(); },
      py::arg("boost") = 4.0);

  m.def(
      "gaussian_blur",
      [](std::size_t width, std::size_t height, py::bytes rgb, double scale) {
        const std::string s = rgb;
        PixelImage img{width, height, std::vector<std::uint8_t>(s.begin(), s.end())};
        return to_bytes(gaussian_blur(img, scale).data);
      },
      py::arg("width"), py::arg("height"), py::arg("rgb"), py::arg("scale") = kDefaultBlurScale);
  m.def("blur_sigma", &blur_sigma, py::arg("width"), py::arg("height"), py::arg("scale") = kDefaultBlurScale);

  m.def(
      "run_score",
      [](std::filesystem::path input, std::filesystem::path output,
         std::optional<std::filesystem::path> synthetic_world, const std::string& validation, unsigned jobs) {
        py::gil_scoped_release release;
        const auto s = run_score({input, output, synthetic_world, common(validation, jobs)});
        return std::map<std::string, std::size_t>{{"records", s.records},
                                                  {"multimodal", s.multimodal},
                                                  {"provider_scored", s.provider_scored},
                                                  {"rejected", s.rejected}};
      },
      py::arg("input"), py::arg("output"), py::arg("synthetic_world") = std::nullopt,
      py::arg("validation") = "strict", py::arg("jobs") = 1);
  m.def(
      "run_select",
      [](std::filesystem::path input, std::filesystem::path out_dir, double p, const std::string& validation,
         unsigned jobs) {
        SelectSummary s;
        {
          py::gil_scoped_release release;
          s = run_select({input, out_dir, p, common(validation, jobs)});
        }
        py::dict d;
        d["tau_p"] = s.tau_p;
        d["multimodal"] = s.multimodal;
        d["selected_multimodal"] = s.selected_multimodal;
        d["text_only"] = s.text_only;
        d["accounting"] = s.accounting;
        d["rejected"] = s.rejected;
        return d;
      },
      py::arg("input"), py::arg("out_dir"), py::arg("p") = 70.0, py::arg("validation") = "strict",
      py::arg("jobs") = 1);
  m.def(
      "run_report",
      [](const std::string& kind, std::filesystem::path input, std::filesystem::path out_dir, std::size_t bins,
         std::size_t min_occurrences, std::size_t top_k, double p, const std::string& validation, unsigned jobs) {
        const auto k = report_kind_from_string(kind);
        if (!k) throw Error(ErrorKind::InvalidConfig, "unknown report kind '" + kind + "'");
        py::gil_scoped_release release;
        run_report({input, out_dir, *k, bins, min_occurrences, top_k, p, common(validation, jobs)});
      },
      py::arg("kind"), py::arg("input"), py::arg("out_dir"), py::arg("bins") = 20, py::arg("min_occurrences") = 20,
      py::arg("top_k") = 20, py::arg("p") = 70.0, py::arg("validation") = "strict", py::arg("jobs") = 1);
  m.def(
      "run_blur",
      [](std::filesystem::path input, std::filesystem::path output, double scale) {
        py::gil_scoped_release release;
        run_blur({input, output, scale});
      },
      py::arg("input"), py::arg("output"), py::arg("scale") = kDefaultBlurScale);
}
