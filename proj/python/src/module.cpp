#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smudge/error.hpp"
#include "smudge/ingest.hpp"
#include "smudge/report.hpp"
#include "smudge/scoring.hpp"
#include "smudge/similarity.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

smudge::ScoreConfig config_of(const std::string& config_json) {
  if (config_json.empty()) return {};
  return smudge::config_from_json(json::parse(config_json));
}

std::string score_sample_json(const std::string& sample_json, std::optional<std::string> prediction,
                              const std::string& ocr_json, const std::string& config_json) {
  const auto cfg = config_of(config_json);
  json gt = {{"samples", json::array({json::parse(sample_json)})}};
  const auto sample = smudge::parse_ground_truth(gt).samples.at(0);
  const auto layout = smudge::parse_ocr(json::parse(ocr_json));
  std::optional<smudge::Prediction> pred;
  if (prediction) pred = smudge::Prediction{sample.qid, *prediction, {}};
  const auto scored = smudge::score_sample(sample, pred ? &*pred : nullptr, layout, cfg);
  return smudge::sample_to_json(scored).dump();
}

std::string score_dataset_json(const std::string& gt_path, const std::string& ocr_dir,
                               const std::string& pred_path, const std::string& config_json,
                               unsigned threads) {
  const auto cfg = config_of(config_json);
  const auto bundle = smudge::load_bundle(gt_path, ocr_dir);
  auto run = smudge::load_predictions(pred_path);
  if (run.model.empty()) run.model = std::filesystem::path(pred_path).stem().string();
  py::gil_scoped_release release;
  return smudge::report_document(
      smudge::score_dataset(bundle, run, cfg, smudge::resolve_thread_count(threads)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "grounding-aware document VQA scoring";

  py::register_exception<smudge::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<smudge::ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("nls", [](const std::string& a, const std::string& b) { return smudge::nls(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("anls",
        [](const std::string& a, const std::string& b, double threshold) {
          return smudge::anls_flattened(a, b, threshold);
        },
        py::arg("a"), py::arg("b"), py::arg("threshold") = 0.5);
  m.def("classify_answer_type",
        [](const std::string& s) { return std::string(smudge::to_string(smudge::classify_answer_type(s))); });
  m.def("composite", &smudge::composite, py::arg("m"), py::arg("g"), py::arg("alpha") = 0.25);
  m.def("decay", [](double d) { return static_cast<double>(smudge::decay(d)); });
  m.def("_score_sample", &score_sample_json, py::arg("sample"), py::arg("prediction"),
        py::arg("ocr"), py::arg("config") = "");
  m.def("_score_dataset", &score_dataset_json, py::arg("gt_path"), py::arg("ocr_dir"),
        py::arg("pred_path"), py::arg("config") = "", py::arg("threads") = 0);
}
