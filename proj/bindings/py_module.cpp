#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "scaffcite/checkpoint.hpp"
#include "scaffcite/data.hpp"
#include "scaffcite/errors.hpp"
#include "scaffcite/gradcheck_suite.hpp"
#include "scaffcite/metrics.hpp"
#include "scaffcite/model.hpp"
#include "scaffcite/scaffold_gen.hpp"

namespace py = pybind11;
using namespace scaffcite;

namespace {

std::vector<int> to_indices(const std::vector<std::string>& values,
                            const std::vector<std::string>& labels, const char* what) {
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    auto it = std::find(labels.begin(), labels.end(), v);
    if (it == labels.end()) {
      throw ContractError(std::string(what) + " label '" + v + "' is not in the label set");
    }
    out.push_back(static_cast<int>(it - labels.begin()));
  }
  return out;
}

py::dict report_to_dict(const metrics::ClassificationReport& report) {
  py::dict out;
  out["labels"] = report.labels;
  py::dict macro;
  macro["precision"] = report.macro_precision;
  macro["recall"] = report.macro_recall;
  macro["f1"] = report.macro_f1;
  out["macro"] = macro;
  py::list per_class;
  for (std::size_t c = 0; c < report.labels.size(); ++c) {
    py::dict scores;
    scores["label"] = report.labels[c];
    scores["precision"] = report.per_class[c].precision;
    scores["recall"] = report.per_class[c].recall;
    scores["f1"] = report.per_class[c].f1;
    scores["support"] = report.per_class[c].support;
    per_class.append(scores);
  }
  out["per_class"] = per_class;
  out["confusion"] = report.confusion;
  out["total"] = report.total;
  return out;
}

/// Checkpoint-backed classifier exposed to python.
class Model {
 public:
  explicit Model(const std::string& checkpoint_path)
      : checkpoint_(nn::load_checkpoint(checkpoint_path)) {}

  std::vector<std::string> labels() const { return checkpoint_.params.tasks[0].labels; }

  py::dict predict(const std::string& text) const {
    const std::vector<std::string> tokens = data::tokenize(text);
    const std::vector<int> ids = checkpoint_.vocab.encode(tokens);
    nn::Prediction pred = nn::predict(ids, checkpoint_.params);
    py::dict out;
    out["label"] = pred.label;
    py::dict probabilities;
    for (std::size_t c = 0; c < pred.probabilities.size(); ++c) {
      probabilities[py::str(checkpoint_.params.tasks[0].labels[c])] = pred.probabilities[c];
    }
    out["probabilities"] = probabilities;
    py::list attention;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      attention.append(py::make_tuple(tokens[i], pred.attention[i]));
    }
    out["attention"] = attention;
    return out;
  }

 private:
  nn::Checkpoint checkpoint_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "core operations of the scaffcite citation-intent toolkit";

  py::register_exception<Error>(m, "ScaffciteError");

  m.def("tokenize", &data::tokenize, py::arg("text"),
        "Lowercase and split text, keeping bracketed citation markers whole.");

  m.def(
      "detect_citation_markers",
      [](const std::string& sentence) {
        py::list out;
        for (const auto& span : scaffolds::detect_citation_markers(sentence)) {
          py::dict d;
          d["begin"] = span.begin;
          d["end"] = span.end;
          d["kind"] =
              span.kind == scaffolds::MarkerKind::numeric_bracket ? "numeric_bracket" : "name_year";
          d["text"] = sentence.substr(span.begin, span.end - span.begin);
          out.append(d);
        }
        return out;
      },
      py::arg("sentence"), "Citation marker spans, sorted and non-overlapping.");

  m.def("strip_citation_markers", &scaffolds::strip_markers, py::arg("sentence"),
        "Sentence with citation markers removed and whitespace tidied.");

  m.def(
      "normalize_section_title",
      [](const std::string& raw) -> std::optional<std::string> {
        auto category = scaffolds::normalize_section_title(raw);
        if (!category) return std::nullopt;
        return std::string(scaffolds::to_string(*category));
      },
      py::arg("raw"), "One of the five normalized section titles, or None.");

  m.def(
      "qualify_annotator",
      [](const std::map<std::string, std::string>& gold,
         const std::map<std::string, std::string>& responses) {
        scaffolds::Qualification q = scaffolds::qualify_annotator(gold, responses);
        return py::make_tuple(q.qualified, q.trust);
      },
      py::arg("gold_answers"), py::arg("responses"),
      "(qualified, trust): trust is the accuracy on the gold questions.");

  m.def(
      "aggregate_annotations",
      [](const std::vector<std::tuple<std::string, std::string, double>>& annotations,
         const std::string& other_label) -> std::optional<std::pair<std::string, double>> {
        std::vector<scaffolds::Annotation> converted;
        for (const auto& [worker, choice, trust] : annotations) {
          converted.push_back({worker, "", choice, trust});
        }
        auto result = scaffolds::aggregate_annotations(converted, other_label);
        if (!result) return std::nullopt;
        return std::make_pair(result->label, result->confidence);
      },
      py::arg("annotations"), py::arg("other_label") = "Other",
      "Trust-weighted plurality vote; None when the instance is discarded.");

  m.def(
      "macro_f1",
      [](const std::vector<std::string>& golds, const std::vector<std::string>& preds,
         const std::vector<std::string>& labels) {
        return metrics::macro_f1(to_indices(golds, labels, "gold"),
                                 to_indices(preds, labels, "predicted"), labels);
      },
      py::arg("golds"), py::arg("preds"), py::arg("labels"));

  m.def(
      "classification_report",
      [](const std::vector<std::string>& golds, const std::vector<std::string>& preds,
         const std::vector<std::string>& labels) {
        return report_to_dict(metrics::per_class_prf(to_indices(golds, labels, "gold"),
                                                     to_indices(preds, labels, "predicted"),
                                                     labels));
      },
      py::arg("golds"), py::arg("preds"), py::arg("labels"));

  m.def(
      "gradcheck",
      [](const std::string& scope) {
        py::dict out;
        for (const auto& r : gradcheck::check_scope(scope)) {
          out[py::str(r.name)] = r.max_rel_error;
        }
        return out;
      },
      py::arg("scope") = "all",
      "Max relative finite-difference error per component (ops|layers|model|all).");

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
      .def_property_readonly("labels", &Model::labels)
      .def("predict", &Model::predict, py::arg("text"),
           "dict with the predicted label, class probabilities, and per-token "
           "attention weights");
}
