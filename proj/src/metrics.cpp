#include "scaffcite/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "scaffcite/errors.hpp"

namespace scaffcite::metrics {

using nlohmann::json;

namespace {

void check_inputs(const std::vector<int>& golds, const std::vector<int>& preds,
                  std::size_t num_labels) {
  if (golds.size() != preds.size()) {
    throw ContractError("metrics: " + std::to_string(golds.size()) + " gold labels vs " +
                        std::to_string(preds.size()) + " predictions");
  }
  if (golds.empty()) throw ContractError("metrics: empty evaluation set");
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] < 0 || static_cast<std::size_t>(golds[i]) >= num_labels || preds[i] < 0 ||
        static_cast<std::size_t>(preds[i]) >= num_labels) {
      throw ContractError("metrics: label index outside the declared label set at position " +
                          std::to_string(i));
    }
  }
}

std::string fixed1(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << v;
  return out.str();
}

}  // namespace

std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<int>& golds,
                                                       const std::vector<int>& preds,
                                                       std::size_t num_labels) {
  check_inputs(golds, preds, num_labels);
  std::vector<std::vector<std::size_t>> counts(num_labels,
                                               std::vector<std::size_t>(num_labels, 0));
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++counts[static_cast<std::size_t>(golds[i])][static_cast<std::size_t>(preds[i])];
  }
  return counts;
}

ClassificationReport per_class_prf(const std::vector<int>& golds, const std::vector<int>& preds,
                                   const std::vector<std::string>& labels) {
  const std::size_t k = labels.size();
  ClassificationReport report;
  report.labels = labels;
  report.confusion = confusion_matrix(golds, preds, k);
  report.total = golds.size();
  report.per_class.resize(k);

  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t fp = 0, fn = 0;
    for (std::size_t other = 0; other < k; ++other) {
      if (other == c) continue;
      fp += report.confusion[other][c];
      fn += report.confusion[c][other];
    }
    ClassScores& s = report.per_class[c];
    s.support = tp + fn;
    s.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    s.f1 = (s.precision + s.recall) == 0.0 ? 0.0
                                           : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    report.macro_precision += s.precision;
    report.macro_recall += s.recall;
    report.macro_f1 += s.f1;
  }
  report.macro_precision /= static_cast<double>(k);
  report.macro_recall /= static_cast<double>(k);
  report.macro_f1 /= static_cast<double>(k);
  return report;
}

double macro_f1(const std::vector<int>& golds, const std::vector<int>& preds,
                const std::vector<std::string>& labels) {
  return per_class_prf(golds, preds, labels).macro_f1;
}

std::string render_report(const ClassificationReport& report) {
  std::size_t width = 8;
  for (const auto& label : report.labels) width = std::max(width, label.size() + 2);
  std::ostringstream out;
  out << std::string(width, ' ') << "      P      R     F1   support\n";
  for (std::size_t c = 0; c < report.labels.size(); ++c) {
    const ClassScores& s = report.per_class[c];
    out << report.labels[c] << std::string(width - report.labels[c].size(), ' ');
    for (double v : {s.precision, s.recall, s.f1}) {
      std::string cell = fixed1(v * 100.0);
      out << std::string(7 - cell.size(), ' ') << cell;
    }
    std::string sup = std::to_string(s.support);
    out << std::string(10 - sup.size(), ' ') << sup << "\n";
  }
  out << "macro" << std::string(width - 5, ' ');
  for (double v : {report.macro_precision, report.macro_recall, report.macro_f1}) {
    std::string cell = fixed1(v * 100.0);
    out << std::string(7 - cell.size(), ' ') << cell;
  }
  std::string total = std::to_string(report.total);
  out << std::string(10 - total.size(), ' ') << total << "\n";
  return out.str();
}

std::string render_confusion(const ClassificationReport& report, bool mask_diagonal) {
  std::size_t width = 6;
  for (const auto& label : report.labels) width = std::max(width, label.size() + 2);
  std::ostringstream out;
  out << "rows = gold, columns = predicted";
  if (mask_diagonal) out << " (diagonal masked)";
  out << "\n" << std::string(width, ' ');
  for (const auto& label : report.labels) {
    out << std::string(width - label.size(), ' ') << label;
  }
  out << "\n";
  for (std::size_t g = 0; g < report.labels.size(); ++g) {
    out << report.labels[g] << std::string(width - report.labels[g].size(), ' ');
    for (std::size_t p = 0; p < report.labels.size(); ++p) {
      std::string cell =
          (mask_diagonal && g == p) ? "." : std::to_string(report.confusion[g][p]);
      out << std::string(width - cell.size(), ' ') << cell;
    }
    out << "\n";
  }
  return out.str();
}

std::string report_json(const ClassificationReport& report) {
  json out;
  out["labels"] = report.labels;
  out["macro"] = {{"precision", report.macro_precision},
                  {"recall", report.macro_recall},
                  {"f1", report.macro_f1}};
  out["total"] = report.total;
  out["per_class"] = json::array();
  for (std::size_t c = 0; c < report.labels.size(); ++c) {
    const ClassScores& s = report.per_class[c];
    out["per_class"].push_back({{"label", report.labels[c]},
                                {"precision", s.precision},
                                {"recall", s.recall},
                                {"f1", s.f1},
                                {"support", s.support}});
  }
  out["confusion"] = report.confusion;
  return out.dump(2);
}

std::string attention_record_json(const std::string& instance_id,
                                  const std::vector<std::string>& tokens,
                                  const std::vector<double>& weights, const std::string& predicted,
                                  const std::string& gold) {
  if (tokens.size() != weights.size()) {
    throw ContractError("attention record: " + std::to_string(tokens.size()) + " tokens vs " +
                        std::to_string(weights.size()) + " weights");
  }
  json out{{"id", instance_id},
           {"tokens", tokens},
           {"weights", weights},
           {"predicted", predicted},
           {"gold", gold}};
  return out.dump();
}

std::string attention_svg(const std::vector<std::string>& tokens,
                          const std::vector<double>& weights, const std::string& predicted,
                          const std::string& gold) {
  if (tokens.size() != weights.size()) {
    throw ContractError("attention heatmap: " + std::to_string(tokens.size()) + " tokens vs " +
                        std::to_string(weights.size()) + " weights");
  }
  double max_weight = 0.0;
  for (double w : weights) max_weight = std::max(max_weight, w);
  if (max_weight <= 0.0) max_weight = 1.0;

  const int char_width = 9, pad = 6, box_height = 34, label_height = 22;
  std::ostringstream body;
  int x = pad;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int w = static_cast<int>(tokens[i].size()) * char_width + 2 * pad;
    const double intensity = weights[i] / max_weight;
    const int whiteness = static_cast<int>(255.0 * (1.0 - intensity));
    std::string escaped;
    for (char c : tokens[i]) {
      switch (c) {
        case '&': escaped += "&amp;"; break;
        case '<': escaped += "&lt;"; break;
        case '>': escaped += "&gt;"; break;
        default: escaped += c;
      }
    }
    body << "  <rect x=\"" << x << "\" y=\"" << label_height + 4 << "\" width=\"" << w
         << "\" height=\"" << box_height << "\" fill=\"rgb(255," << whiteness << ","
         << whiteness << ")\" stroke=\"#999\"/>\n";
    body << "  <text x=\"" << x + w / 2 << "\" y=\"" << label_height + 4 + box_height / 2 + 4
         << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">" << escaped
         << "</text>\n";
    x += w + 2;
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << x + pad << "\" height=\""
      << label_height + box_height + 2 * pad + 8 << "\">\n";
  out << "  <text x=\"" << pad << "\" y=\"" << label_height - 6
      << "\" font-family=\"monospace\" font-size=\"13\">predicted: " << predicted
      << "  gold: " << gold << "</text>\n";
  out << body.str();
  out << "</svg>\n";
  return out.str();
}

RunAggregate aggregate_runs(const std::vector<ClassificationReport>& reports) {
  if (reports.empty()) throw ContractError("aggregate_runs: no reports");
  for (const auto& report : reports) {
    if (report.labels != reports[0].labels) {
      throw ContractError("aggregate_runs: reports use different label sets");
    }
  }
  const auto stats = [&](const std::function<double(const ClassificationReport&)>& pick) {
    MetricStats s;
    for (const auto& report : reports) s.mean += pick(report);
    s.mean /= static_cast<double>(reports.size());
    if (reports.size() > 1) {
      double acc = 0.0;
      for (const auto& report : reports) {
        const double d = pick(report) - s.mean;
        acc += d * d;
      }
      s.stddev = std::sqrt(acc / static_cast<double>(reports.size() - 1));
    }
    return s;
  };

  RunAggregate agg;
  agg.labels = reports[0].labels;
  agg.runs = reports.size();
  agg.macro_precision = stats([](const auto& r) { return r.macro_precision; });
  agg.macro_recall = stats([](const auto& r) { return r.macro_recall; });
  agg.macro_f1 = stats([](const auto& r) { return r.macro_f1; });
  for (std::size_t c = 0; c < agg.labels.size(); ++c) {
    agg.per_class_f1.push_back(stats([c](const auto& r) { return r.per_class[c].f1; }));
  }
  return agg;
}

}  // namespace scaffcite::metrics
