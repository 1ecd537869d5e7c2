#pragma once

#include <string>
#include <vector>

namespace scaffcite::metrics {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::vector<std::string> labels;
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
  std::size_t total = 0;
};

/// Precision/recall/F1 per class plus macro averages and the confusion
/// matrix. Undefined ratios (zero denominators) score 0 and absent classes
/// still enter the macro mean.
ClassificationReport per_class_prf(const std::vector<int>& golds, const std::vector<int>& preds,
                                   const std::vector<std::string>& labels);

double macro_f1(const std::vector<int>& golds, const std::vector<int>& preds,
                const std::vector<std::string>& labels);

std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<int>& golds,
                                                       const std::vector<int>& preds,
                                                       std::size_t num_labels);

/// Console table with scores scaled by 100 at one decimal.
std::string render_report(const ClassificationReport& report);

/// Confusion counts, gold in rows. With mask_diagonal the diagonal renders
/// blank; the counts themselves are untouched.
std::string render_confusion(const ClassificationReport& report, bool mask_diagonal);

std::string report_json(const ClassificationReport& report);

/// Machine-readable attention record and a standalone SVG heatmap of tokens
/// shaded by weight.
std::string attention_record_json(const std::string& instance_id,
                                  const std::vector<std::string>& tokens,
                                  const std::vector<double>& weights, const std::string& predicted,
                                  const std::string& gold);
std::string attention_svg(const std::vector<std::string>& tokens,
                          const std::vector<double>& weights, const std::string& predicted,
                          const std::string& gold);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev, n-1 denominator; 0 for a single run
};

struct RunAggregate {
  std::vector<std::string> labels;
  MetricStats macro_precision, macro_recall, macro_f1;
  std::vector<MetricStats> per_class_f1;
  std::size_t runs = 0;
};

/// Mean and spread of the metrics across seeds; label sets must agree.
RunAggregate aggregate_runs(const std::vector<ClassificationReport>& reports);

}  // namespace scaffcite::metrics
