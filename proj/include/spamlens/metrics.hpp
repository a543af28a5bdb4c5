#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spamlens/corpus.hpp"

namespace spamlens {

// Four-cell confusion matrix with spam as the positive class.
struct ConfusionMatrix {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion(const std::vector<Label>& predictions,
                          const std::vector<Label>& labels);

// Spam-side metrics; a zero denominator yields 0 so degenerate single-class
// evaluations stay reportable.
double precision(const ConfusionMatrix& m);
double recall(const ConfusionMatrix& m);
double f1(const ConfusionMatrix& m);

// Ham-side metrics (positive/negative roles swapped).
double precision_ham(const ConfusionMatrix& m);
double recall_ham(const ConfusionMatrix& m);
double f1_ham(const ConfusionMatrix& m);

double accuracy(const ConfusionMatrix& m);  // errors on an empty matrix

// Round to two decimals (half away from zero), the convention used by the
// report output.
double round2(double value);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  ConfusionMatrix matrix;
  ClassMetrics ham;
  ClassMetrics spam;
  double accuracy = 0.0;
};

MetricsReport metrics_report(const ConfusionMatrix& m);

// JSON with full-precision and 2-decimal rounded fields.
nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace spamlens
