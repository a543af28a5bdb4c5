#include "spamlens/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

double ratio(long num, long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

ConfusionMatrix confusion(const std::vector<Label>& predictions,
                          const std::vector<Label>& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("confusion: prediction/label length mismatch");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual_spam = labels[i] == Label::spam;
    const bool predicted_spam = predictions[i] == Label::spam;
    if (actual_spam && predicted_spam) ++m.tp;
    else if (!actual_spam && !predicted_spam) ++m.tn;
    else if (!actual_spam && predicted_spam) ++m.fp;
    else ++m.fn;
  }
  return m;
}

double precision(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fp); }
double recall(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fn); }
double f1(const ConfusionMatrix& m) { return harmonic(precision(m), recall(m)); }

double precision_ham(const ConfusionMatrix& m) { return ratio(m.tn, m.tn + m.fn); }
double recall_ham(const ConfusionMatrix& m) { return ratio(m.tn, m.tn + m.fp); }
double f1_ham(const ConfusionMatrix& m) {
  return harmonic(precision_ham(m), recall_ham(m));
}

double accuracy(const ConfusionMatrix& m) {
  if (m.total() == 0) throw DataError("accuracy: empty confusion matrix");
  return static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

MetricsReport metrics_report(const ConfusionMatrix& m) {
  MetricsReport report;
  report.matrix = m;
  report.spam = {precision(m), recall(m), f1(m)};
  report.ham = {precision_ham(m), recall_ham(m), f1_ham(m)};
  report.accuracy = accuracy(m);
  return report;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::json{
        {"precision", c.precision},
        {"recall", c.recall},
        {"f1", c.f1},
        {"rounded",
         {{"precision", round2(c.precision)},
          {"recall", round2(c.recall)},
          {"f1", round2(c.f1)}}},
    };
  };
  return nlohmann::json{
      {"matrix",
       {{"tp", report.matrix.tp},
        {"tn", report.matrix.tn},
        {"fp", report.matrix.fp},
        {"fn", report.matrix.fn}}},
      {"accuracy", report.accuracy},
      {"accuracy_pct_rounded", std::round(report.accuracy * 10000.0) / 100.0},
      {"per_class", {{"ham", cls(report.ham)}, {"spam", cls(report.spam)}}},
  };
}

}  // namespace spamlens
