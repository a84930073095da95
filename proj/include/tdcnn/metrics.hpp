#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tdcnn {

/// Binary confusion counts with "tumor" (label 1) as the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  void add(int truth, int predicted) noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_from_predictions(std::span<const int> truth, std::span<const int> predicted);

/// Accuracy (TP+TN)/total, precision TP/(TP+FP), recall TP/(TP+FN),
/// F1 2PR/(P+R). A zero denominator yields 0 and sets the matching flag.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix cm;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

/// Rejects an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (k − 1) standard deviation, 0 for k = 1
};

struct MetricsSummary {
  MetricStats accuracy, precision, recall, f1;
};

MetricsSummary summarize(std::span<const MetricsReport> reports);

}  // namespace tdcnn
