#include "tdcnn/metrics.hpp"

#include <cmath>

#include "tdcnn/error.hpp"

namespace tdcnn {

void ConfusionMatrix::add(int truth, int predicted) noexcept {
  if (truth == 1) {
    predicted == 1 ? ++tp : ++fn;
  } else {
    predicted == 1 ? ++fp : ++tn;
  }
}

ConfusionMatrix confusion_from_predictions(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("confusion matrix: " + std::to_string(truth.size()) + " labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("metrics of an empty confusion matrix");
  MetricsReport r;
  r.cm = cm;
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  r.accuracy = d(cm.tp + cm.tn) / d(cm.total());
  if (cm.tp + cm.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = d(cm.tp) / d(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = d(cm.tp) / d(cm.tp + cm.fn);
  }
  if (r.precision + r.recall == 0.0) {
    r.f1_undefined = true;
  } else {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

MetricsSummary summarize(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidArgument("cannot summarize zero reports");
  auto stats = [&](double MetricsReport::*field) {
    const double k = static_cast<double>(reports.size());
    double sum = 0.0;
    for (const auto& r : reports) sum += r.*field;
    MetricStats s;
    s.mean = sum / k;
    if (reports.size() > 1) {
      double ss = 0.0;
      for (const auto& r : reports) ss += (r.*field - s.mean) * (r.*field - s.mean);
      s.stddev = std::sqrt(ss / (k - 1.0));
    }
    return s;
  };
  return {stats(&MetricsReport::accuracy), stats(&MetricsReport::precision), stats(&MetricsReport::recall),
          stats(&MetricsReport::f1)};
}

}  // namespace tdcnn
