#include "tdcnn/reports.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

namespace tdcnn {

namespace {

std::string metric_row(const std::string& key, double a, double p, double r, double f1) {
  return fmt::format("{},{:.5f},{:.5f},{:.5f},{:.5f}\n", key, a, p, r, f1);
}

// One polyline chart inside a 360×240 panel whose top-left corner is at x0.
void chart(std::string& svg, double x0, const std::string& title, std::span<const EpochLog> logs,
           double EpochLog::*train, double EpochLog::*val) {
  constexpr double w = 360, h = 240, pad = 40;
  double lo = 0.0, hi = 1e-12;
  for (const auto& l : logs) {
    hi = std::max({hi, l.*train, l.has_validation ? l.*val : 0.0});
  }
  const double span = std::max<double>(1.0, static_cast<double>(logs.size() - 1));
  auto px = [&](std::size_t i) { return x0 + pad + (w - 2 * pad) * static_cast<double>(i) / span; };
  auto py = [&](double v) { return h - pad - (h - 2 * pad) * (v - lo) / (hi - lo); };

  svg += fmt::format("<g><rect x=\"{:.2f}\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\" stroke=\"#999\"/>\n",
                     x0, w, h);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n", x0 + w / 2, title);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">{:.5f}</text>\n", x0 + 2, pad - 4, hi);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">epoch</text>\n", x0 + w / 2, h - 8);
  auto series = [&](double EpochLog::*field, const char* color, const char* name, bool need_val) {
    std::string pts;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      if (need_val && !logs[i].has_validation) continue;
      pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", px(i), py(logs[i].*field));
    }
    if (pts.empty()) return;
    svg += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", name,
                       color, pts);
  };
  series(train, "#1f77b4", "train", false);
  series(val, "#ff7f0e", "validation", true);
  svg += "</g>\n";
}

}  // namespace

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw DataError("failed writing " + path.string());
}

std::string metrics_csv(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidArgument("no metrics reports to write");
  std::string out = "fold,accuracy,precision,recall,f1\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += metric_row(std::to_string(i + 1), r.accuracy, r.precision, r.recall, r.f1);
  }
  const auto s = summarize(reports);
  out += metric_row("mean", s.accuracy.mean, s.precision.mean, s.recall.mean, s.f1.mean);
  out += metric_row("stddev", s.accuracy.stddev, s.precision.stddev, s.recall.stddev, s.f1.stddev);
  return out;
}

void write_metrics_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  write_text(metrics_csv(reports), path);
}

std::string comparison_csv(std::span<const ArchResult> results) {
  if (results.empty()) throw InvalidArgument("no architecture results to write");
  std::string out = "arch,accuracy,precision,recall,f1\n";
  for (const auto& r : results) {
    out += metric_row(arch_label(r.arch), r.report.accuracy, r.report.precision, r.report.recall, r.report.f1);
  }
  return out;
}

void write_comparison_csv(std::span<const ArchResult> results, const std::filesystem::path& path) {
  write_text(comparison_csv(results), path);
}

std::string epoch_log_csv(std::span<const EpochLog> logs) {
  std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy,seconds\n";
  for (const auto& l : logs) {
    out += fmt::format("{},{:.5f},{:.5f},{},{},{:.3f}\n", l.epoch, l.train_loss, l.train_accuracy,
                       l.has_validation ? fmt::format("{:.5f}", l.val_loss) : "",
                       l.has_validation ? fmt::format("{:.5f}", l.val_accuracy) : "", l.seconds);
  }
  return out;
}

std::string curves_svg(std::span<const EpochLog> logs) {
  if (logs.empty()) throw InvalidArgument("no epoch logs to plot");
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"740\" height=\"260\" viewBox=\"0 0 740 260\">\n";
  chart(svg, 0, "loss", logs, &EpochLog::train_loss, &EpochLog::val_loss);
  chart(svg, 380, "accuracy", logs, &EpochLog::train_accuracy, &EpochLog::val_accuracy);
  svg += "<text x=\"10\" y=\"255\" font-size=\"11\" fill=\"#1f77b4\">train</text>\n";
  svg += "<text x=\"60\" y=\"255\" font-size=\"11\" fill=\"#ff7f0e\">validation</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_curves_svg(std::span<const EpochLog> logs, const std::filesystem::path& path) {
  write_text(curves_svg(logs), path);
}

}  // namespace tdcnn
