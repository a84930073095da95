#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tdcnn/metrics.hpp"
#include "tdcnn/train.hpp"

namespace tdcnn {

// All numbers are printed with 5 decimals so identical inputs give
// byte-identical files.

/// `fold,accuracy,precision,recall,f1`, one row per report (folds numbered
/// from 1), then `mean` and `stddev` rows.
std::string metrics_csv(std::span<const MetricsReport> reports);
void write_metrics_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path);

/// `arch,accuracy,precision,recall,f1`, one row per architecture.
std::string comparison_csv(std::span<const ArchResult> results);
void write_comparison_csv(std::span<const ArchResult> results, const std::filesystem::path& path);

/// `epoch,train_loss,train_accuracy,val_loss,val_accuracy,seconds`.
std::string epoch_log_csv(std::span<const EpochLog> logs);

/// Two line charts (loss, accuracy) over epochs with train and validation
/// series.
std::string curves_svg(std::span<const EpochLog> logs);
void write_curves_svg(std::span<const EpochLog> logs, const std::filesystem::path& path);

void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace tdcnn
