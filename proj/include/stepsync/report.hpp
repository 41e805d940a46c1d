#pragma once

#include <string>
#include <vector>

#include "stepsync/harness.hpp"

namespace stepsync {

enum class ReportFormat { CurveCsv, Svg };

/// Canonical results-file serialization. Key order and number formatting are
/// deterministic, so identical reports produce identical bytes.
std::string results_to_json(const ExperimentReport& report);
ExperimentReport results_from_json(const std::string& text);

/// Per-cell response-curve CSV (offset, mean, sem, n; offsets -4..+6).
std::string curve_csv(const ConditionSummary& summary);

/// Per-cell response-curve plot: mean relative asynchrony with SEM bars, the
/// perturbation marked at offset 0 and a dashed zero reference line.
std::string curve_svg(const ConditionSummary& summary);

/// Write the selected per-cell artifacts into out_dir; returns the paths
/// written. An empty format list writes nothing.
std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& out_dir,
                                     const std::vector<ReportFormat>& formats);

}  // namespace stepsync
