#include <array>

#include "stepsync/simulate.hpp"

namespace stepsync {

namespace {

struct PresetEntry {
  const char* name;
  double gain;
  double timekeeper_sd;
  double motor_sd;
};

// Gains follow the reported direction of effects: multisensory cueing raises
// correction and steadies timing, and fast visual-only stepping barely
// corrects at all. Noise magnitudes are configuration defaults, not fitted
// values.
constexpr std::array<PresetEntry, 4> kPresets{{
    {"AuditoryVisual-Slow", 0.405, 0.015, 0.008},
    {"AuditoryVisual-Fast", 0.42, 0.015, 0.008},
    {"VisualOnly-Slow", 0.265, 0.030, 0.012},
    {"VisualOnly-Fast", 0.05, 0.035, 0.012},
}};

constexpr double kFastTempoCutoff = 0.6;

}  // namespace

PhaseCorrectionParams preset_params(const std::string& name, double tempo_s) {
  std::string resolved = name;
  if (name == "AuditoryVisual" || name == "VisualOnly") {
    resolved = name + (tempo_s < kFastTempoCutoff ? "-Fast" : "-Slow");
  }
  for (const PresetEntry& entry : kPresets) {
    if (resolved == entry.name) {
      PhaseCorrectionParams params;
      params.correction_gain = entry.gain;
      params.timekeeper_mean_s = tempo_s;
      params.timekeeper_sd_s = entry.timekeeper_sd;
      params.motor_mean_s = 0.01;
      params.motor_sd_s = entry.motor_sd;
      return params;
    }
  }
  throw ConfigError("unknown agent preset: " + name);
}

std::vector<std::string> builtin_preset_names() {
  std::vector<std::string> names;
  names.reserve(kPresets.size());
  for (const PresetEntry& entry : kPresets) names.emplace_back(entry.name);
  return names;
}

}  // namespace stepsync
