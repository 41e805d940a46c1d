#include "stepsync/detect.hpp"

#include <algorithm>
#include <cmath>

namespace stepsync {

void DetectorConfig::validate() const {
  if (threshold_height_m && !(*threshold_height_m > 0.0)) {
    throw ValidationError("detector threshold must be positive");
  }
  if (!(hysteresis_fraction >= 0.0 && hysteresis_fraction < 1.0)) {
    throw ValidationError("hysteresis fraction must lie in [0, 1)");
  }
  if (refractory_s < 0.0) throw ValidationError("refractory must be non-negative");
}

namespace {

// Median of local maxima at bump scale (>= half the global maximum). Returns
// 0 for a flat or non-positive trace.
double median_peak_height(const MarkerTrace& trace) {
  std::vector<double> peaks;
  for (const auto* channel : {&trace.left_height_m, &trace.right_height_m}) {
    const auto& h = *channel;
    if (h.size() < 3) continue;
    const double global_max = *std::max_element(h.begin(), h.end());
    if (!(global_max > 0.0)) continue;
    for (std::size_t i = 1; i + 1 < h.size(); ++i) {
      if (h[i] >= h[i - 1] && h[i] > h[i + 1] && h[i] >= 0.5 * global_max) {
        peaks.push_back(h[i]);
      }
    }
  }
  if (peaks.empty()) return 0.0;
  const auto mid = peaks.begin() + static_cast<std::ptrdiff_t>(peaks.size() / 2);
  std::nth_element(peaks.begin(), mid, peaks.end());
  return *mid;
}

void detect_channel(const std::vector<double>& t, const std::vector<double>& h, double threshold,
                    const DetectorConfig& config, Foot foot, std::vector<Onset>& out) {
  if (h.empty()) return;

  const double rearm_level = threshold * (1.0 - config.hysteresis_fraction);
  // A signal already at/above threshold at the start belongs to a bump whose
  // rise was not recorded; stay disarmed until it clears.
  bool armed = h.front() < threshold;
  double last_onset = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 1; i < h.size(); ++i) {
    if (armed && h[i - 1] < threshold && h[i] >= threshold) {
      double crossing = t[i];
      const double rise = h[i] - h[i - 1];
      if (rise > 0.0) {
        crossing = t[i - 1] + (threshold - h[i - 1]) / rise * (t[i] - t[i - 1]);
      }
      if (!config.interpolate) {
        // Snap to the nearer of the two straddling samples.
        crossing = crossing - t[i - 1] <= t[i] - crossing ? t[i - 1] : t[i];
      }
      if (crossing - last_onset >= config.refractory_s) {
        out.push_back({crossing, foot});
        last_onset = crossing;
      }
      armed = false;
    } else if (!armed && h[i] < rearm_level) {
      armed = true;
    }
  }
}

}  // namespace

double resolve_threshold(const MarkerTrace& trace, const DetectorConfig& config) {
  if (config.threshold_height_m) return *config.threshold_height_m;
  return 0.2 * median_peak_height(trace);
}

OnsetSeries detect_onsets(const MarkerTrace& trace, const DetectorConfig& config,
                          SourceTag source) {
  config.validate();
  if (!(trace.sample_rate_hz > 0.0)) throw MalformedTrace("sample rate must be positive");
  if (trace.timestamps_s.empty()) throw MalformedTrace("trace is empty");
  if (trace.left_height_m.size() != trace.timestamps_s.size() ||
      trace.right_height_m.size() != trace.timestamps_s.size()) {
    throw MalformedTrace("channel lengths differ from the timestamp vector");
  }
  for (std::size_t i = 1; i < trace.timestamps_s.size(); ++i) {
    if (!(trace.timestamps_s[i] > trace.timestamps_s[i - 1])) {
      throw MalformedTrace("trace timestamps must be strictly increasing");
    }
  }

  const double threshold = resolve_threshold(trace, config);
  std::vector<Onset> onsets;
  if (threshold > 0.0) {
    detect_channel(trace.timestamps_s, trace.left_height_m, threshold, config, Foot::Left, onsets);
    detect_channel(trace.timestamps_s, trace.right_height_m, threshold, config, Foot::Right,
                   onsets);
    std::sort(onsets.begin(), onsets.end(),
              [](const Onset& a, const Onset& b) { return a.time_s < b.time_s; });
  }
  return OnsetSeries(std::move(onsets), source);
}

}  // namespace stepsync
