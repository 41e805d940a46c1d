#pragma once

#include <optional>

#include "stepsync/simulate.hpp"
#include "stepsync/types.hpp"

namespace stepsync {

/// Threshold-crossing step detector settings. Leaving threshold_height_m
/// unset selects an automatic threshold of 20% of the median bump peak
/// estimated from the trace. Hysteresis requires the signal to drop below
/// threshold * (1 - hysteresis_fraction) before the detector re-arms; the
/// refractory window suppresses crossings too close to the previous onset.
struct DetectorConfig {
  std::optional<double> threshold_height_m;
  double hysteresis_fraction = 0.25;
  double refractory_s = 0.15;
  bool interpolate = true;

  /// Refractory tuned to a known step tempo.
  static DetectorConfig for_nominal_isi(double nominal_isi_s) {
    DetectorConfig config;
    config.refractory_s = 0.4 * nominal_isi_s;
    return config;
  }

  void validate() const;
};

/// Resolved threshold for a trace: the explicit setting, or the automatic
/// estimate when unset.
double resolve_threshold(const MarkerTrace& trace, const DetectorConfig& config);

/// Extract step onsets from a heel-height trace, one per upward threshold
/// crossing per foot. The onset time is the linear interpolation between the
/// samples straddling the threshold; with interpolation off it is snapped to
/// the nearest sample timestamp. Feet are merged into one time-ordered
/// stream. Throws MalformedTrace for non-monotone timestamps.
OnsetSeries detect_onsets(const MarkerTrace& trace, const DetectorConfig& config,
                          SourceTag source = SourceTag::Participant);

}  // namespace stepsync
