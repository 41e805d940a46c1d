#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stepsync/errors.hpp"

namespace stepsync {

enum class Foot : std::uint8_t { Left, Right };
enum class SourceTag : std::uint8_t { Participant, Cue };

std::string to_string(Foot foot);
std::string to_string(SourceTag source);

struct Onset {
  double time_s = 0.0;
  Foot foot = Foot::Left;
};

/// Ordered step-onset times for one agent (participant or cue stream).
/// Times are strictly increasing; feet normally alternate but alternation is
/// not enforced (detection on real data may skip steps).
class OnsetSeries {
 public:
  OnsetSeries() = default;
  OnsetSeries(std::vector<Onset> onsets, SourceTag source);

  const std::vector<Onset>& onsets() const { return onsets_; }
  SourceTag source() const { return source_; }
  std::size_t size() const { return onsets_.size(); }
  bool empty() const { return onsets_.empty(); }
  double time(std::size_t i) const { return onsets_[i].time_s; }
  std::vector<double> times() const;

 private:
  std::vector<Onset> onsets_;
  SourceTag source_ = SourceTag::Participant;
};

/// Intervals between consecutive onsets of one agent. intervals[k] spans
/// onsets k -> k+1, so there is one fewer interval than onsets.
struct ISISeries {
  std::vector<double> intervals_s;
  SourceTag source = SourceTag::Participant;
};

/// One-time shortening or lengthening of a single cue interval.
struct PerturbationSpec {
  enum class Direction : std::uint8_t { Negative, Positive };

  Direction direction = Direction::Negative;
  double magnitude = 0.15;  // fraction of the interval
  int window_lo = 10;       // inclusive interval-index range for placement
  int window_hi = 16;

  /// Signed interval scale factor: (1 - m) for Negative, (1 + m) for Positive.
  double scale() const {
    return direction == Direction::Negative ? 1.0 - magnitude : 1.0 + magnitude;
  }

  /// Throws InvalidWindow / ValidationError if the spec cannot be applied to a
  /// schedule of n_steps onsets (the window must leave room for a +6 step
  /// response tail).
  void validate(int n_steps) const;
};

std::string to_string(PerturbationSpec::Direction direction);

/// A realized cue schedule: onset times, realized intervals, and the
/// perturbation record. perturbed_index is the index of the modified
/// interval, i.e. the interval from onset perturbed_index to the next one.
struct CueSchedule {
  double nominal_isi_s = 0.0;
  int n_steps = 0;
  OnsetSeries onsets;
  ISISeries intervals;
  PerturbationSpec perturbation;
  int perturbed_index = 0;
};

/// A matched participant/cue onset pair. asynchrony_s is participant onset
/// time minus cue onset time: positive when the participant lags the cue.
struct AsynchronyPair {
  int participant_index = 0;
  int cue_index = 0;
  double asynchrony_s = 0.0;
};

/// Matched onset pairs plus the source onset times they refer to. Pairs are
/// ordered by cue index. gaps lists cue indices left without a participant
/// match; continuity_breaks lists positions in `pairs` where the unwrapping
/// pass could not maintain continuity and restarted (rare, pathological data).
struct AsynchronySeries {
  std::vector<AsynchronyPair> pairs;
  std::vector<double> participant_times_s;
  std::vector<double> cue_times_s;
  std::vector<int> gaps;
  std::vector<int> continuity_breaks;
  bool unwrap_applied = false;

  /// Pair for a given cue index, if that cue onset was matched.
  const AsynchronyPair* pair_for_cue(int cue_index) const;
};

/// Asynchronies around the perturbed step, baselined so the pre-perturbation
/// mean is zero. Offset 0 is the step matched to the cue onset that starts
/// the perturbed interval; the first displaced cue onset is at offset +1.
struct RelativeAsynchronyCurve {
  static constexpr int kMinOffset = -4;
  static constexpr int kMaxOffset = 6;
  static constexpr int kSize = kMaxOffset - kMinOffset + 1;

  std::array<std::optional<double>, kSize> values_s{};
  double baseline_mean_s = 0.0;

  std::optional<double> at(int offset) const {
    if (offset < kMinOffset || offset > kMaxOffset) return std::nullopt;
    return values_s[static_cast<std::size_t>(offset - kMinOffset)];
  }
  void set(int offset, double value) {
    values_s[static_cast<std::size_t>(offset - kMinOffset)] = value;
  }
};

/// Pre-perturbation descriptive statistics for one trial.
struct PreWindowSummary {
  double mean_asynchrony_s = 0.0;
  double sd_asynchrony_s = 0.0;
  double mean_isi_s = 0.0;
  double sd_isi_s = 0.0;
  int n_used = 0;
};

}  // namespace stepsync
