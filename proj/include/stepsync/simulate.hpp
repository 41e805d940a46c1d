#pragma once

#include <cstdint>
#include <string>

#include "stepsync/types.hpp"

namespace stepsync {

/// Generative parameters of a stepping agent: correction gain plus timekeeper
/// and motor-delay noise. The gain must lie in [0, 2]; 0 means no correction,
/// 1 full one-step correction of the previous asynchrony.
struct PhaseCorrectionParams {
  double correction_gain = 0.4;
  double timekeeper_mean_s = 0.8;
  double timekeeper_sd_s = 0.02;
  double motor_mean_s = 0.01;
  double motor_sd_s = 0.01;

  void validate() const;
};

/// Named parameter set for a simulated agent.
struct AgentPreset {
  std::string name;
  PhaseCorrectionParams params;
};

/// Built-in presets. `name` is either tempo-qualified ("AuditoryVisual-Slow",
/// "VisualOnly-Fast", ...) or a bare modality ("AuditoryVisual", "VisualOnly")
/// resolved by tempo (< 0.6 s counts as fast). The timekeeper mean is set to
/// the requested tempo. Throws ConfigError for unknown names.
PhaseCorrectionParams preset_params(const std::string& name, double tempo_s);

/// Names of all built-in presets (tempo-qualified).
std::vector<std::string> builtin_preset_names();

/// Uniformly sampled heel-height trace per foot. Both feet share the sample
/// grid, which starts at 0 with spacing 1/sample_rate.
struct MarkerTrace {
  double sample_rate_hz = 100.0;
  std::vector<double> timestamps_s;
  std::vector<double> left_height_m;
  std::vector<double> right_height_m;

  const std::vector<double>& channel(Foot foot) const {
    return foot == Foot::Left ? left_height_m : right_height_m;
  }
};

/// Result of simulating one agent against a cue schedule: the onset stream
/// plus the exact asynchronies it was generated from (for oracle use).
struct AgentRun {
  OnsetSeries onsets;
  AsynchronySeries ground_truth;
};

/// Build a cue schedule of n_steps onsets at the given tempo with exactly one
/// perturbed interval. The perturbed interval index is drawn uniformly from
/// the spec's placement window; per-interval Gaussian jitter models the
/// natural variance of a recorded demonstrator. The first onset falls at
/// nominal_isi_s (one silent lead-in period). Identical arguments and seed
/// produce identical schedules.
CueSchedule generate_cue_schedule(double nominal_isi_s, int n_steps,
                                  const PerturbationSpec& perturbation, double cue_jitter_sd_s,
                                  std::uint64_t seed);

/// Iterate the linear phase-correction recurrence against a cue schedule:
/// each next asynchrony keeps (1 - gain) of the current one plus timekeeper
/// and motor-delay noise minus the realized cue interval. Participant onset n
/// is cue onset n plus the n-th asynchrony.
AgentRun simulate_agent(const PhaseCorrectionParams& params, const CueSchedule& cue,
                        double initial_asynchrony_s, std::uint64_t seed);

/// Render onsets as raised-cosine bumps of the given amplitude and duration on
/// a zero baseline, with additive Gaussian sensor noise (clamped at floor
/// level). Throws BumpOverlap when step_duration_s is not shorter than the
/// smallest inter-onset interval.
MarkerTrace synthesize_trace(const OnsetSeries& onsets, double sample_rate_hz,
                             double step_amplitude_m, double step_duration_s, double noise_sd_m,
                             std::uint64_t seed);

}  // namespace stepsync
