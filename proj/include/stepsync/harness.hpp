#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stepsync/detect.hpp"
#include "stepsync/estimate.hpp"
#include "stepsync/simulate.hpp"
#include "stepsync/types.hpp"

namespace stepsync {

enum class FitWindowMode { PostPerturbation, WholeTrial };

/// Synthetic-trace rendering settings for the detection pipeline. Participant
/// and cue streams are sampled at their native capture rates and aligned by
/// timestamp downstream.
struct TraceOptions {
  double participant_rate_hz = 100.0;
  double cue_rate_hz = 75.0;
  double amplitude_m = 0.18;
  double step_duration_s = 0.2;
  double noise_sd_m = 0.001;
};

/// Agent entry in a config: a built-in preset name, optionally overridden by
/// explicit parameters (timekeeper mean defaults to the cell tempo).
struct AgentSpec {
  std::string name;
  std::optional<PhaseCorrectionParams> params;
};

struct AnalysisOptions {
  int exclude_first = 3;
  int max_gaps = 2;
  FitWindowMode fit_window = FitWindowMode::PostPerturbation;
};

/// Full condition grid for a batch run: tempo x agent preset x perturbation
/// direction, a fixed number of trials per cell.
struct ExperimentConfig {
  std::vector<double> tempos_s = {0.4, 0.8};
  std::vector<AgentSpec> agents = {{"VisualOnly", std::nullopt},
                                   {"AuditoryVisual", std::nullopt}};
  std::vector<PerturbationSpec::Direction> directions = {
      PerturbationSpec::Direction::Negative, PerturbationSpec::Direction::Positive};
  int trials_per_cell = 20;
  int n_steps = 30;
  std::uint64_t master_seed = 1;
  double cue_jitter_sd_s = 0.0;
  double perturbation_magnitude = 0.15;
  int perturbation_window_lo = 10;
  int perturbation_window_hi = 16;
  double initial_asynchrony_s = 0.0;
  bool use_detection = false;
  TraceOptions trace;
  AnalysisOptions analysis;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

struct ConditionLabels {
  double tempo_s = 0.8;
  std::string agent;
  PerturbationSpec::Direction direction = PerturbationSpec::Direction::Negative;

  std::string cell_id() const;
};

/// Per-trial pipeline output: descriptive statistics, the response curve and
/// the fitted correction gain, or an exclusion record.
struct TrialResult {
  ConditionLabels labels;
  int trial_index = 0;
  std::uint64_t seed = 0;
  int perturbed_index = 0;
  bool excluded = false;
  std::string exclusion_reason;
  int n_gaps = 0;
  double realized_cue_mean_isi_s = 0.0;
  PreWindowSummary pre;
  std::optional<RelativeAsynchronyCurve> curve;
  std::optional<PhaseCorrectionEstimate> fit;
};

struct CurvePointSummary {
  std::optional<double> mean_s;
  std::optional<double> sem_s;
  int n = 0;
};

/// Per-cell aggregates over included trials. SEMs are absent for single-trial
/// cells; curve points carry their own per-offset n.
struct ConditionSummary {
  ConditionLabels labels;
  int n_included = 0;
  int n_excluded = 0;
  double mean_isi_s = 0.0;
  std::optional<double> sem_isi_s;
  double mean_asynchrony_s = 0.0;
  std::optional<double> sem_asynchrony_s;
  double mean_sd_asynchrony_s = 0.0;
  std::optional<double> sem_sd_asynchrony_s;
  double mean_correction_gain = 0.0;
  std::optional<double> sem_correction_gain;
  std::optional<PhaseCorrectionEstimate> pooled_fit;
  std::array<CurvePointSummary, RelativeAsynchronyCurve::kSize> curve{};
};

struct CellResult {
  ConditionLabels labels;
  std::vector<TrialResult> trials;
  ConditionSummary summary;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;
};

/// Run one trial's analysis pipeline on prepared onset streams:
/// match -> unwrap -> pre-perturbation summary -> response curve -> fit.
/// Exclusion rules (too many gaps, no usable baseline, failed fit) set the
/// excluded flag instead of throwing.
TrialResult analyze_trial(const OnsetSeries& participant, const CueSchedule& cue,
                          const AnalysisOptions& options);

/// Deterministic per-trial seed: derived from the master seed, the cell label
/// and the trial index, so any cell can be reproduced in isolation.
std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& cell_id, int trial_index);

/// Run the full condition grid. Trials may execute on several worker threads;
/// results are assembled and aggregated in deterministic order regardless of
/// the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config, int workers = 1);

/// Aggregate one cell's trials. Throws EmptyCell (naming the cell) when every
/// trial is excluded.
ConditionSummary aggregate(const std::vector<TrialResult>& trials);

/// File-based analysis inputs. Exactly one participant source is required
/// (onsets CSV or trace CSV); the cue stream comes from the same onsets file,
/// a cue trace, or a declared nominal metronome. The perturbation record
/// comes from a schedule sidecar or explicit fields.
struct AnalysisRequest {
  std::optional<std::string> onsets_path;
  std::optional<std::string> trace_path;
  std::optional<std::string> cue_trace_path;
  std::optional<std::string> metronome_isi_s_text;  // declared metronome interval
  double metronome_start_s = 0.0;
  std::optional<std::string> schedule_path;
  std::optional<int> perturbed_index;
  std::optional<double> nominal_isi_s;
  PerturbationSpec perturbation;
  DetectorConfig detector;
  AnalysisOptions options;
};

TrialResult analyze_files(const AnalysisRequest& request);

/// Schedule sidecar (JSON) so exported onsets can be re-analyzed without
/// re-supplying perturbation details.
std::string schedule_to_json(const CueSchedule& schedule);
CueSchedule schedule_from_json(const std::string& text, const OnsetSeries& cue_onsets);

}  // namespace stepsync
