#include "stepsync/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "stepsync/rng.hpp"
#include "stepsync/timing.hpp"

namespace stepsync {

void PhaseCorrectionParams::validate() const {
  if (!(correction_gain >= 0.0 && correction_gain <= 2.0)) {
    throw ValidationError("correction gain must lie in [0, 2]");
  }
  if (timekeeper_sd_s < 0.0 || motor_sd_s < 0.0) {
    throw ValidationError("noise standard deviations must be non-negative");
  }
  if (!(timekeeper_mean_s > 0.0)) {
    throw ValidationError("timekeeper mean must be positive");
  }
}

CueSchedule generate_cue_schedule(double nominal_isi_s, int n_steps,
                                  const PerturbationSpec& perturbation, double cue_jitter_sd_s,
                                  std::uint64_t seed) {
  if (!(nominal_isi_s > 0.0)) throw ValidationError("nominal interval must be positive");
  if (n_steps < 2) throw ValidationError("schedule needs at least 2 steps");
  if (cue_jitter_sd_s < 0.0) throw ValidationError("cue jitter must be non-negative");
  perturbation.validate(n_steps);

  Rng rng(seed);
  const int perturbed = rng.uniform_int(perturbation.window_lo, perturbation.window_hi);

  CueSchedule out;
  out.nominal_isi_s = nominal_isi_s;
  out.n_steps = n_steps;
  out.perturbation = perturbation;
  out.perturbed_index = perturbed;

  out.intervals.source = SourceTag::Cue;
  out.intervals.intervals_s.resize(static_cast<std::size_t>(n_steps - 1));
  for (int k = 0; k < n_steps - 1; ++k) {
    double interval = cue_jitter_sd_s > 0.0 ? rng.normal(nominal_isi_s, cue_jitter_sd_s)
                                            : nominal_isi_s;
    if (k == perturbed) interval *= perturbation.scale();
    out.intervals.intervals_s[static_cast<std::size_t>(k)] = interval;
  }

  std::vector<Onset> onsets(static_cast<std::size_t>(n_steps));
  double t = nominal_isi_s;  // lead-in keeps early responses clear of time 0
  for (int n = 0; n < n_steps; ++n) {
    onsets[static_cast<std::size_t>(n)] = {t, n % 2 == 0 ? Foot::Left : Foot::Right};
    if (n < n_steps - 1) t += out.intervals.intervals_s[static_cast<std::size_t>(n)];
  }
  out.onsets = OnsetSeries(std::move(onsets), SourceTag::Cue);
  return out;
}

AgentRun simulate_agent(const PhaseCorrectionParams& params, const CueSchedule& cue,
                        double initial_asynchrony_s, std::uint64_t seed) {
  params.validate();
  const int n = cue.n_steps;
  if (n < 2 || static_cast<int>(cue.onsets.size()) != n) {
    throw ValidationError("cue schedule is inconsistent");
  }

  Rng rng(seed);
  std::vector<double> motor(static_cast<std::size_t>(n));
  for (auto& m : motor) m = rng.normal(params.motor_mean_s, params.motor_sd_s);

  std::vector<double> asynchrony(static_cast<std::size_t>(n));
  asynchrony[0] = initial_asynchrony_s;
  const double retain = 1.0 - params.correction_gain;
  for (int k = 0; k + 1 < n; ++k) {
    const double timekeeper = rng.normal(params.timekeeper_mean_s, params.timekeeper_sd_s);
    asynchrony[static_cast<std::size_t>(k + 1)] =
        retain * asynchrony[static_cast<std::size_t>(k)] + timekeeper +
        motor[static_cast<std::size_t>(k + 1)] - motor[static_cast<std::size_t>(k)] -
        cue.intervals.intervals_s[static_cast<std::size_t>(k)];
  }

  AgentRun run;
  std::vector<Onset> onsets(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    onsets[static_cast<std::size_t>(k)] = {
        cue.onsets.time(static_cast<std::size_t>(k)) + asynchrony[static_cast<std::size_t>(k)],
        cue.onsets.onsets()[static_cast<std::size_t>(k)].foot};
  }
  run.onsets = OnsetSeries(std::move(onsets), SourceTag::Participant);

  run.ground_truth.participant_times_s = run.onsets.times();
  run.ground_truth.cue_times_s = cue.onsets.times();
  run.ground_truth.pairs.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // Recomputed from the rendered onset times so the construction identity
    // (participant minus matched cue time) holds bit-exactly.
    run.ground_truth.pairs.push_back(
        {k, k,
         run.ground_truth.participant_times_s[static_cast<std::size_t>(k)] -
             run.ground_truth.cue_times_s[static_cast<std::size_t>(k)]});
  }
  return run;
}

MarkerTrace synthesize_trace(const OnsetSeries& onsets, double sample_rate_hz,
                             double step_amplitude_m, double step_duration_s, double noise_sd_m,
                             std::uint64_t seed) {
  if (!(sample_rate_hz > 0.0)) throw ValidationError("sample rate must be positive");
  if (!(step_amplitude_m > 0.0)) throw ValidationError("step amplitude must be positive");
  if (!(step_duration_s > 0.0)) throw ValidationError("step duration must be positive");
  if (noise_sd_m < 0.0) throw ValidationError("noise must be non-negative");

  double t_end = 1.0;
  if (!onsets.empty()) {
    const auto isi = onsets.size() >= 2 ? compute_isi(onsets).intervals_s : std::vector<double>{};
    for (double interval : isi) {
      if (step_duration_s >= interval) {
        throw BumpOverlap("step duration must be shorter than the smallest onset interval");
      }
    }
    if (onsets.time(0) < 0.0) {
      throw MalformedTrace("cannot render onsets before the trace start at time 0");
    }
    t_end = onsets.time(onsets.size() - 1) + step_duration_s + 0.5;
  }

  MarkerTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  const double dt = 1.0 / sample_rate_hz;
  const auto n_samples = static_cast<std::size_t>(std::ceil(t_end * sample_rate_hz)) + 1;
  trace.timestamps_s.resize(n_samples);
  trace.left_height_m.assign(n_samples, 0.0);
  trace.right_height_m.assign(n_samples, 0.0);
  for (std::size_t i = 0; i < n_samples; ++i) trace.timestamps_s[i] = static_cast<double>(i) * dt;

  constexpr double kTwoPi = 2.0 * 3.141592653589793;
  for (const Onset& onset : onsets.onsets()) {
    auto& channel = onset.foot == Foot::Left ? trace.left_height_m : trace.right_height_m;
    const auto first = static_cast<std::size_t>(std::ceil(onset.time_s * sample_rate_hz));
    for (std::size_t i = first; i < n_samples; ++i) {
      const double phase = (trace.timestamps_s[i] - onset.time_s) / step_duration_s;
      if (phase > 1.0) break;
      channel[i] += 0.5 * step_amplitude_m * (1.0 - std::cos(kTwoPi * phase));
    }
  }

  if (noise_sd_m > 0.0) {
    Rng rng(seed);
    for (auto* channel : {&trace.left_height_m, &trace.right_height_m}) {
      for (double& h : *channel) {
        h = std::max(0.0, h + rng.normal(0.0, noise_sd_m));
      }
    }
  }
  return trace;
}

}  // namespace stepsync
