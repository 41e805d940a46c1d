#include <cmath>
#include <vector>

#include "doctest.h"
#include "stepsync/estimate.hpp"
#include "stepsync/rng.hpp"
#include "stepsync/simulate.hpp"
#include "stepsync/timing.hpp"

using namespace stepsync;

namespace {

PerturbationSpec perturbation(PerturbationSpec::Direction direction) {
  PerturbationSpec spec;
  spec.direction = direction;
  return spec;
}

PhaseCorrectionParams agent(double gain, double isi, double sigma_t = 0.0, double sigma_m = 0.0) {
  PhaseCorrectionParams params;
  params.correction_gain = gain;
  params.timekeeper_mean_s = isi;
  params.timekeeper_sd_s = sigma_t;
  params.motor_sd_s = sigma_m;
  return params;
}

RelativeAsynchronyCurve geometric_curve(double initial, double retain) {
  RelativeAsynchronyCurve curve;
  for (int offset = -4; offset <= 0; ++offset) curve.set(offset, 0.0);
  double v = initial;
  for (int offset = 1; offset <= 6; ++offset) {
    curve.set(offset, v);
    v *= retain;
  }
  return curve;
}

}  // namespace

TEST_CASE("noiseless fits recover the generating gain exactly") {
  for (double gain : {0.1, 0.25, 0.35, 0.5, 0.75, 1.0, 1.5}) {
    for (auto direction :
         {PerturbationSpec::Direction::Negative, PerturbationSpec::Direction::Positive}) {
      const auto cue = generate_cue_schedule(0.8, 30, perturbation(direction), 0.0, 11);
      const auto run = simulate_agent(agent(gain, 0.8), cue, 0.0, 1);
      const auto est = fit_phase_correction(run.ground_truth, cue);
      CHECK(std::abs(est.correction_gain - gain) < 1e-6);
      CHECK_FALSE(est.bound_active);
      CHECK(est.n_points >= 3);
    }
  }
}

TEST_CASE("constant post-correction asynchronies are degenerate without the transient") {
  const auto cue = generate_cue_schedule(0.8, 30, perturbation(PerturbationSpec::Direction::Negative),
                                         0.0, 11);
  const int T = cue.perturbed_index;
  const auto run = simulate_agent(agent(1.0, 0.8), cue, 0.0, 1);

  // Window starting after the one-step correction sees identical zeros.
  CHECK_THROWS_AS(
      fit_phase_correction(run.ground_truth, cue, FitWindow{T + 2, cue.n_steps - 1}),
      DegenerateRegressor);

  // With the transient included the full-correction gain is identified.
  const auto est = fit_phase_correction(run.ground_truth, cue, FitWindow{T + 1, cue.n_steps - 1});
  CHECK(est.correction_gain == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("too-short windows are rejected") {
  const auto cue = generate_cue_schedule(0.8, 30, perturbation(PerturbationSpec::Direction::Negative),
                                         0.0, 11);
  const auto run = simulate_agent(agent(0.4, 0.8, 0.02, 0.01), cue, 0.0, 1);
  // pairs 27..29 give two usable rows, one short of the minimum
  CHECK_THROWS_AS(fit_phase_correction(run.ground_truth, cue, FitWindow{27, 29}),
                  InsufficientData);
  // three rows is the boundary case and fits
  CHECK_NOTHROW(fit_phase_correction(run.ground_truth, cue, FitWindow{26, 29}));
}

TEST_CASE("time-unit rescaling leaves the gain unchanged") {
  const auto cue = generate_cue_schedule(0.8, 30, perturbation(PerturbationSpec::Direction::Negative),
                                         0.0, 4);
  const auto run = simulate_agent(agent(0.35, 0.8, 0.02, 0.01), cue, 0.0, 21);
  const auto base = fit_phase_correction(run.ground_truth, cue);

  for (double scale : {1000.0, 3.6}) {
    AsynchronySeries scaled = run.ground_truth;
    for (auto& pr : scaled.pairs) pr.asynchrony_s *= scale;
    for (auto& t : scaled.participant_times_s) t *= scale;
    for (auto& t : scaled.cue_times_s) t *= scale;
    CueSchedule scaled_cue = cue;
    scaled_cue.nominal_isi_s *= scale;
    for (auto& v : scaled_cue.intervals.intervals_s) v *= scale;
    std::vector<Onset> onsets = cue.onsets.onsets();
    for (auto& o : onsets) o.time_s *= scale;
    scaled_cue.onsets = OnsetSeries(std::move(onsets), SourceTag::Cue);

    const auto est = fit_phase_correction(scaled, scaled_cue);
    CHECK(est.correction_gain == doctest::Approx(base.correction_gain).epsilon(1e-9));
  }
}

TEST_CASE("constant asynchrony offsets leave the gain unchanged") {
  const auto cue = generate_cue_schedule(0.8, 30, perturbation(PerturbationSpec::Direction::Negative),
                                         0.0, 4);
  const auto run = simulate_agent(agent(0.35, 0.8, 0.02, 0.01), cue, 0.0, 21);
  const auto base = fit_phase_correction(run.ground_truth, cue);

  AsynchronySeries shifted = run.ground_truth;
  for (auto& pr : shifted.pairs) pr.asynchrony_s += 0.15;
  const auto est = fit_phase_correction(shifted, cue);
  CHECK(est.correction_gain == doctest::Approx(base.correction_gain).epsilon(1e-9));
}

TEST_CASE("gain estimates are projected onto [0, 2]") {
  // An anti-correcting series (gain would exceed 2) must clamp and flag.
  const auto cue = generate_cue_schedule(0.8, 30, perturbation(PerturbationSpec::Direction::Negative),
                                         0.0, 11);
  const int T = cue.perturbed_index;
  AsynchronySeries series;
  series.cue_times_s = cue.onsets.times();
  double a = 0.0;
  for (int n = 0; n < 30; ++n) {
    series.pairs.push_back({n, n, a});
    const double retain = -1.5;  // violates the model bound on purpose
    if (n >= T) a = n == T ? 0.12 : retain * a;
  }
  const auto est = fit_phase_correction(series, cue, FitWindow{T + 1, 29});
  CHECK(est.bound_active);
  CHECK(est.correction_gain == 2.0);
}

TEST_CASE("noisy recovery at the reported slow-tempo gains") {
  // 200 trials, timekeeper 20 ms and motor 10 ms noise at a 0.8 s interval:
  // the mean per-trial estimate lands within 0.05 of the generating gain.
  const double gain = 0.405;
  Rng seeder(314159);
  double sum = 0.0;
  int count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto direction = trial % 2 == 0 ? PerturbationSpec::Direction::Negative
                                          : PerturbationSpec::Direction::Positive;
    const auto cue = generate_cue_schedule(0.8, 30, perturbation(direction), 0.0, seeder.next_u64());
    const auto run = simulate_agent(agent(gain, 0.8, 0.02, 0.01), cue, 0.0, seeder.next_u64());
    const auto est = fit_phase_correction(run.ground_truth, cue,
                                          FitWindow::whole_trial(cue));
    sum += est.correction_gain;
    ++count;
  }
  CHECK(std::abs(sum / count - gain) < 0.05);
}

TEST_CASE("pooled fits shed their bias as trials accumulate") {
  const double gain = 0.265;
  Rng seeder(271828);
  auto pooled_estimate = [&](int n_trials) {
    std::vector<RegressionBlock> blocks;
    for (int trial = 0; trial < n_trials; ++trial) {
      const auto direction = trial % 2 == 0 ? PerturbationSpec::Direction::Negative
                                            : PerturbationSpec::Direction::Positive;
      const auto cue =
          generate_cue_schedule(0.8, 30, perturbation(direction), 0.0, seeder.next_u64());
      const auto run = simulate_agent(agent(gain, 0.8, 0.02, 0.01), cue, 0.0, seeder.next_u64());
      blocks.push_back(make_regression_block(run.ground_truth, cue, FitWindow::whole_trial(cue)));
    }
    return fit_phase_correction(blocks).correction_gain;
  };
  const double e10 = pooled_estimate(10);
  const double e100 = pooled_estimate(100);
  const double e1000 = pooled_estimate(1000);
  CHECK(std::abs(e1000 - gain) < 0.02);
  CHECK(std::abs(e1000 - gain) <= std::abs(e10 - gain) + 0.02);
  CHECK(std::abs(e100 - gain) < 0.06);
}

TEST_CASE("percent correction: full one-step correction scores 20") {
  RelativeAsynchronyCurve curve;
  for (int offset = -4; offset <= 0; ++offset) curve.set(offset, 0.0);
  curve.set(1, 0.12);
  for (int offset = 2; offset <= 6; ++offset) curve.set(offset, 0.0);
  CHECK(percent_correction(curve) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("percent correction: flat nonzero curve scores 0") {
  RelativeAsynchronyCurve curve;
  for (int offset = -4; offset <= 6; ++offset) curve.set(offset, offset >= 1 ? 0.1 : 0.0);
  CHECK(percent_correction(curve) == doctest::Approx(0.0));
}

TEST_CASE("percent correction matches the geometric closed form") {
  // Per-step decrements of a geometric curve with retain factor r sum to
  // (1 - r^5)/5 of the initial response.
  const double retain = 0.65;
  const auto curve = geometric_curve(0.12, retain);
  const double expected = 100.0 * (1.0 - std::pow(retain, 5)) / 5.0;
  CHECK(percent_correction(curve) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("percent correction error paths") {
  RelativeAsynchronyCurve missing = geometric_curve(0.12, 0.65);
  missing.values_s[static_cast<std::size_t>(6 - RelativeAsynchronyCurve::kMinOffset)] =
      std::nullopt;
  CHECK_THROWS_AS(percent_correction(missing), InsufficientData);

  RelativeAsynchronyCurve zero;
  for (int offset = -4; offset <= 6; ++offset) zero.set(offset, 0.0);
  CHECK_THROWS_AS(percent_correction(zero), UndefinedBaselinePerturbation);
}
