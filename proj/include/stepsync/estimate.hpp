#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stepsync/types.hpp"

namespace stepsync {

/// Result of fitting the linear phase-correction model.
struct PhaseCorrectionEstimate {
  double correction_gain = 0.0;       // projected onto [0, 2]
  double residual_variance = 0.0;     // seconds^2
  std::optional<double> timekeeper_var = std::nullopt;  // seconds^2
  std::optional<double> motor_var = std::nullopt;       // seconds^2
  int n_points = 0;
  bool bound_active = false;
};

/// Step-index range [first, last] (inclusive, in cue-onset indices) of the
/// asynchronies entering a fit.
struct FitWindow {
  int first = 0;
  int last = 0;

  /// Default window: the asynchronies following the perturbed interval.
  static FitWindow post_perturbation(const CueSchedule& cue) {
    return {cue.perturbed_index + 1, cue.n_steps - 1};
  }
  /// Everything after the initial synchronization steps.
  static FitWindow whole_trial(const CueSchedule& cue, int exclude_first = 3) {
    return {exclude_first + 1, cue.n_steps - 1};
  }
};

/// One trial's regression rows: response y_n = A_{n+1} + C_n against
/// regressor x_n = A_n, for consecutive gap-free pairs inside the window.
/// Rows are contiguous in n, so residual adjacency is meaningful within a
/// block but never across blocks.
struct RegressionBlock {
  std::vector<double> regressor;
  std::vector<double> response;
};

/// Build the regression rows for one trial. Throws InsufficientData when the
/// window yields fewer than 3 rows.
RegressionBlock make_regression_block(const AsynchronySeries& series, const CueSchedule& cue,
                                      const FitWindow& window);

/// Bounded, covariance-reweighted least squares on one or more blocks.
///
/// The recurrence implies y_n = (1 - gain) x_n + mean_timekeeper + e_n where
/// e_n carries the first-order moving-average structure of the motor-delay
/// difference. Starting from ordinary least squares, the residual lag-0/lag-1
/// moments are re-estimated (correlation bounded to [-1/2, 0]), the
/// tridiagonal covariance rebuilt, and the slope refit, until the gain moves
/// by less than 1e-6 or 20 iterations elapse. The gain is finally projected
/// onto [0, 2]; bound_active records whether the projection changed it.
///
/// Throws InsufficientData (< 3 rows) or DegenerateRegressor (regressor
/// variance indistinguishable from zero).
PhaseCorrectionEstimate fit_phase_correction(std::span<const RegressionBlock> blocks);

/// Single-trial convenience wrapper.
PhaseCorrectionEstimate fit_phase_correction(const AsynchronySeries& series,
                                             const CueSchedule& cue, const FitWindow& window);
PhaseCorrectionEstimate fit_phase_correction(const AsynchronySeries& series,
                                             const CueSchedule& cue);

/// Mean per-step correction over the five steps following the perturbation
/// response, as a percentage of the response at offset +1: for k = 1..5,
/// c_k = (A_{T+k} - A_{T+k+1}) / A_{T+1}, and the result is 100 * mean(c_k).
/// Requires curve values at offsets +1..+6 (InsufficientData otherwise) and a
/// nonzero response at +1 (UndefinedBaselinePerturbation).
double percent_correction(const RelativeAsynchronyCurve& curve);

}  // namespace stepsync
