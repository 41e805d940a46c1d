#pragma once

#include "stepsync/types.hpp"

namespace stepsync {

/// Number of initial steps dropped from every statistics window.
inline constexpr int kDefaultExcludeFirst = 3;

/// Intervals between consecutive onsets. Throws EmptySeries for fewer than
/// two onsets.
ISISeries compute_isi(const OnsetSeries& onsets);

/// Match each participant onset to a cue onset by temporal distance, at most
/// one participant per cue. When two participant onsets compete for a cue the
/// nearer one wins and the other falls back to its next-nearest free cue; an
/// onset exactly equidistant between two cues pairs with the earlier one.
/// The result is the raw (possibly phase-wrapped) asynchrony series; unmatched
/// cue onsets are recorded as gaps. Deterministic and order-independent.
AsynchronySeries match_onsets(const OnsetSeries& participant, const OnsetSeries& cue);

/// Re-assign pair cue indices so consecutive asynchronies are continuous
/// (adjacent differences below nominal_isi/2), removing the sawtooth that
/// nearest matching produces under tempo drift. Asynchronies may legitimately
/// grow beyond the nominal interval afterwards. Where no integer shift can
/// restore continuity the series restarts from the raw pairing and the break
/// is recorded. Idempotent.
AsynchronySeries unwrap_asynchronies(const AsynchronySeries& raw, double nominal_isi_s);

/// Asynchronies at step offsets -4..+6 around perturbed interval index T,
/// with the mean over steps [exclude_first+1, T-1] subtracted. Throws
/// InsufficientBaseline when that window holds no pairs.
RelativeAsynchronyCurve relative_asynchrony(const AsynchronySeries& series, int perturbed_index,
                                            int exclude_first = kDefaultExcludeFirst);

/// Mean/SD of asynchrony and participant inter-step interval over the
/// pre-perturbation window [exclude_first+1, T-1]. Interval statistics skip
/// across gaps. Throws InsufficientBaseline when the window holds no pairs.
PreWindowSummary summarize_pre_perturbation(const AsynchronySeries& series,
                                            const ISISeries& participant_isi, int perturbed_index,
                                            int exclude_first = kDefaultExcludeFirst);

}  // namespace stepsync
