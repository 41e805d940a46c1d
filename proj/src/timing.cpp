#include "stepsync/timing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stepsync {

std::string to_string(Foot foot) { return foot == Foot::Left ? "L" : "R"; }

std::string to_string(SourceTag source) {
  return source == SourceTag::Participant ? "participant" : "cue";
}

std::string to_string(PerturbationSpec::Direction direction) {
  return direction == PerturbationSpec::Direction::Negative ? "negative" : "positive";
}

OnsetSeries::OnsetSeries(std::vector<Onset> onsets, SourceTag source)
    : onsets_(std::move(onsets)), source_(source) {
  for (std::size_t i = 1; i < onsets_.size(); ++i) {
    if (!(onsets_[i].time_s > onsets_[i - 1].time_s)) {
      throw DataError("onset times must be strictly increasing");
    }
  }
}

std::vector<double> OnsetSeries::times() const {
  std::vector<double> out(onsets_.size());
  std::transform(onsets_.begin(), onsets_.end(), out.begin(),
                 [](const Onset& o) { return o.time_s; });
  return out;
}

void PerturbationSpec::validate(int n_steps) const {
  if (!(magnitude > 0.0 && magnitude < 1.0)) {
    throw ValidationError("perturbation magnitude must be in (0, 1)");
  }
  if (window_lo < 1 || window_hi < window_lo || window_hi > n_steps - 2) {
    throw InvalidWindow("perturbation window must lie within [1, n_steps-2]");
  }
  if (n_steps <= window_hi + 6) {
    throw InvalidWindow("n_steps must exceed the window upper bound by more than 6 "
                        "to leave room for the response tail");
  }
}

const AsynchronyPair* AsynchronySeries::pair_for_cue(int cue_index) const {
  auto it = std::lower_bound(pairs.begin(), pairs.end(), cue_index,
                             [](const AsynchronyPair& p, int j) { return p.cue_index < j; });
  if (it == pairs.end() || it->cue_index != cue_index) return nullptr;
  return &*it;
}

ISISeries compute_isi(const OnsetSeries& onsets) {
  if (onsets.size() < 2) {
    throw EmptySeries("need at least 2 onsets to compute intervals");
  }
  ISISeries out;
  out.source = onsets.source();
  out.intervals_s.resize(onsets.size() - 1);
  for (std::size_t k = 0; k + 1 < onsets.size(); ++k) {
    out.intervals_s[k] = onsets.time(k + 1) - onsets.time(k);
  }
  return out;
}

namespace {

// Enumerates cue candidates for one participant onset in order of increasing
// temporal distance, earlier cue first on exact ties.
class NearestCueWalker {
 public:
  NearestCueWalker(double t, const std::vector<double>& cue_times) : t_(t), cues_(cue_times) {
    auto it = std::lower_bound(cues_.begin(), cues_.end(), t);
    right_ = static_cast<int>(it - cues_.begin());
    left_ = right_ - 1;
  }

  // Next candidate cue index, or -1 when exhausted.
  int next() {
    const double dl = left_ >= 0 ? t_ - cues_[static_cast<std::size_t>(left_)]
                                 : std::numeric_limits<double>::infinity();
    const double dr = right_ < static_cast<int>(cues_.size())
                          ? cues_[static_cast<std::size_t>(right_)] - t_
                          : std::numeric_limits<double>::infinity();
    if (!std::isfinite(dl) && !std::isfinite(dr)) return -1;
    if (dl <= dr) return left_--;
    return right_++;
  }

 private:
  double t_;
  const std::vector<double>& cues_;
  int left_ = -1;
  int right_ = 0;
};

}  // namespace

AsynchronySeries match_onsets(const OnsetSeries& participant, const OnsetSeries& cue) {
  AsynchronySeries out;
  out.participant_times_s = participant.times();
  out.cue_times_s = cue.times();

  const auto& p = out.participant_times_s;
  const auto& c = out.cue_times_s;
  const int n_cue = static_cast<int>(c.size());
  const int n_par = static_cast<int>(p.size());

  if (n_cue == 0 || n_par == 0) {
    out.gaps.resize(static_cast<std::size_t>(n_cue));
    std::iota(out.gaps.begin(), out.gaps.end(), 0);
    return out;
  }

  // Deferred-acceptance assignment: participants propose to cues from nearest
  // outwards; a cue keeps the nearer of two competitors (earlier participant
  // on exact ties) and the loser moves on to its next candidate. The result
  // is independent of processing order.
  std::vector<NearestCueWalker> walkers;
  walkers.reserve(static_cast<std::size_t>(n_par));
  for (int i = 0; i < n_par; ++i) walkers.emplace_back(p[static_cast<std::size_t>(i)], c);

  std::vector<int> holder(static_cast<std::size_t>(n_cue), -1);
  std::vector<int> pending(static_cast<std::size_t>(n_par));
  std::iota(pending.rbegin(), pending.rend(), 0);

  auto distance = [&](int i, int j) {
    return std::abs(p[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(j)]);
  };

  while (!pending.empty()) {
    const int i = pending.back();
    pending.pop_back();
    const int j = walkers[static_cast<std::size_t>(i)].next();
    if (j < 0) continue;  // no cue left for this onset
    int& h = holder[static_cast<std::size_t>(j)];
    if (h < 0) {
      h = i;
    } else {
      const double di = distance(i, j);
      const double dh = distance(h, j);
      if (di < dh || (di == dh && i < h)) {
        pending.push_back(h);
        h = i;
      } else {
        pending.push_back(i);
      }
    }
  }

  for (int j = 0; j < n_cue; ++j) {
    const int i = holder[static_cast<std::size_t>(j)];
    if (i < 0) {
      out.gaps.push_back(j);
    } else {
      out.pairs.push_back({i, j, p[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(j)]});
    }
  }
  return out;
}

AsynchronySeries unwrap_asynchronies(const AsynchronySeries& raw, double nominal_isi_s) {
  if (!(nominal_isi_s > 0.0)) throw ValidationError("nominal interval must be positive");

  AsynchronySeries out;
  out.participant_times_s = raw.participant_times_s;
  out.cue_times_s = raw.cue_times_s;
  out.unwrap_applied = false;

  if (raw.pairs.empty()) {
    out.gaps = raw.gaps;
    return out;
  }

  const auto& p = out.participant_times_s;
  const auto& c = out.cue_times_s;
  const int n_cue = static_cast<int>(c.size());
  const double half = nominal_isi_s / 2.0;

  // Work through pairs in responder (participant) order; continuity of the
  // asynchrony sequence is continuity across successive responses.
  std::vector<AsynchronyPair> seq(raw.pairs.begin(), raw.pairs.end());
  std::sort(seq.begin(), seq.end(), [](const AsynchronyPair& a, const AsynchronyPair& b) {
    return a.participant_index < b.participant_index;
  });

  std::vector<AsynchronyPair> result;
  result.reserve(seq.size());
  result.push_back(seq.front());  // first pair anchors the chain

  for (std::size_t k = 1; k < seq.size(); ++k) {
    const AsynchronyPair& cur = seq[k];
    const AsynchronyPair& prev = result.back();
    const double pt = p[static_cast<std::size_t>(cur.participant_index)];

    int best_j = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j = prev.cue_index + 1; j < n_cue; ++j) {
      const double offset = (pt - c[static_cast<std::size_t>(j)]) - prev.asynchrony_s;
      const double cost = std::abs(offset);
      if (cost < best_cost) {
        best_cost = cost;
        best_j = j;
      } else if (offset < 0.0) {
        break;  // offset decreases with j, so the cost only grows from here
      }
    }
    if (best_j < 0) {
      // No cue index remains beyond the previous pair; the onset stays
      // unmatched and its former cue becomes a gap.
      out.unwrap_applied = true;
      continue;
    }

    int j_new = best_j;
    if (best_cost >= half) {
      // Continuity unresolvable under any shift: fall back to the raw
      // pairing, record the break, and restart the chain from here.
      j_new = cur.cue_index > prev.cue_index ? cur.cue_index : best_j;
      out.continuity_breaks.push_back(static_cast<int>(result.size()));
    }
    result.push_back({cur.participant_index, j_new, pt - c[static_cast<std::size_t>(j_new)]});
    if (j_new != cur.cue_index) out.unwrap_applied = true;
  }

  out.pairs = std::move(result);
  std::vector<bool> used(static_cast<std::size_t>(n_cue), false);
  for (const auto& pr : out.pairs) used[static_cast<std::size_t>(pr.cue_index)] = true;
  for (int j = 0; j < n_cue; ++j) {
    if (!used[static_cast<std::size_t>(j)]) out.gaps.push_back(j);
  }
  return out;
}

namespace {

struct WindowPairs {
  std::vector<double> asynchronies;
  double baseline = 0.0;
};

WindowPairs pre_window(const AsynchronySeries& series, int perturbed_index, int exclude_first) {
  WindowPairs w;
  const int lo = exclude_first + 1;
  const int hi = perturbed_index - 1;
  for (const auto& pr : series.pairs) {
    if (pr.cue_index >= lo && pr.cue_index <= hi) w.asynchronies.push_back(pr.asynchrony_s);
  }
  if (w.asynchronies.empty()) {
    throw InsufficientBaseline("no matched steps in the pre-perturbation window");
  }
  w.baseline = std::accumulate(w.asynchronies.begin(), w.asynchronies.end(), 0.0) /
               static_cast<double>(w.asynchronies.size());
  return w;
}

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

RelativeAsynchronyCurve relative_asynchrony(const AsynchronySeries& series, int perturbed_index,
                                            int exclude_first) {
  const WindowPairs w = pre_window(series, perturbed_index, exclude_first);

  RelativeAsynchronyCurve curve;
  curve.baseline_mean_s = w.baseline;
  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    if (const AsynchronyPair* pr = series.pair_for_cue(perturbed_index + offset)) {
      curve.set(offset, pr->asynchrony_s - w.baseline);
    }
  }
  return curve;
}

PreWindowSummary summarize_pre_perturbation(const AsynchronySeries& series,
                                            const ISISeries& participant_isi, int perturbed_index,
                                            int exclude_first) {
  const WindowPairs w = pre_window(series, perturbed_index, exclude_first);

  PreWindowSummary s;
  s.n_used = static_cast<int>(w.asynchronies.size());
  s.mean_asynchrony_s = w.baseline;
  s.sd_asynchrony_s = sample_sd(w.asynchronies, w.baseline);

  // Participant intervals between consecutively matched steps whose cue
  // indices are adjacent and inside the window; skipping across gaps keeps a
  // missed step from injecting a double-length interval.
  std::vector<double> intervals;
  const int lo = exclude_first + 1;
  const int hi = perturbed_index - 1;
  for (std::size_t k = 0; k + 1 < series.pairs.size(); ++k) {
    const auto& a = series.pairs[k];
    const auto& b = series.pairs[k + 1];
    if (b.cue_index != a.cue_index + 1) continue;
    if (b.participant_index != a.participant_index + 1) continue;
    if (a.cue_index < lo || a.cue_index > hi) continue;
    const std::size_t idx = static_cast<std::size_t>(a.participant_index);
    if (idx < participant_isi.intervals_s.size()) {
      intervals.push_back(participant_isi.intervals_s[idx]);
    }
  }
  if (!intervals.empty()) {
    s.mean_isi_s = std::accumulate(intervals.begin(), intervals.end(), 0.0) /
                   static_cast<double>(intervals.size());
    s.sd_isi_s = sample_sd(intervals, s.mean_isi_s);
  }
  return s;
}

}  // namespace stepsync
