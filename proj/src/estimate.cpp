#include "stepsync/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace stepsync {

namespace {

constexpr int kMaxIterations = 20;
constexpr double kGainTolerance = 1e-6;

// Solve the symmetric tridiagonal system (diag d, off-diagonal e) for several
// right-hand sides at once, via the Thomas algorithm. rhs columns are
// overwritten with the solutions.
void solve_tridiagonal(double d, double e, std::vector<std::vector<double>>& rhs) {
  const std::size_t n = rhs.front().size();
  std::vector<double> c_prime(n, 0.0);
  std::vector<double> denom(n, 0.0);
  denom[0] = d;
  c_prime[0] = e / d;
  for (std::size_t i = 1; i < n; ++i) {
    denom[i] = d - e * c_prime[i - 1];
    c_prime[i] = e / denom[i];
  }
  for (auto& col : rhs) {
    col[0] /= denom[0];
    for (std::size_t i = 1; i < n; ++i) {
      col[i] = (col[i] - e * col[i - 1]) / denom[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
      col[i] -= c_prime[i] * col[i + 1];
    }
  }
}

struct NormalEquations {
  double s11 = 0.0, s1x = 0.0, sxx = 0.0, s1y = 0.0, sxy = 0.0;

  // theta = (intercept, slope)
  std::pair<double, double> solve() const {
    const double det = s11 * sxx - s1x * s1x;
    const double intercept = (sxx * s1y - s1x * sxy) / det;
    const double slope = (s11 * sxy - s1x * s1y) / det;
    return {intercept, slope};
  }
};

std::pair<double, double> weighted_fit(std::span<const RegressionBlock> blocks, double diag,
                                       double off) {
  NormalEquations eq;
  for (const RegressionBlock& block : blocks) {
    const std::size_t n = block.regressor.size();
    std::vector<std::vector<double>> cols = {
        std::vector<double>(n, 1.0), block.regressor, block.response};
    solve_tridiagonal(diag, off, cols);
    for (std::size_t i = 0; i < n; ++i) {
      eq.s11 += cols[0][i];
      eq.s1x += cols[1][i];
      eq.sxx += block.regressor[i] * cols[1][i];
      eq.s1y += cols[2][i];
      eq.sxy += block.regressor[i] * cols[2][i];
    }
  }
  return eq.solve();
}

}  // namespace

RegressionBlock make_regression_block(const AsynchronySeries& series, const CueSchedule& cue,
                                      const FitWindow& window) {
  RegressionBlock block;
  const auto& intervals = cue.intervals.intervals_s;
  const int last_pairable = std::min(window.last, static_cast<int>(intervals.size()));

  for (std::size_t k = 0; k + 1 < series.pairs.size(); ++k) {
    const AsynchronyPair& a = series.pairs[k];
    const AsynchronyPair& b = series.pairs[k + 1];
    if (a.cue_index < window.first || a.cue_index >= last_pairable) continue;
    if (b.cue_index != a.cue_index + 1) continue;  // gap: rows must be adjacent steps
    const bool broken = std::find(series.continuity_breaks.begin(),
                                  series.continuity_breaks.end(),
                                  static_cast<int>(k + 1)) != series.continuity_breaks.end();
    if (broken) continue;
    block.regressor.push_back(a.asynchrony_s);
    block.response.push_back(b.asynchrony_s +
                             intervals[static_cast<std::size_t>(a.cue_index)]);
  }
  if (block.regressor.size() < 3) {
    throw InsufficientData("fit window yields fewer than 3 usable step pairs");
  }
  return block;
}

PhaseCorrectionEstimate fit_phase_correction(std::span<const RegressionBlock> blocks) {
  std::size_t n_total = 0;
  double x_sum = 0.0;
  for (const RegressionBlock& block : blocks) {
    if (block.regressor.size() != block.response.size() || block.regressor.size() < 3) {
      throw InsufficientData("each block needs at least 3 rows");
    }
    n_total += block.regressor.size();
    for (double x : block.regressor) x_sum += x;
  }
  if (n_total < 3) throw InsufficientData("fewer than 3 regression rows");

  const double x_mean = x_sum / static_cast<double>(n_total);
  double x_ss = 0.0;
  for (const RegressionBlock& block : blocks) {
    for (double x : block.regressor) x_ss += (x - x_mean) * (x - x_mean);
  }
  if (x_ss <= 1e-18 * static_cast<double>(n_total)) {
    throw DegenerateRegressor("asynchronies are constant over the fit window");
  }

  // Ordinary least squares start.
  auto [intercept, slope] = weighted_fit(blocks, 1.0, 0.0);

  double c0 = 0.0;
  double corr = 0.0;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Residual lag-0/lag-1 moments, adjacency within blocks only.
    double ss0 = 0.0, ss1 = 0.0;
    std::size_t n1 = 0;
    for (const RegressionBlock& block : blocks) {
      const std::size_t n = block.regressor.size();
      double prev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = block.response[i] - intercept - slope * block.regressor[i];
        ss0 += r * r;
        if (i > 0) {
          ss1 += prev * r;
          ++n1;
        }
        prev = r;
      }
    }
    c0 = ss0 / static_cast<double>(n_total);
    if (c0 < 1e-20) break;  // noiseless data: ordinary least squares is exact

    // Moving-average residual structure: lag-1 correlation in [-1/2, 0].
    corr = std::clamp(ss1 / static_cast<double>(n1) / c0, -0.5, 0.0);

    const double prev_slope = slope;
    std::tie(intercept, slope) = weighted_fit(blocks, c0, corr * c0);
    if (std::abs((1.0 - slope) - (1.0 - prev_slope)) < kGainTolerance) break;
  }

  PhaseCorrectionEstimate est;
  const double raw_gain = 1.0 - slope;
  est.correction_gain = std::clamp(raw_gain, 0.0, 2.0);
  est.bound_active = est.correction_gain != raw_gain;
  est.residual_variance = c0;
  est.n_points = static_cast<int>(n_total);
  if (c0 > 0.0) {
    const double motor_var = -corr * c0;
    est.motor_var = motor_var;
    est.timekeeper_var = c0 - 2.0 * motor_var;
  }
  return est;
}

PhaseCorrectionEstimate fit_phase_correction(const AsynchronySeries& series,
                                             const CueSchedule& cue, const FitWindow& window) {
  const RegressionBlock block = make_regression_block(series, cue, window);
  return fit_phase_correction(std::span<const RegressionBlock>(&block, 1));
}

PhaseCorrectionEstimate fit_phase_correction(const AsynchronySeries& series,
                                             const CueSchedule& cue) {
  return fit_phase_correction(series, cue, FitWindow::post_perturbation(cue));
}

double percent_correction(const RelativeAsynchronyCurve& curve) {
  for (int offset = 1; offset <= 6; ++offset) {
    if (!curve.at(offset)) {
      throw InsufficientData("percent correction needs curve values at offsets +1..+6");
    }
  }
  const double initial = *curve.at(1);
  if (std::abs(initial) < 1e-12) {
    throw UndefinedBaselinePerturbation("no measurable response at offset +1");
  }
  double sum = 0.0;
  for (int k = 1; k <= 5; ++k) {
    sum += (*curve.at(k) - *curve.at(k + 1)) / initial;
  }
  return 100.0 * sum / 5.0;
}

}  // namespace stepsync
