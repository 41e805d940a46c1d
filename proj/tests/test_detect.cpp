#include <cmath>
#include <vector>

#include "doctest.h"
#include "stepsync/detect.hpp"
#include "stepsync/rng.hpp"
#include "stepsync/timing.hpp"

using namespace stepsync;

namespace {

// Closed-form time at which a raised-cosine bump of given amplitude and
// duration starting at `onset` first reaches `height`.
double analytic_crossing(double onset, double amplitude, double duration, double height) {
  const double phase = std::acos(1.0 - 2.0 * height / amplitude);
  return onset + duration * phase / (2.0 * 3.141592653589793);
}

OnsetSeries bumps(const std::vector<double>& times) {
  std::vector<Onset> onsets;
  for (std::size_t i = 0; i < times.size(); ++i) {
    onsets.push_back({times[i], i % 2 == 0 ? Foot::Left : Foot::Right});
  }
  return OnsetSeries(std::move(onsets), SourceTag::Participant);
}

}  // namespace

TEST_CASE("single bump crossing matches the analytic time") {
  const double onset = 1.0, amplitude = 0.1, duration = 0.3, threshold = 0.02;
  const auto trace = synthesize_trace(bumps({onset}), 100.0, amplitude, duration, 0.0, 1);

  DetectorConfig config;
  config.threshold_height_m = threshold;

  const double expected = analytic_crossing(onset, amplitude, duration, threshold);

  SUBCASE("interpolated: within half a sample") {
    const auto detected = detect_onsets(trace, config);
    REQUIRE(detected.size() == 1);
    CHECK(std::abs(detected.time(0) - expected) < 0.005);
  }
  SUBCASE("grid-snapped: within one sample") {
    config.interpolate = false;
    const auto detected = detect_onsets(trace, config);
    REQUIRE(detected.size() == 1);
    CHECK(std::abs(detected.time(0) - expected) < 0.01);
    // reported time lies exactly on the sample grid
    const double remainder = std::fmod(detected.time(0) + 1e-12, 0.01);
    CHECK(remainder < 1e-9);
  }
}

TEST_CASE("flat trace yields no onsets") {
  MarkerTrace trace;
  trace.sample_rate_hz = 100.0;
  for (int i = 0; i < 200; ++i) {
    trace.timestamps_s.push_back(i * 0.01);
    trace.left_height_m.push_back(0.0);
    trace.right_height_m.push_back(0.0);
  }
  CHECK(detect_onsets(trace, DetectorConfig{}).empty());

  DetectorConfig explicit_thr;
  explicit_thr.threshold_height_m = 0.05;
  CHECK(detect_onsets(trace, explicit_thr).empty());
}

TEST_CASE("noisy bump train: exactly one onset per bump") {
  std::vector<double> times;
  for (int n = 0; n < 30; ++n) times.push_back(0.5 + 0.4 * n);
  const auto trace = synthesize_trace(bumps(times), 100.0, 0.1, 0.3, 0.001, 9);

  DetectorConfig config;
  config.threshold_height_m = 0.02;
  config.hysteresis_fraction = 0.25;
  config.refractory_s = 0.15;
  const auto detected = detect_onsets(trace, config);
  CHECK(detected.size() == 30);

  // strictly increasing overall; same-foot onsets at least a refractory apart
  double last_left = -1e9, last_right = -1e9;
  for (std::size_t k = 0; k < detected.size(); ++k) {
    if (k > 0) CHECK(detected.time(k) > detected.time(k - 1));
    double& last = detected.onsets()[k].foot == Foot::Left ? last_left : last_right;
    CHECK(detected.time(k) - last >= config.refractory_s);
    last = detected.time(k);
  }
}

TEST_CASE("feet are detected independently and merged in time order") {
  std::vector<double> times;
  for (int n = 0; n < 10; ++n) times.push_back(0.5 + 0.4 * n);
  const auto truth = bumps(times);
  const auto trace = synthesize_trace(truth, 100.0, 0.1, 0.25, 0.0, 1);
  const auto detected = detect_onsets(trace, DetectorConfig{});
  REQUIRE(detected.size() == 10);
  for (std::size_t k = 0; k < detected.size(); ++k) {
    CHECK(detected.onsets()[k].foot == truth.onsets()[k].foot);
    if (k > 0) CHECK(detected.time(k) > detected.time(k - 1));
  }
}

TEST_CASE("refractory suppresses rapid re-crossings") {
  // Two bumps 0.1 s apart on the same foot; a 0.3 s refractory keeps only the
  // first.
  std::vector<Onset> onsets{{1.0, Foot::Left}, {1.1, Foot::Left}};
  const auto trace = synthesize_trace(OnsetSeries(std::move(onsets), SourceTag::Participant),
                                      200.0, 0.1, 0.09, 0.0, 1);
  DetectorConfig config;
  config.threshold_height_m = 0.02;
  config.refractory_s = 0.3;
  CHECK(detect_onsets(trace, config).size() == 1);
  config.refractory_s = 0.05;
  CHECK(detect_onsets(trace, config).size() == 2);
}

TEST_CASE("hysteresis blocks shallow re-arming") {
  // Signal dips to 80% of threshold between crossings: with 25% hysteresis
  // the re-arm level is 75%, so the dip never re-arms the detector.
  MarkerTrace trace;
  trace.sample_rate_hz = 100.0;
  const std::vector<double> profile{0.0, 0.2, 1.2, 0.85, 1.2, 0.85, 1.2, 0.2, 0.0};
  for (std::size_t i = 0; i < profile.size(); ++i) {
    trace.timestamps_s.push_back(static_cast<double>(i) * 0.01);
    trace.left_height_m.push_back(0.0);
    trace.right_height_m.push_back(0.0);
  }
  for (std::size_t i = 0; i < profile.size(); ++i) trace.left_height_m[i] = profile[i] * 0.1;

  DetectorConfig config;
  config.threshold_height_m = 0.1;
  config.refractory_s = 0.0;
  config.hysteresis_fraction = 0.25;
  CHECK(detect_onsets(trace, config).size() == 1);

  config.hysteresis_fraction = 0.0;  // plain threshold re-arms on every dip
  CHECK(detect_onsets(trace, config).size() == 3);
}

TEST_CASE("raising the threshold never adds onsets") {
  std::vector<double> times;
  for (int n = 0; n < 12; ++n) times.push_back(0.5 + 0.5 * n);
  const auto trace = synthesize_trace(bumps(times), 100.0, 0.1, 0.3, 0.0, 1);
  std::size_t previous = SIZE_MAX;
  for (double threshold : {0.005, 0.01, 0.02, 0.05, 0.09, 0.099, 0.12}) {
    DetectorConfig config;
    config.threshold_height_m = threshold;
    const std::size_t count = detect_onsets(trace, config).size();
    CHECK(count <= previous);
    previous = count;
  }
  CHECK(previous == 0);  // threshold above the peak finds nothing
}

TEST_CASE("automatic threshold tracks the bump height") {
  std::vector<double> times;
  for (int n = 0; n < 20; ++n) times.push_back(0.5 + 0.45 * n);
  const auto trace = synthesize_trace(bumps(times), 100.0, 0.14, 0.3, 0.0005, 4);
  const double threshold = resolve_threshold(trace, DetectorConfig{});
  CHECK(threshold == doctest::Approx(0.2 * 0.14).epsilon(0.05));
  CHECK(detect_onsets(trace, DetectorConfig::for_nominal_isi(0.45)).size() == 20);
}

TEST_CASE("malformed traces are rejected") {
  MarkerTrace trace;
  trace.sample_rate_hz = 100.0;
  trace.timestamps_s = {0.0, 0.01, 0.01, 0.02};
  trace.left_height_m = {0.0, 0.0, 0.0, 0.0};
  trace.right_height_m = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(detect_onsets(trace, DetectorConfig{}), MalformedTrace);

  trace.timestamps_s = {0.0, 0.01};
  CHECK_THROWS_AS(detect_onsets(trace, DetectorConfig{}), MalformedTrace);  // length mismatch
}

TEST_CASE("bump truncated at the recording start is skipped") {
  // A bump already above threshold at sample 0 has no observable rise.
  std::vector<Onset> onsets{{0.0, Foot::Left}, {1.0, Foot::Left}};
  auto trace = synthesize_trace(OnsetSeries(std::move(onsets), SourceTag::Participant), 100.0,
                                0.1, 0.3, 0.0, 1);
  // Chop the first 50 ms so the first bump starts mid-flight.
  trace.timestamps_s.erase(trace.timestamps_s.begin(), trace.timestamps_s.begin() + 5);
  trace.left_height_m.erase(trace.left_height_m.begin(), trace.left_height_m.begin() + 5);
  trace.right_height_m.erase(trace.right_height_m.begin(), trace.right_height_m.begin() + 5);

  DetectorConfig config;
  config.threshold_height_m = 0.02;
  const auto detected = detect_onsets(trace, config);
  REQUIRE(detected.size() == 1);
  CHECK(detected.time(0) > 0.9);
}
