#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stepsync/csv_io.hpp"
#include "stepsync/detect.hpp"
#include "stepsync/estimate.hpp"
#include "stepsync/harness.hpp"
#include "stepsync/report.hpp"
#include "stepsync/rng.hpp"
#include "stepsync/timing.hpp"

namespace py = pybind11;
using namespace stepsync;

namespace {

OnsetSeries make_onset_series(const std::vector<std::pair<double, Foot>>& onsets,
                              SourceTag source) {
  std::vector<Onset> converted;
  converted.reserve(onsets.size());
  for (const auto& [time, foot] : onsets) converted.push_back({time, foot});
  return OnsetSeries(std::move(converted), source);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stepping synchronization: cue schedules, phase-correction agents, "
            "onset detection, asynchrony analysis and correction-gain fits.";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "StepsyncValidationError", PyExc_ValueError);
  py::register_exception<DataError>(m, "StepsyncDataError", PyExc_RuntimeError);

  py::enum_<Foot>(m, "Foot").value("LEFT", Foot::Left).value("RIGHT", Foot::Right);
  py::enum_<SourceTag>(m, "SourceTag")
      .value("PARTICIPANT", SourceTag::Participant)
      .value("CUE", SourceTag::Cue);
  py::enum_<PerturbationSpec::Direction>(m, "Direction")
      .value("NEGATIVE", PerturbationSpec::Direction::Negative)
      .value("POSITIVE", PerturbationSpec::Direction::Positive);
  py::enum_<FitWindowMode>(m, "FitWindowMode")
      .value("POST_PERTURBATION", FitWindowMode::PostPerturbation)
      .value("WHOLE_TRIAL", FitWindowMode::WholeTrial);

  py::class_<Onset>(m, "Onset")
      .def(py::init<double, Foot>(), py::arg("time_s"), py::arg("foot"))
      .def_readwrite("time_s", &Onset::time_s)
      .def_readwrite("foot", &Onset::foot)
      .def("__repr__", [](const Onset& o) {
        return "Onset(" + std::to_string(o.time_s) + ", " + to_string(o.foot) + ")";
      });

  py::class_<OnsetSeries>(m, "OnsetSeries")
      .def(py::init(&make_onset_series), py::arg("onsets"), py::arg("source"))
      .def_property_readonly("source", &OnsetSeries::source)
      .def_property_readonly("times", &OnsetSeries::times)
      .def_property_readonly("onsets", &OnsetSeries::onsets)
      .def("__len__", &OnsetSeries::size);

  py::class_<ISISeries>(m, "ISISeries")
      .def_readonly("intervals_s", &ISISeries::intervals_s)
      .def_readonly("source", &ISISeries::source)
      .def("__len__", [](const ISISeries& s) { return s.intervals_s.size(); });

  py::class_<PerturbationSpec>(m, "PerturbationSpec")
      .def(py::init([](PerturbationSpec::Direction direction, double magnitude, int window_lo,
                       int window_hi) {
             PerturbationSpec spec;
             spec.direction = direction;
             spec.magnitude = magnitude;
             spec.window_lo = window_lo;
             spec.window_hi = window_hi;
             return spec;
           }),
           py::arg("direction"), py::arg("magnitude") = 0.15, py::arg("window_lo") = 10,
           py::arg("window_hi") = 16)
      .def_readwrite("direction", &PerturbationSpec::direction)
      .def_readwrite("magnitude", &PerturbationSpec::magnitude)
      .def_readwrite("window_lo", &PerturbationSpec::window_lo)
      .def_readwrite("window_hi", &PerturbationSpec::window_hi);

  py::class_<CueSchedule>(m, "CueSchedule")
      .def_readonly("nominal_isi_s", &CueSchedule::nominal_isi_s)
      .def_readonly("n_steps", &CueSchedule::n_steps)
      .def_readonly("onsets", &CueSchedule::onsets)
      .def_readonly("intervals", &CueSchedule::intervals)
      .def_readonly("perturbation", &CueSchedule::perturbation)
      .def_readonly("perturbed_index", &CueSchedule::perturbed_index);

  py::class_<AsynchronyPair>(m, "AsynchronyPair")
      .def_readonly("participant_index", &AsynchronyPair::participant_index)
      .def_readonly("cue_index", &AsynchronyPair::cue_index)
      .def_readonly("asynchrony_s", &AsynchronyPair::asynchrony_s)
      .def("__repr__", [](const AsynchronyPair& p) {
        return "AsynchronyPair(p=" + std::to_string(p.participant_index) +
               ", c=" + std::to_string(p.cue_index) + ", a=" + std::to_string(p.asynchrony_s) +
               ")";
      });

  py::class_<AsynchronySeries>(m, "AsynchronySeries")
      .def_readonly("pairs", &AsynchronySeries::pairs)
      .def_readonly("gaps", &AsynchronySeries::gaps)
      .def_readonly("continuity_breaks", &AsynchronySeries::continuity_breaks)
      .def_readonly("unwrap_applied", &AsynchronySeries::unwrap_applied)
      .def_readonly("participant_times_s", &AsynchronySeries::participant_times_s)
      .def_readonly("cue_times_s", &AsynchronySeries::cue_times_s)
      .def("asynchronies",
           [](const AsynchronySeries& s) {
             std::vector<double> out;
             out.reserve(s.pairs.size());
             for (const auto& pr : s.pairs) out.push_back(pr.asynchrony_s);
             return out;
           })
      .def("__len__", [](const AsynchronySeries& s) { return s.pairs.size(); });

  py::class_<RelativeAsynchronyCurve>(m, "RelativeAsynchronyCurve")
      .def_readonly("baseline_mean_s", &RelativeAsynchronyCurve::baseline_mean_s)
      .def_property_readonly_static("MIN_OFFSET",
                                    [](py::object) { return RelativeAsynchronyCurve::kMinOffset; })
      .def_property_readonly_static("MAX_OFFSET",
                                    [](py::object) { return RelativeAsynchronyCurve::kMaxOffset; })
      .def("at",
           [](const RelativeAsynchronyCurve& c, int offset) -> py::object {
             const auto v = c.at(offset);
             if (!v) return py::none();
             return py::float_(*v);
           },
           py::arg("offset"));

  py::class_<PreWindowSummary>(m, "PreWindowSummary")
      .def_readonly("mean_asynchrony_s", &PreWindowSummary::mean_asynchrony_s)
      .def_readonly("sd_asynchrony_s", &PreWindowSummary::sd_asynchrony_s)
      .def_readonly("mean_isi_s", &PreWindowSummary::mean_isi_s)
      .def_readonly("sd_isi_s", &PreWindowSummary::sd_isi_s)
      .def_readonly("n_used", &PreWindowSummary::n_used);

  py::class_<PhaseCorrectionParams>(m, "PhaseCorrectionParams")
      .def(py::init([](double correction_gain, double timekeeper_mean_s, double timekeeper_sd_s,
                       double motor_mean_s, double motor_sd_s) {
             PhaseCorrectionParams params;
             params.correction_gain = correction_gain;
             params.timekeeper_mean_s = timekeeper_mean_s;
             params.timekeeper_sd_s = timekeeper_sd_s;
             params.motor_mean_s = motor_mean_s;
             params.motor_sd_s = motor_sd_s;
             params.validate();
             return params;
           }),
           py::arg("correction_gain"), py::arg("timekeeper_mean_s"),
           py::arg("timekeeper_sd_s") = 0.02, py::arg("motor_mean_s") = 0.01,
           py::arg("motor_sd_s") = 0.01)
      .def_readwrite("correction_gain", &PhaseCorrectionParams::correction_gain)
      .def_readwrite("timekeeper_mean_s", &PhaseCorrectionParams::timekeeper_mean_s)
      .def_readwrite("timekeeper_sd_s", &PhaseCorrectionParams::timekeeper_sd_s)
      .def_readwrite("motor_mean_s", &PhaseCorrectionParams::motor_mean_s)
      .def_readwrite("motor_sd_s", &PhaseCorrectionParams::motor_sd_s);

  py::class_<MarkerTrace>(m, "MarkerTrace")
      .def_readonly("sample_rate_hz", &MarkerTrace::sample_rate_hz)
      .def_readonly("timestamps_s", &MarkerTrace::timestamps_s)
      .def_readonly("left_height_m", &MarkerTrace::left_height_m)
      .def_readonly("right_height_m", &MarkerTrace::right_height_m);

  py::class_<AgentRun>(m, "AgentRun")
      .def_readonly("onsets", &AgentRun::onsets)
      .def_readonly("ground_truth", &AgentRun::ground_truth);

  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init([](py::object threshold, double hysteresis, double refractory,
                       bool interpolate) {
             DetectorConfig config;
             if (!threshold.is_none()) config.threshold_height_m = threshold.cast<double>();
             config.hysteresis_fraction = hysteresis;
             config.refractory_s = refractory;
             config.interpolate = interpolate;
             config.validate();
             return config;
           }),
           py::arg("threshold_height_m") = py::none(), py::arg("hysteresis_fraction") = 0.25,
           py::arg("refractory_s") = 0.15, py::arg("interpolate") = true)
      .def_static("for_nominal_isi", &DetectorConfig::for_nominal_isi)
      .def_readwrite("hysteresis_fraction", &DetectorConfig::hysteresis_fraction)
      .def_readwrite("refractory_s", &DetectorConfig::refractory_s)
      .def_readwrite("interpolate", &DetectorConfig::interpolate);

  py::class_<PhaseCorrectionEstimate>(m, "PhaseCorrectionEstimate")
      .def_readonly("correction_gain", &PhaseCorrectionEstimate::correction_gain)
      .def_readonly("residual_variance", &PhaseCorrectionEstimate::residual_variance)
      .def_readonly("timekeeper_var", &PhaseCorrectionEstimate::timekeeper_var)
      .def_readonly("motor_var", &PhaseCorrectionEstimate::motor_var)
      .def_readonly("n_points", &PhaseCorrectionEstimate::n_points)
      .def_readonly("bound_active", &PhaseCorrectionEstimate::bound_active)
      .def("__repr__", [](const PhaseCorrectionEstimate& e) {
        return "PhaseCorrectionEstimate(gain=" + std::to_string(e.correction_gain) +
               ", n=" + std::to_string(e.n_points) + ")";
      });

  py::class_<FitWindow>(m, "FitWindow")
      .def(py::init([](int first, int last) {
             return FitWindow{first, last};
           }),
           py::arg("first"), py::arg("last"))
      .def_static("post_perturbation", &FitWindow::post_perturbation)
      .def_static("whole_trial", &FitWindow::whole_trial, py::arg("cue"),
                  py::arg("exclude_first") = 3)
      .def_readwrite("first", &FitWindow::first)
      .def_readwrite("last", &FitWindow::last);

  py::class_<RegressionBlock>(m, "RegressionBlock")
      .def_readonly("regressor", &RegressionBlock::regressor)
      .def_readonly("response", &RegressionBlock::response);

  // Core operations.
  m.def("compute_isi", &compute_isi, py::arg("onsets"));
  m.def("match_onsets", &match_onsets, py::arg("participant"), py::arg("cue"));
  m.def("unwrap_asynchronies", &unwrap_asynchronies, py::arg("raw"), py::arg("nominal_isi_s"));
  m.def("relative_asynchrony", &relative_asynchrony, py::arg("series"),
        py::arg("perturbed_index"), py::arg("exclude_first") = kDefaultExcludeFirst);
  m.def("summarize_pre_perturbation", &summarize_pre_perturbation, py::arg("series"),
        py::arg("participant_isi"), py::arg("perturbed_index"),
        py::arg("exclude_first") = kDefaultExcludeFirst);

  m.def("generate_cue_schedule", &generate_cue_schedule, py::arg("nominal_isi_s"),
        py::arg("n_steps"), py::arg("perturbation"), py::arg("cue_jitter_sd_s") = 0.0,
        py::arg("seed") = 1);
  m.def("simulate_agent", &simulate_agent, py::arg("params"), py::arg("cue"),
        py::arg("initial_asynchrony_s") = 0.0, py::arg("seed") = 1);
  m.def("synthesize_trace", &synthesize_trace, py::arg("onsets"), py::arg("sample_rate_hz"),
        py::arg("step_amplitude_m"), py::arg("step_duration_s"), py::arg("noise_sd_m") = 0.0,
        py::arg("seed") = 1);
  m.def("preset_params", &preset_params, py::arg("name"), py::arg("tempo_s"));
  m.def("builtin_preset_names", &builtin_preset_names);

  m.def("detect_onsets", &detect_onsets, py::arg("trace"), py::arg("config") = DetectorConfig{},
        py::arg("source") = SourceTag::Participant);
  m.def("resolve_threshold", &resolve_threshold, py::arg("trace"), py::arg("config"));

  m.def("fit_phase_correction",
        py::overload_cast<const AsynchronySeries&, const CueSchedule&>(&fit_phase_correction),
        py::arg("series"), py::arg("cue"));
  m.def("fit_phase_correction",
        py::overload_cast<const AsynchronySeries&, const CueSchedule&, const FitWindow&>(
            &fit_phase_correction),
        py::arg("series"), py::arg("cue"), py::arg("window"));
  m.def("fit_phase_correction_pooled",
        [](const std::vector<RegressionBlock>& blocks) { return fit_phase_correction(blocks); },
        py::arg("blocks"));
  m.def("make_regression_block", &make_regression_block, py::arg("series"), py::arg("cue"),
        py::arg("window"));
  m.def("percent_correction", &percent_correction, py::arg("curve"));

  // Batch harness: config JSON in, results JSON out keeps the surface small.
  m.def("run_experiment_json",
        [](const std::string& config_json, int workers) {
          return results_to_json(run_experiment(config_from_json(config_json), workers));
        },
        py::arg("config_json"), py::arg("workers") = 1);
  m.def("default_config_json", []() { return config_to_json(ExperimentConfig{}); });
  m.def("write_onsets_csv",
        py::overload_cast<const OnsetSeries&, const OnsetSeries&>(&write_onsets_csv),
        py::arg("participant"), py::arg("cue"));
  m.def("schedule_to_json", &schedule_to_json, py::arg("schedule"));

  m.attr("SCHEMA_VERSION") = kSchemaVersion;
  m.attr("__version__") = "0.1.0";
}
