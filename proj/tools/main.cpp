// stepsync command-line interface.
//
// Subcommands:
//   simulate  generate a cue schedule and a simulated responder, write CSVs
//   detect    extract step onsets from a heel-height trace CSV
//   analyze   run the analysis pipeline on exported files
//   run       run a full experiment grid from a config file
//   report    re-render curve CSVs and plots from a results file
//
// Exit codes: 0 success, 1 invalid configuration/arguments, 2 data error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "stepsync/csv_io.hpp"
#include "stepsync/harness.hpp"
#include "stepsync/report.hpp"
#include "stepsync/rng.hpp"
#include "stepsync/timing.hpp"

namespace {

using namespace stepsync;
using nlohmann::json;

std::vector<ReportFormat> parse_formats(const std::string& text) {
  if (text == "none") return {};
  if (text == "csv") return {ReportFormat::CurveCsv};
  if (text == "svg") return {ReportFormat::Svg};
  if (text == "all") return {ReportFormat::CurveCsv, ReportFormat::Svg};
  throw ValidationError("--format must be csv, svg, all or none");
}

PerturbationSpec::Direction parse_direction(const std::string& text) {
  if (text == "negative") return PerturbationSpec::Direction::Negative;
  if (text == "positive") return PerturbationSpec::Direction::Positive;
  throw ValidationError("--direction must be negative or positive");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory: " + dir + " (" + ec.message() + ")");
}

struct SimulateArgs {
  double isi = 0.8;
  int steps = 30;
  std::string direction = "negative";
  double magnitude = 0.15;
  std::pair<int, int> window{10, 16};
  std::string preset = "AuditoryVisual";
  std::optional<double> gain;
  double sigma_timekeeper = 0.02;
  double sigma_motor = 0.01;
  double jitter = 0.0;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool traces = false;
  double participant_rate = 100.0;
  double cue_rate = 75.0;
  double amplitude = 0.18;
  double duration = 0.2;
  double trace_noise = 0.001;
};

int cmd_simulate(const SimulateArgs& args) {
  PerturbationSpec perturbation;
  perturbation.direction = parse_direction(args.direction);
  perturbation.magnitude = args.magnitude;
  perturbation.window_lo = args.window.first;
  perturbation.window_hi = args.window.second;

  const CueSchedule cue =
      generate_cue_schedule(args.isi, args.steps, perturbation, args.jitter, mix_seed(args.seed, 1));

  PhaseCorrectionParams params;
  if (args.gain) {
    params.correction_gain = *args.gain;
    params.timekeeper_mean_s = args.isi;
    params.timekeeper_sd_s = args.sigma_timekeeper;
    params.motor_sd_s = args.sigma_motor;
  } else {
    params = preset_params(args.preset, args.isi);
  }
  const AgentRun run = simulate_agent(params, cue, 0.0, mix_seed(args.seed, 2));

  ensure_dir(args.out);
  write_text_file(args.out + "/onsets.csv", write_onsets_csv(run.onsets, cue.onsets));
  write_text_file(args.out + "/schedule.json", schedule_to_json(cue));
  if (args.traces) {
    const MarkerTrace participant_trace =
        synthesize_trace(run.onsets, args.participant_rate, args.amplitude, args.duration,
                         args.trace_noise, mix_seed(args.seed, 3));
    const MarkerTrace cue_trace = synthesize_trace(
        cue.onsets, args.cue_rate, args.amplitude, args.duration, args.trace_noise,
        mix_seed(args.seed, 4));
    write_text_file(args.out + "/trace_participant.csv", write_trace_csv(participant_trace));
    write_text_file(args.out + "/trace_cue.csv", write_trace_csv(cue_trace));
  }
  std::cout << "wrote " << args.out << "/onsets.csv (perturbed interval "
            << cue.perturbed_index << ")\n";
  return 0;
}

json trial_result_json(const TrialResult& result) {
  json j{{"excluded", result.excluded},
         {"exclusion_reason", result.exclusion_reason},
         {"perturbed_index", result.perturbed_index},
         {"n_gaps", result.n_gaps},
         {"n_pre_window", result.pre.n_used},
         {"mean_asynchrony_s", result.pre.mean_asynchrony_s},
         {"sd_asynchrony_s", result.pre.sd_asynchrony_s},
         {"mean_isi_s", result.pre.mean_isi_s},
         {"sd_isi_s", result.pre.sd_isi_s},
         {"realized_cue_mean_isi_s", result.realized_cue_mean_isi_s}};
  if (result.curve) {
    json values = json::array();
    for (int offset = RelativeAsynchronyCurve::kMinOffset;
         offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
      const auto v = result.curve->at(offset);
      values.push_back(v ? json(*v) : json(nullptr));
    }
    j["curve"] = {{"baseline_mean_s", result.curve->baseline_mean_s},
                  {"first_offset", RelativeAsynchronyCurve::kMinOffset},
                  {"values_s", values}};
  } else {
    j["curve"] = nullptr;
  }
  if (result.fit) {
    j["fit"] = {{"correction_gain", result.fit->correction_gain},
                {"residual_variance", result.fit->residual_variance},
                {"n_points", result.fit->n_points},
                {"bound_active", result.fit->bound_active}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stepping synchronization simulation and analysis"};
  app.require_subcommand(1);

  // ---- simulate ----
  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate schedules, onsets and traces");
  simulate_cmd->add_option("--isi", sim.isi, "nominal inter-step interval in seconds");
  simulate_cmd->add_option("--steps", sim.steps, "number of cue steps");
  simulate_cmd->add_option("--direction", sim.direction, "perturbation direction");
  simulate_cmd->add_option("--magnitude", sim.magnitude, "perturbation fraction");
  simulate_cmd->add_option("--window", sim.window, "perturbation placement window (lo hi)");
  simulate_cmd->add_option("--preset", sim.preset, "agent preset name");
  double gain_opt = -1.0;
  auto* gain_flag = simulate_cmd->add_option("--gain", gain_opt, "explicit correction gain");
  simulate_cmd->add_option("--sigma-timekeeper", sim.sigma_timekeeper, "timekeeper noise SD (s)");
  simulate_cmd->add_option("--sigma-motor", sim.sigma_motor, "motor noise SD (s)");
  simulate_cmd->add_option("--jitter", sim.jitter, "cue interval jitter SD (s)");
  simulate_cmd->add_option("--seed", sim.seed, "random seed");
  simulate_cmd->add_option("--out", sim.out, "output directory");
  simulate_cmd->add_flag("--traces", sim.traces, "also write synthetic heel traces");
  simulate_cmd->add_option("--participant-rate", sim.participant_rate, "participant trace Hz");
  simulate_cmd->add_option("--cue-rate", sim.cue_rate, "cue trace Hz");
  simulate_cmd->add_option("--amplitude", sim.amplitude, "bump amplitude (m)");
  simulate_cmd->add_option("--duration", sim.duration, "bump duration (s)");
  simulate_cmd->add_option("--trace-noise", sim.trace_noise, "trace noise SD (m)");

  // ---- detect ----
  std::string detect_trace, detect_out = "-", detect_source = "participant";
  DetectorConfig detector;
  double detect_threshold = 0.0;
  bool no_interpolate = false;
  auto* detect_cmd = app.add_subcommand("detect", "extract onsets from a trace CSV");
  detect_cmd->add_option("--trace", detect_trace, "input trace CSV")->required();
  detect_cmd->add_option("--out", detect_out, "output onsets CSV ('-' for stdout)");
  auto* thr_flag = detect_cmd->add_option("--threshold", detect_threshold, "threshold height (m)");
  detect_cmd->add_option("--hysteresis", detector.hysteresis_fraction, "hysteresis fraction");
  detect_cmd->add_option("--refractory", detector.refractory_s, "refractory window (s)");
  detect_cmd->add_flag("--no-interpolate", no_interpolate, "snap onsets to the sample grid");
  detect_cmd->add_option("--source", detect_source, "output source tag (participant|cue)");

  // ---- analyze ----
  AnalysisRequest request;
  std::string an_onsets, an_trace, an_cue_trace, an_schedule, an_metronome, an_out = "-";
  int an_perturbed = -1;
  double an_nominal = 0.0;
  std::string an_direction = "negative";
  double an_magnitude = 0.15;
  std::string an_fit_window = "post_perturbation";
  double an_threshold = 0.0;
  bool an_no_interp = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "analyze exported onset/trace files");
  analyze_cmd->add_option("--onsets", an_onsets, "onsets CSV (participant and optional cue rows)");
  analyze_cmd->add_option("--trace", an_trace, "participant trace CSV");
  analyze_cmd->add_option("--cue-trace", an_cue_trace, "cue trace CSV");
  analyze_cmd->add_option("--metronome-isi", an_metronome, "declare the cue as a nominal metronome (s)");
  analyze_cmd->add_option("--metronome-start", request.metronome_start_s, "metronome start time (s)");
  analyze_cmd->add_option("--schedule", an_schedule, "schedule sidecar JSON");
  analyze_cmd->add_option("--perturbed-index", an_perturbed, "perturbed interval index");
  analyze_cmd->add_option("--nominal-isi", an_nominal, "nominal interval (s)");
  analyze_cmd->add_option("--direction", an_direction, "perturbation direction");
  analyze_cmd->add_option("--magnitude", an_magnitude, "perturbation fraction");
  analyze_cmd->add_option("--exclude-first", request.options.exclude_first, "steps dropped at trial start");
  analyze_cmd->add_option("--max-gaps", request.options.max_gaps, "missed steps before exclusion");
  analyze_cmd->add_option("--fit-window", an_fit_window, "post_perturbation|whole_trial");
  auto* an_thr_flag = analyze_cmd->add_option("--threshold", an_threshold, "detector threshold (m)");
  analyze_cmd->add_flag("--no-interpolate", an_no_interp, "snap onsets to the sample grid");
  analyze_cmd->add_option("--out", an_out, "output TrialResult JSON ('-' for stdout)");

  // ---- run ----
  std::string run_config, run_out = "out", run_format = "all";
  std::uint64_t run_seed = 0;
  int run_workers = 1;
  auto* run_cmd = app.add_subcommand("run", "run a full experiment from a config file");
  run_cmd->add_option("--config", run_config, "experiment config JSON")->required();
  auto* seed_flag = run_cmd->add_option("--seed", run_seed, "override the config master seed");
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_option("--format", run_format, "artifact formats: csv|svg|all|none");
  run_cmd->add_option("--workers", run_workers, "worker threads");

  // ---- report ----
  std::string rep_results, rep_out = "out", rep_format = "all";
  auto* report_cmd = app.add_subcommand("report", "render artifacts from a results file");
  report_cmd->add_option("--results", rep_results, "results JSON from 'run'")->required();
  report_cmd->add_option("--out", rep_out, "output directory");
  report_cmd->add_option("--format", rep_format, "artifact formats: csv|svg|all|none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate_cmd->parsed()) {
      if (gain_flag->count() > 0) sim.gain = gain_opt;
      return cmd_simulate(sim);
    }

    if (detect_cmd->parsed()) {
      if (thr_flag->count() > 0) detector.threshold_height_m = detect_threshold;
      detector.interpolate = !no_interpolate;
      const SourceTag source =
          detect_source == "cue" ? SourceTag::Cue : SourceTag::Participant;
      const OnsetSeries onsets =
          detect_onsets(read_trace_csv_file(detect_trace), detector, source);
      const std::string csv = write_onsets_csv(onsets);
      if (detect_out == "-") {
        std::cout << csv;
      } else {
        write_text_file(detect_out, csv);
        std::cout << "wrote " << detect_out << " (" << onsets.size() << " onsets)\n";
      }
      return 0;
    }

    if (analyze_cmd->parsed()) {
      if (!an_onsets.empty()) request.onsets_path = an_onsets;
      if (!an_trace.empty()) request.trace_path = an_trace;
      if (!an_cue_trace.empty()) request.cue_trace_path = an_cue_trace;
      if (!an_metronome.empty()) request.metronome_isi_s_text = an_metronome;
      if (!an_schedule.empty()) request.schedule_path = an_schedule;
      if (an_perturbed >= 0) request.perturbed_index = an_perturbed;
      if (an_nominal > 0.0) request.nominal_isi_s = an_nominal;
      request.perturbation.direction = parse_direction(an_direction);
      request.perturbation.magnitude = an_magnitude;
      request.options.fit_window = an_fit_window == "whole_trial"
                                       ? FitWindowMode::WholeTrial
                                       : FitWindowMode::PostPerturbation;
      if (an_thr_flag->count() > 0) request.detector.threshold_height_m = an_threshold;
      request.detector.interpolate = !an_no_interp;

      const TrialResult result = analyze_files(request);
      const std::string text = trial_result_json(result).dump(2) + "\n";
      if (an_out == "-") {
        std::cout << text;
      } else {
        write_text_file(an_out, text);
        std::cout << "wrote " << an_out << "\n";
      }
      return result.excluded ? 2 : 0;
    }

    if (run_cmd->parsed()) {
      ExperimentConfig config = config_from_json(read_text_file(run_config));
      if (seed_flag->count() > 0) config.master_seed = run_seed;
      const ExperimentReport report = run_experiment(config, run_workers);
      ensure_dir(run_out);
      const std::string results_path = run_out + "/results.json";
      write_text_file(results_path, results_to_json(report));
      const auto written = emit_report(report, run_out, parse_formats(run_format));
      std::cout << "wrote " << results_path << " and " << written.size()
                << " artifact file(s)\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      const ExperimentReport report = results_from_json(read_text_file(rep_results));
      const auto written = emit_report(report, rep_out, parse_formats(rep_format));
      std::cout << "wrote " << written.size() << " artifact file(s) to " << rep_out << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
