#include "stepsync/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "stepsync/csv_io.hpp"
#include "stepsync/rng.hpp"
#include "stepsync/timing.hpp"

namespace stepsync {

using nlohmann::json;

namespace {

PerturbationSpec::Direction direction_from_string(const std::string& text) {
  if (text == "negative") return PerturbationSpec::Direction::Negative;
  if (text == "positive") return PerturbationSpec::Direction::Positive;
  throw ConfigError("direction must be 'negative' or 'positive', got '" + text + "'");
}

FitWindowMode fit_window_from_string(const std::string& text) {
  if (text == "post_perturbation") return FitWindowMode::PostPerturbation;
  if (text == "whole_trial") return FitWindowMode::WholeTrial;
  throw ConfigError("fit_window must be 'post_perturbation' or 'whole_trial', got '" + text + "'");
}

std::string fit_window_to_string(FitWindowMode mode) {
  return mode == FitWindowMode::PostPerturbation ? "post_perturbation" : "whole_trial";
}

FitWindow make_window(const CueSchedule& cue, const AnalysisOptions& options) {
  return options.fit_window == FitWindowMode::PostPerturbation
             ? FitWindow::post_perturbation(cue)
             : FitWindow::whole_trial(cue, options.exclude_first);
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::optional<double> sem_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return std::nullopt;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (tempos_s.empty()) throw ConfigError("tempos_s: must list at least one tempo");
  for (double t : tempos_s) {
    if (!(t > 0.0)) throw ConfigError("tempos_s: tempos must be positive");
  }
  if (agents.empty()) throw ConfigError("agents: must list at least one agent");
  for (const AgentSpec& agent : agents) {
    if (agent.name.empty()) throw ConfigError("agents[].name: must not be empty");
    for (double t : tempos_s) {
      if (!agent.params) preset_params(agent.name, t);  // throws for unknown names
    }
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t k = i + 1; k < agents.size(); ++k) {
      if (agents[i].name == agents[k].name) {
        throw ConfigError("agents[].name: duplicate preset name '" + agents[i].name + "'");
      }
    }
  }
  if (directions.empty()) throw ConfigError("directions: must list at least one direction");
  if (trials_per_cell < 1) throw ConfigError("trials_per_cell: must be >= 1");
  if (n_steps < 2) throw ConfigError("n_steps: must be >= 2");
  if (!(perturbation_magnitude > 0.0 && perturbation_magnitude < 1.0)) {
    throw ConfigError("perturbation_magnitude: must be in (0, 1)");
  }
  PerturbationSpec spec;
  spec.magnitude = perturbation_magnitude;
  spec.window_lo = perturbation_window_lo;
  spec.window_hi = perturbation_window_hi;
  try {
    spec.validate(n_steps);
  } catch (const Error& e) {
    throw ConfigError(std::string("perturbation_window: ") + e.what());
  }
  if (cue_jitter_sd_s < 0.0) throw ConfigError("cue_jitter_sd_s: must be >= 0");
  if (analysis.exclude_first < 0) throw ConfigError("analysis.exclude_first: must be >= 0");
  if (analysis.max_gaps < 0) throw ConfigError("analysis.max_gaps: must be >= 0");
  if (use_detection) {
    if (!(trace.participant_rate_hz > 0.0) || !(trace.cue_rate_hz > 0.0)) {
      throw ConfigError("trace: sample rates must be positive");
    }
    if (!(trace.amplitude_m > 0.0)) throw ConfigError("trace.amplitude_m: must be positive");
    if (!(trace.step_duration_s > 0.0)) {
      throw ConfigError("trace.step_duration_s: must be positive");
    }
    if (trace.noise_sd_m < 0.0) throw ConfigError("trace.noise_sd_m: must be >= 0");
  }
}

std::string ConditionLabels::cell_id() const {
  std::ostringstream ss;
  ss << "tempo" << static_cast<int>(std::lround(tempo_s * 1000.0)) << "ms_" << agent << "_"
     << to_string(direction);
  return ss.str();
}

namespace {

template <typename T>
T get_field(const json& j, const std::string& path, const char* type_name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": expected " + type_name);
  }
}

void parse_config_fields(const json& j, ExperimentConfig& config);

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  ExperimentConfig config;
  try {
    parse_config_fields(j, config);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

namespace {

void parse_config_fields(const json& j, ExperimentConfig& config) {
  if (j.contains("tempos_s")) {
    config.tempos_s = get_field<std::vector<double>>(j["tempos_s"], "tempos_s", "array of numbers");
  }
  if (j.contains("agents")) {
    config.agents.clear();
    if (!j["agents"].is_array()) throw ConfigError("agents: expected array");
    for (std::size_t i = 0; i < j["agents"].size(); ++i) {
      const json& a = j["agents"][i];
      const std::string path = "agents[" + std::to_string(i) + "]";
      AgentSpec spec;
      if (a.is_string()) {
        spec.name = a.get<std::string>();
      } else if (a.is_object()) {
        if (!a.contains("name")) throw ConfigError(path + ".name: required");
        spec.name = get_field<std::string>(a["name"], path + ".name", "string");
        if (a.contains("correction_gain")) {
          PhaseCorrectionParams params;
          params.correction_gain =
              get_field<double>(a["correction_gain"], path + ".correction_gain", "number");
          params.timekeeper_mean_s = a.value("timekeeper_mean_s", 0.0);  // 0 = use tempo
          params.timekeeper_sd_s = a.value("timekeeper_sd_s", 0.02);
          params.motor_mean_s = a.value("motor_mean_s", 0.01);
          params.motor_sd_s = a.value("motor_sd_s", 0.01);
          spec.params = params;
        }
      } else {
        throw ConfigError(path + ": expected string or object");
      }
      config.agents.push_back(std::move(spec));
    }
  }
  if (j.contains("directions")) {
    config.directions.clear();
    if (!j["directions"].is_array()) throw ConfigError("directions: expected array");
    for (const json& d : j["directions"]) {
      config.directions.push_back(
          direction_from_string(get_field<std::string>(d, "directions[]", "string")));
    }
  }
  if (j.contains("trials_per_cell")) {
    config.trials_per_cell = get_field<int>(j["trials_per_cell"], "trials_per_cell", "integer");
  }
  if (j.contains("n_steps")) config.n_steps = get_field<int>(j["n_steps"], "n_steps", "integer");
  if (j.contains("master_seed")) {
    config.master_seed = get_field<std::uint64_t>(j["master_seed"], "master_seed", "integer");
  }
  if (j.contains("cue_jitter_sd_s")) {
    config.cue_jitter_sd_s = get_field<double>(j["cue_jitter_sd_s"], "cue_jitter_sd_s", "number");
  }
  if (j.contains("perturbation_magnitude")) {
    config.perturbation_magnitude =
        get_field<double>(j["perturbation_magnitude"], "perturbation_magnitude", "number");
  }
  if (j.contains("perturbation_window")) {
    const auto window = get_field<std::vector<int>>(j["perturbation_window"],
                                                    "perturbation_window", "array of 2 integers");
    if (window.size() != 2) throw ConfigError("perturbation_window: expected [lo, hi]");
    config.perturbation_window_lo = window[0];
    config.perturbation_window_hi = window[1];
  }
  if (j.contains("initial_asynchrony_s")) {
    config.initial_asynchrony_s =
        get_field<double>(j["initial_asynchrony_s"], "initial_asynchrony_s", "number");
  }
  if (j.contains("use_detection")) {
    config.use_detection = get_field<bool>(j["use_detection"], "use_detection", "boolean");
  }
  if (j.contains("trace")) {
    const json& t = j["trace"];
    if (!t.is_object()) throw ConfigError("trace: expected object");
    config.trace.participant_rate_hz = t.value("participant_rate_hz", 100.0);
    config.trace.cue_rate_hz = t.value("cue_rate_hz", 75.0);
    config.trace.amplitude_m = t.value("amplitude_m", 0.18);
    config.trace.step_duration_s = t.value("step_duration_s", 0.2);
    config.trace.noise_sd_m = t.value("noise_sd_m", 0.001);
  }
  if (j.contains("exclude_first_steps")) {
    config.analysis.exclude_first =
        get_field<int>(j["exclude_first_steps"], "exclude_first_steps", "integer");
  }
  if (j.contains("max_gaps")) {
    config.analysis.max_gaps = get_field<int>(j["max_gaps"], "max_gaps", "integer");
  }
  if (j.contains("fit_window")) {
    config.analysis.fit_window =
        fit_window_from_string(get_field<std::string>(j["fit_window"], "fit_window", "string"));
  }
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  json agents = json::array();
  for (const AgentSpec& agent : config.agents) {
    if (!agent.params) {
      agents.push_back(agent.name);
    } else {
      agents.push_back({{"name", agent.name},
                        {"correction_gain", agent.params->correction_gain},
                        {"timekeeper_mean_s", agent.params->timekeeper_mean_s},
                        {"timekeeper_sd_s", agent.params->timekeeper_sd_s},
                        {"motor_mean_s", agent.params->motor_mean_s},
                        {"motor_sd_s", agent.params->motor_sd_s}});
    }
  }
  json directions = json::array();
  for (const auto d : config.directions) directions.push_back(to_string(d));

  json j{{"schema_version", kSchemaVersion},
         {"tempos_s", config.tempos_s},
         {"agents", agents},
         {"directions", directions},
         {"trials_per_cell", config.trials_per_cell},
         {"n_steps", config.n_steps},
         {"master_seed", config.master_seed},
         {"cue_jitter_sd_s", config.cue_jitter_sd_s},
         {"perturbation_magnitude", config.perturbation_magnitude},
         {"perturbation_window",
          json::array({config.perturbation_window_lo, config.perturbation_window_hi})},
         {"initial_asynchrony_s", config.initial_asynchrony_s},
         {"use_detection", config.use_detection},
         {"trace",
          {{"participant_rate_hz", config.trace.participant_rate_hz},
           {"cue_rate_hz", config.trace.cue_rate_hz},
           {"amplitude_m", config.trace.amplitude_m},
           {"step_duration_s", config.trace.step_duration_s},
           {"noise_sd_m", config.trace.noise_sd_m}}},
         {"exclude_first_steps", config.analysis.exclude_first},
         {"max_gaps", config.analysis.max_gaps},
         {"fit_window", fit_window_to_string(config.analysis.fit_window)}};
  return j.dump(2);
}

std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& cell_id, int trial_index) {
  return mix_seed(mix_seed(master_seed, hash_label(cell_id)),
                  static_cast<std::uint64_t>(trial_index));
}

namespace {

TrialResult analyze_trial_impl(const OnsetSeries& participant, const CueSchedule& cue,
                               const AnalysisOptions& options,
                               std::optional<RegressionBlock>* block_out) {
  TrialResult result;
  result.perturbed_index = cue.perturbed_index;

  // Realized cue tempo over the pre-perturbation window.
  {
    std::vector<double> pre_intervals;
    const int lo = options.exclude_first + 1;
    const int hi = cue.perturbed_index - 1;
    for (int k = lo; k <= hi && k < static_cast<int>(cue.intervals.intervals_s.size()); ++k) {
      if (k >= 0) pre_intervals.push_back(cue.intervals.intervals_s[static_cast<std::size_t>(k)]);
    }
    if (!pre_intervals.empty()) result.realized_cue_mean_isi_s = mean_of(pre_intervals);
  }

  if (participant.size() < 2) {
    result.excluded = true;
    result.exclusion_reason = "fewer than 2 participant onsets";
    return result;
  }

  const AsynchronySeries raw = match_onsets(participant, cue.onsets);
  const AsynchronySeries series = unwrap_asynchronies(raw, cue.nominal_isi_s);
  result.n_gaps = static_cast<int>(series.gaps.size());

  try {
    const ISISeries participant_isi = compute_isi(participant);
    result.pre = summarize_pre_perturbation(series, participant_isi, cue.perturbed_index,
                                            options.exclude_first);
    result.curve = relative_asynchrony(series, cue.perturbed_index, options.exclude_first);
  } catch (const DataError& e) {
    result.excluded = true;
    result.exclusion_reason = e.what();
    return result;
  }

  if (result.n_gaps > options.max_gaps) {
    result.excluded = true;
    result.exclusion_reason = "more than " + std::to_string(options.max_gaps) + " missed steps (" +
                              std::to_string(result.n_gaps) + " gaps)";
    return result;
  }

  try {
    const RegressionBlock block = make_regression_block(series, cue, make_window(cue, options));
    result.fit = fit_phase_correction(std::span<const RegressionBlock>(&block, 1));
    if (block_out) *block_out = block;
  } catch (const DataError& e) {
    result.excluded = true;
    result.exclusion_reason = std::string("fit failed: ") + e.what();
  }
  return result;
}

}  // namespace

TrialResult analyze_trial(const OnsetSeries& participant, const CueSchedule& cue,
                          const AnalysisOptions& options) {
  return analyze_trial_impl(participant, cue, options, nullptr);
}

namespace {

struct TrialTask {
  std::size_t cell_index;
  int trial_index;
  ConditionLabels labels;
  PhaseCorrectionParams params;
  std::uint64_t seed;
};

struct TrialOutcome {
  TrialResult result;
  std::optional<RegressionBlock> block;
};

TrialOutcome run_single_trial(const ExperimentConfig& config, const TrialTask& task) {
  PerturbationSpec perturbation;
  perturbation.direction = task.labels.direction;
  perturbation.magnitude = config.perturbation_magnitude;
  perturbation.window_lo = config.perturbation_window_lo;
  perturbation.window_hi = config.perturbation_window_hi;

  const CueSchedule cue =
      generate_cue_schedule(task.labels.tempo_s, config.n_steps, perturbation,
                            config.cue_jitter_sd_s, mix_seed(task.seed, 1));
  const AgentRun run =
      simulate_agent(task.params, cue, config.initial_asynchrony_s, mix_seed(task.seed, 2));

  TrialOutcome outcome;
  TrialResult& analyzed = outcome.result;
  if (!config.use_detection) {
    analyzed = analyze_trial_impl(run.onsets, cue, config.analysis, &outcome.block);
  } else {
    const TraceOptions& t = config.trace;
    const MarkerTrace participant_trace =
        synthesize_trace(run.onsets, t.participant_rate_hz, t.amplitude_m, t.step_duration_s,
                         t.noise_sd_m, mix_seed(task.seed, 3));
    const MarkerTrace cue_trace = synthesize_trace(
        cue.onsets, t.cue_rate_hz, t.amplitude_m, t.step_duration_s, t.noise_sd_m,
        mix_seed(task.seed, 4));
    DetectorConfig detector = DetectorConfig::for_nominal_isi(task.labels.tempo_s);
    const OnsetSeries participant_onsets =
        detect_onsets(participant_trace, detector, SourceTag::Participant);
    const OnsetSeries cue_onsets = detect_onsets(cue_trace, detector, SourceTag::Cue);

    if (static_cast<int>(cue_onsets.size()) != cue.n_steps) {
      analyzed.excluded = true;
      analyzed.exclusion_reason = "cue detection returned " + std::to_string(cue_onsets.size()) +
                                  " onsets for " + std::to_string(cue.n_steps) + " steps";
      analyzed.perturbed_index = cue.perturbed_index;
    } else {
      CueSchedule detected_cue;
      detected_cue.nominal_isi_s = cue.nominal_isi_s;
      detected_cue.n_steps = cue.n_steps;
      detected_cue.onsets = cue_onsets;
      detected_cue.intervals = compute_isi(cue_onsets);
      detected_cue.perturbation = cue.perturbation;
      detected_cue.perturbed_index = cue.perturbed_index;
      analyzed = analyze_trial_impl(participant_onsets, detected_cue, config.analysis,
                                    &outcome.block);
    }
  }

  analyzed.labels = task.labels;
  analyzed.trial_index = task.trial_index;
  analyzed.seed = task.seed;
  return outcome;
}

}  // namespace

ConditionSummary aggregate(const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw EmptyCell("no trials to aggregate");

  ConditionSummary summary;
  summary.labels = trials.front().labels;

  std::vector<const TrialResult*> included;
  for (const TrialResult& trial : trials) {
    if (trial.excluded) {
      ++summary.n_excluded;
    } else {
      included.push_back(&trial);
    }
  }
  summary.n_included = static_cast<int>(included.size());
  if (included.empty()) {
    throw EmptyCell("all trials excluded in cell " + summary.labels.cell_id());
  }

  std::vector<double> isi, asym, sd_asym, gain;
  for (const TrialResult* trial : included) {
    isi.push_back(trial->pre.mean_isi_s);
    asym.push_back(trial->pre.mean_asynchrony_s);
    sd_asym.push_back(trial->pre.sd_asynchrony_s);
    if (trial->fit) gain.push_back(trial->fit->correction_gain);
  }
  summary.mean_isi_s = mean_of(isi);
  summary.sem_isi_s = sem_of(isi, summary.mean_isi_s);
  summary.mean_asynchrony_s = mean_of(asym);
  summary.sem_asynchrony_s = sem_of(asym, summary.mean_asynchrony_s);
  summary.mean_sd_asynchrony_s = mean_of(sd_asym);
  summary.sem_sd_asynchrony_s = sem_of(sd_asym, summary.mean_sd_asynchrony_s);
  if (!gain.empty()) {
    summary.mean_correction_gain = mean_of(gain);
    summary.sem_correction_gain = sem_of(gain, summary.mean_correction_gain);
  }

  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    std::vector<double> values;
    for (const TrialResult* trial : included) {
      if (trial->curve) {
        if (const auto v = trial->curve->at(offset)) values.push_back(*v);
      }
    }
    CurvePointSummary& point =
        summary.curve[static_cast<std::size_t>(offset - RelativeAsynchronyCurve::kMinOffset)];
    point.n = static_cast<int>(values.size());
    if (!values.empty()) {
      point.mean_s = mean_of(values);
      point.sem_s = sem_of(values, *point.mean_s);
    }
  }
  return summary;
}

ExperimentReport run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  if (workers < 1) throw ConfigError("workers: must be >= 1");

  ExperimentReport report;
  report.config = config;

  std::vector<TrialTask> tasks;
  for (double tempo : config.tempos_s) {
    for (const AgentSpec& agent : config.agents) {
      for (const auto direction : config.directions) {
        ConditionLabels labels{tempo, agent.name, direction};
        PhaseCorrectionParams params =
            agent.params ? *agent.params : preset_params(agent.name, tempo);
        if (agent.params && !(params.timekeeper_mean_s > 0.0)) {
          params.timekeeper_mean_s = tempo;
        }
        params.validate();
        const std::size_t cell_index = report.cells.size();
        report.cells.push_back({labels, {}, {}});
        const std::string cell = labels.cell_id();
        for (int trial = 0; trial < config.trials_per_cell; ++trial) {
          tasks.push_back(
              {cell_index, trial, labels, params, trial_seed(config.master_seed, cell, trial)});
        }
      }
    }
  }

  std::vector<TrialOutcome> results(tasks.size());
  const int n_workers = std::min<int>(workers, static_cast<int>(tasks.size()));
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      results[i] = run_single_trial(config, tasks[i]);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          results[i] = run_single_trial(config, tasks[i]);
        }
      });
    }
    for (auto& thread : pool) thread.join();
  }

  std::vector<std::vector<RegressionBlock>> cell_blocks(report.cells.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i].result.excluded && results[i].block) {
      cell_blocks[tasks[i].cell_index].push_back(std::move(*results[i].block));
    }
    report.cells[tasks[i].cell_index].trials.push_back(std::move(results[i].result));
  }

  for (std::size_t ci = 0; ci < report.cells.size(); ++ci) {
    CellResult& cell = report.cells[ci];
    cell.summary = aggregate(cell.trials);
    if (!cell_blocks[ci].empty()) {
      try {
        cell.summary.pooled_fit = fit_phase_correction(cell_blocks[ci]);
      } catch (const DataError&) {
        // pooled estimate stays absent
      }
    }
  }
  return report;
}

std::string schedule_to_json(const CueSchedule& schedule) {
  json j{{"schema_version", kSchemaVersion},
         {"nominal_isi_s", schedule.nominal_isi_s},
         {"n_steps", schedule.n_steps},
         {"perturbed_index", schedule.perturbed_index},
         {"direction", to_string(schedule.perturbation.direction)},
         {"magnitude", schedule.perturbation.magnitude},
         {"window", json::array({schedule.perturbation.window_lo,
                                 schedule.perturbation.window_hi})}};
  return j.dump(2);
}

CueSchedule schedule_from_json(const std::string& text, const OnsetSeries& cue_onsets) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schedule is not valid JSON: ") + e.what());
  }
  CueSchedule schedule;
  try {
    schedule.nominal_isi_s = j.at("nominal_isi_s").get<double>();
    schedule.n_steps = j.at("n_steps").get<int>();
    schedule.perturbed_index = j.at("perturbed_index").get<int>();
    schedule.perturbation.direction = direction_from_string(j.at("direction").get<std::string>());
    schedule.perturbation.magnitude = j.at("magnitude").get<double>();
    if (j.contains("window")) {
      schedule.perturbation.window_lo = j["window"][0].get<int>();
      schedule.perturbation.window_hi = j["window"][1].get<int>();
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schedule sidecar: ") + e.what());
  }
  schedule.onsets = cue_onsets;
  if (!cue_onsets.empty()) schedule.intervals = compute_isi(cue_onsets);
  return schedule;
}

TrialResult analyze_files(const AnalysisRequest& request) {
  // Participant stream.
  OnsetSeries participant;
  OnsetSeries cue_from_file;
  bool have_cue = false;

  if (request.onsets_path && request.trace_path) {
    throw ValidationError("supply either an onsets file or a trace file, not both");
  }
  if (request.onsets_path) {
    const OnsetFile file = read_onsets_csv_file(*request.onsets_path);
    if (!file.has_participant) {
      throw SchemaError("onsets file contains no participant rows: " + *request.onsets_path);
    }
    participant = file.participant;
    if (file.has_cue) {
      cue_from_file = file.cue;
      have_cue = true;
    }
  } else if (request.trace_path) {
    participant = detect_onsets(read_trace_csv_file(*request.trace_path), request.detector,
                                SourceTag::Participant);
  } else {
    throw ValidationError("no participant input: supply an onsets or trace file");
  }

  // Cue stream: file rows, a cue trace, or a declared metronome.
  if (!have_cue && request.cue_trace_path) {
    cue_from_file = detect_onsets(read_trace_csv_file(*request.cue_trace_path), request.detector,
                                  SourceTag::Cue);
    have_cue = true;
  }
  if (!have_cue && request.metronome_isi_s_text) {
    const double isi = std::stod(*request.metronome_isi_s_text);
    if (!(isi > 0.0)) throw ValidationError("metronome interval must be positive");
    const int n = static_cast<int>(participant.size());
    std::vector<Onset> onsets(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      onsets[static_cast<std::size_t>(k)] = {request.metronome_start_s + k * isi,
                                             k % 2 == 0 ? Foot::Left : Foot::Right};
    }
    cue_from_file = OnsetSeries(std::move(onsets), SourceTag::Cue);
    have_cue = true;
  }
  if (!have_cue) {
    throw MissingCue("no cue stream: provide cue rows, a cue trace, or --metronome-isi");
  }

  // Perturbation record: sidecar or explicit fields.
  CueSchedule schedule;
  if (request.schedule_path) {
    schedule = schedule_from_json(read_text_file(*request.schedule_path), cue_from_file);
  } else {
    if (!request.perturbed_index) {
      throw ValidationError("no perturbation record: provide --schedule or --perturbed-index");
    }
    schedule.onsets = cue_from_file;
    schedule.n_steps = static_cast<int>(cue_from_file.size());
    schedule.intervals = compute_isi(cue_from_file);
    schedule.perturbed_index = *request.perturbed_index;
    schedule.perturbation = request.perturbation;
    if (request.nominal_isi_s) {
      schedule.nominal_isi_s = *request.nominal_isi_s;
    } else if (request.metronome_isi_s_text) {
      schedule.nominal_isi_s = std::stod(*request.metronome_isi_s_text);
    } else {
      // Fall back to the median realized interval.
      std::vector<double> intervals = schedule.intervals.intervals_s;
      const auto mid = intervals.begin() + static_cast<std::ptrdiff_t>(intervals.size() / 2);
      std::nth_element(intervals.begin(), mid, intervals.end());
      schedule.nominal_isi_s = *mid;
    }
  }
  if (schedule.perturbed_index < 0 ||
      schedule.perturbed_index >= static_cast<int>(schedule.intervals.intervals_s.size())) {
    throw ValidationError("perturbed index lies outside the cue schedule");
  }

  return analyze_trial(participant, schedule, request.options);
}

}  // namespace stepsync
