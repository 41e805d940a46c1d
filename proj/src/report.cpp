#include "stepsync/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "stepsync/csv_io.hpp"

namespace stepsync {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

json curve_to_json(const RelativeAsynchronyCurve& curve) {
  json values = json::array();
  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    values.push_back(optional_number(curve.at(offset)));
  }
  return json{{"baseline_mean_s", curve.baseline_mean_s},
              {"first_offset", RelativeAsynchronyCurve::kMinOffset},
              {"values_s", values}};
}

RelativeAsynchronyCurve curve_from_json(const json& j) {
  RelativeAsynchronyCurve curve;
  curve.baseline_mean_s = j.at("baseline_mean_s").get<double>();
  const json& values = j.at("values_s");
  for (int k = 0; k < RelativeAsynchronyCurve::kSize; ++k) {
    const json& v = values.at(static_cast<std::size_t>(k));
    if (!v.is_null()) {
      curve.set(RelativeAsynchronyCurve::kMinOffset + k, v.get<double>());
    }
  }
  return curve;
}

json fit_to_json(const PhaseCorrectionEstimate& fit) {
  return json{{"correction_gain", fit.correction_gain},
              {"residual_variance", fit.residual_variance},
              {"timekeeper_var", optional_number(fit.timekeeper_var)},
              {"motor_var", optional_number(fit.motor_var)},
              {"n_points", fit.n_points},
              {"bound_active", fit.bound_active}};
}

PhaseCorrectionEstimate fit_from_json(const json& j) {
  PhaseCorrectionEstimate fit;
  fit.correction_gain = j.at("correction_gain").get<double>();
  fit.residual_variance = j.at("residual_variance").get<double>();
  if (!j.at("timekeeper_var").is_null()) fit.timekeeper_var = j["timekeeper_var"].get<double>();
  if (!j.at("motor_var").is_null()) fit.motor_var = j["motor_var"].get<double>();
  fit.n_points = j.at("n_points").get<int>();
  fit.bound_active = j.at("bound_active").get<bool>();
  return fit;
}

json labels_to_json(const ConditionLabels& labels) {
  return json{{"tempo_s", labels.tempo_s},
              {"agent", labels.agent},
              {"direction", to_string(labels.direction)}};
}

ConditionLabels labels_from_json(const json& j) {
  ConditionLabels labels;
  labels.tempo_s = j.at("tempo_s").get<double>();
  labels.agent = j.at("agent").get<std::string>();
  labels.direction = j.at("direction").get<std::string>() == "negative"
                         ? PerturbationSpec::Direction::Negative
                         : PerturbationSpec::Direction::Positive;
  return labels;
}

json trial_to_json(const TrialResult& trial) {
  json j{{"trial_index", trial.trial_index},
         {"seed", trial.seed},
         {"perturbed_index", trial.perturbed_index},
         {"excluded", trial.excluded},
         {"exclusion_reason", trial.exclusion_reason},
         {"n_gaps", trial.n_gaps},
         {"realized_cue_mean_isi_s", trial.realized_cue_mean_isi_s},
         {"mean_asynchrony_s", trial.pre.mean_asynchrony_s},
         {"sd_asynchrony_s", trial.pre.sd_asynchrony_s},
         {"mean_isi_s", trial.pre.mean_isi_s},
         {"sd_isi_s", trial.pre.sd_isi_s},
         {"n_pre_window", trial.pre.n_used}};
  j["curve"] = trial.curve ? curve_to_json(*trial.curve) : json(nullptr);
  j["fit"] = trial.fit ? fit_to_json(*trial.fit) : json(nullptr);
  return j;
}

TrialResult trial_from_json(const json& j, const ConditionLabels& labels) {
  TrialResult trial;
  trial.labels = labels;
  trial.trial_index = j.at("trial_index").get<int>();
  trial.seed = j.at("seed").get<std::uint64_t>();
  trial.perturbed_index = j.at("perturbed_index").get<int>();
  trial.excluded = j.at("excluded").get<bool>();
  trial.exclusion_reason = j.at("exclusion_reason").get<std::string>();
  trial.n_gaps = j.at("n_gaps").get<int>();
  trial.realized_cue_mean_isi_s = j.at("realized_cue_mean_isi_s").get<double>();
  trial.pre.mean_asynchrony_s = j.at("mean_asynchrony_s").get<double>();
  trial.pre.sd_asynchrony_s = j.at("sd_asynchrony_s").get<double>();
  trial.pre.mean_isi_s = j.at("mean_isi_s").get<double>();
  trial.pre.sd_isi_s = j.at("sd_isi_s").get<double>();
  trial.pre.n_used = j.at("n_pre_window").get<int>();
  if (!j.at("curve").is_null()) trial.curve = curve_from_json(j["curve"]);
  if (!j.at("fit").is_null()) trial.fit = fit_from_json(j["fit"]);
  return trial;
}

json summary_to_json(const ConditionSummary& summary) {
  json curve = json::array();
  for (const CurvePointSummary& point : summary.curve) {
    curve.push_back({{"mean_s", optional_number(point.mean_s)},
                     {"sem_s", optional_number(point.sem_s)},
                     {"n", point.n}});
  }
  return json{{"n_included", summary.n_included},
              {"n_excluded", summary.n_excluded},
              {"mean_isi_s", summary.mean_isi_s},
              {"sem_isi_s", optional_number(summary.sem_isi_s)},
              {"mean_asynchrony_s", summary.mean_asynchrony_s},
              {"sem_asynchrony_s", optional_number(summary.sem_asynchrony_s)},
              {"mean_sd_asynchrony_s", summary.mean_sd_asynchrony_s},
              {"sem_sd_asynchrony_s", optional_number(summary.sem_sd_asynchrony_s)},
              {"mean_correction_gain", summary.mean_correction_gain},
              {"sem_correction_gain", optional_number(summary.sem_correction_gain)},
              {"pooled_fit", summary.pooled_fit ? fit_to_json(*summary.pooled_fit) : json(nullptr)},
              {"curve", curve}};
}

ConditionSummary summary_from_json(const json& j, const ConditionLabels& labels) {
  ConditionSummary summary;
  summary.labels = labels;
  summary.n_included = j.at("n_included").get<int>();
  summary.n_excluded = j.at("n_excluded").get<int>();
  summary.mean_isi_s = j.at("mean_isi_s").get<double>();
  summary.mean_asynchrony_s = j.at("mean_asynchrony_s").get<double>();
  summary.mean_sd_asynchrony_s = j.at("mean_sd_asynchrony_s").get<double>();
  summary.mean_correction_gain = j.at("mean_correction_gain").get<double>();
  auto opt = [&](const char* key) -> std::optional<double> {
    if (j.at(key).is_null()) return std::nullopt;
    return j[key].get<double>();
  };
  summary.sem_isi_s = opt("sem_isi_s");
  summary.sem_asynchrony_s = opt("sem_asynchrony_s");
  summary.sem_sd_asynchrony_s = opt("sem_sd_asynchrony_s");
  summary.sem_correction_gain = opt("sem_correction_gain");
  if (!j.at("pooled_fit").is_null()) summary.pooled_fit = fit_from_json(j["pooled_fit"]);
  const json& curve = j.at("curve");
  for (std::size_t k = 0; k < summary.curve.size(); ++k) {
    const json& p = curve.at(k);
    CurvePointSummary point;
    if (!p.at("mean_s").is_null()) point.mean_s = p["mean_s"].get<double>();
    if (!p.at("sem_s").is_null()) point.sem_s = p["sem_s"].get<double>();
    point.n = p.at("n").get<int>();
    summary.curve[k] = point;
  }
  return summary;
}

std::string format_csv_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", value);
  return buf;
}

}  // namespace

std::string results_to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const CellResult& cell : report.cells) {
    json trials = json::array();
    for (const TrialResult& trial : cell.trials) trials.push_back(trial_to_json(trial));
    cells.push_back({{"cell_id", cell.labels.cell_id()},
                     {"labels", labels_to_json(cell.labels)},
                     {"summary", summary_to_json(cell.summary)},
                     {"trials", trials}});
  }
  json j{{"schema_version", kSchemaVersion},
         {"kind", "stepsync_results"},
         {"config", json::parse(config_to_json(report.config))},
         {"cells", cells}};
  return j.dump(2) + "\n";
}

ExperimentReport results_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("results file is not valid JSON: ") + e.what());
  }
  if (j.value("kind", "") != "stepsync_results") {
    throw SchemaError("results file: missing kind 'stepsync_results'");
  }
  ExperimentReport report;
  try {
    report.config = config_from_json(j.at("config").dump());
    for (const json& c : j.at("cells")) {
      CellResult cell;
      cell.labels = labels_from_json(c.at("labels"));
      cell.summary = summary_from_json(c.at("summary"), cell.labels);
      for (const json& t : c.at("trials")) {
        cell.trials.push_back(trial_from_json(t, cell.labels));
      }
      report.cells.push_back(std::move(cell));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("results file: ") + e.what());
  }
  return report;
}

std::string curve_csv(const ConditionSummary& summary) {
  std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "# cell: " + summary.labels.cell_id() + "\n";
  out += "offset,mean_rel_asynchrony_s,sem_s,n\n";
  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    const CurvePointSummary& point =
        summary.curve[static_cast<std::size_t>(offset - RelativeAsynchronyCurve::kMinOffset)];
    out += std::to_string(offset) + ",";
    out += point.mean_s ? format_csv_number(*point.mean_s) : "";
    out += ",";
    out += point.sem_s ? format_csv_number(*point.sem_s) : "";
    out += "," + std::to_string(point.n) + "\n";
  }
  return out;
}

std::string curve_svg(const ConditionSummary& summary) {
  constexpr double kWidth = 520.0, kHeight = 340.0;
  constexpr double kLeft = 64.0, kRight = 16.0, kTop = 40.0, kBottom = 48.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double y_max = 0.02;
  for (const CurvePointSummary& point : summary.curve) {
    if (point.mean_s) {
      const double extent = std::abs(*point.mean_s) + (point.sem_s ? *point.sem_s : 0.0);
      y_max = std::max(y_max, extent);
    }
  }
  y_max *= 1.15;

  auto x_of = [&](double offset) {
    return kLeft + (offset - RelativeAsynchronyCurve::kMinOffset) /
                       static_cast<double>(RelativeAsynchronyCurve::kSize - 1) * plot_w;
  };
  auto y_of = [&](double value) { return kTop + (y_max - value) / (2.0 * y_max) * plot_h; };

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth) + "' height='" +
         num(kHeight) + "' viewBox='0 0 " + num(kWidth) + " " + num(kHeight) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='white'/>\n";
  svg += "<text x='" + num(kWidth / 2) + "' y='20' text-anchor='middle' font-size='14'>" +
         summary.labels.cell_id() + "</text>\n";

  // perturbation marker at offset 0 and dashed zero reference
  svg += "<line x1='" + num(x_of(0)) + "' y1='" + num(kTop) + "' x2='" + num(x_of(0)) + "' y2='" +
         num(kTop + plot_h) + "' stroke='#bbbbbb' stroke-width='6' opacity='0.6'/>\n";
  svg += "<line x1='" + num(kLeft) + "' y1='" + num(y_of(0)) + "' x2='" + num(kLeft + plot_w) +
         "' y2='" + num(y_of(0)) + "' stroke='black' stroke-dasharray='5,4' stroke-width='1'/>\n";

  // axes
  svg += "<line x1='" + num(kLeft) + "' y1='" + num(kTop) + "' x2='" + num(kLeft) + "' y2='" +
         num(kTop + plot_h) + "' stroke='black'/>\n";
  svg += "<line x1='" + num(kLeft) + "' y1='" + num(kTop + plot_h) + "' x2='" +
         num(kLeft + plot_w) + "' y2='" + num(kTop + plot_h) + "' stroke='black'/>\n";
  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    const std::string label = offset == 0 ? "T" : (offset > 0 ? "T+" : "T") + std::to_string(offset);
    svg += "<text x='" + num(x_of(offset)) + "' y='" + num(kTop + plot_h + 18) +
           "' text-anchor='middle' font-size='10'>" + label + "</text>\n";
  }
  for (double frac : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const double v = frac * y_max;
    svg += "<text x='" + num(kLeft - 8) + "' y='" + num(y_of(v) + 3) +
           "' text-anchor='end' font-size='10'>" + num(v * 1000.0) + "</text>\n";
  }
  svg += "<text x='14' y='" + num(kTop + plot_h / 2) + "' font-size='11' transform='rotate(-90 14 " +
         num(kTop + plot_h / 2) + ")' text-anchor='middle'>relative asynchrony (ms)</text>\n";
  svg += "<text x='" + num(kLeft + plot_w / 2) + "' y='" + num(kHeight - 10) +
         "' text-anchor='middle' font-size='11'>step offset</text>\n";

  // SEM bars then the mean polyline
  std::string points;
  for (int offset = RelativeAsynchronyCurve::kMinOffset;
       offset <= RelativeAsynchronyCurve::kMaxOffset; ++offset) {
    const CurvePointSummary& point =
        summary.curve[static_cast<std::size_t>(offset - RelativeAsynchronyCurve::kMinOffset)];
    if (!point.mean_s) continue;
    const double x = x_of(offset);
    const double y = y_of(*point.mean_s);
    if (point.sem_s) {
      const double y0 = y_of(*point.mean_s - *point.sem_s);
      const double y1 = y_of(*point.mean_s + *point.sem_s);
      svg += "<line x1='" + num(x) + "' y1='" + num(y0) + "' x2='" + num(x) + "' y2='" + num(y1) +
             "' stroke='#d04040' stroke-width='1.2'/>\n";
    }
    svg += "<circle cx='" + num(x) + "' cy='" + num(y) + "' r='3' fill='#d04040'/>\n";
    points += num(x) + "," + num(y) + " ";
  }
  if (!points.empty()) {
    svg += "<polyline points='" + points + "' fill='none' stroke='#d04040' stroke-width='1.5'/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& out_dir,
                                     const std::vector<ReportFormat>& formats) {
  std::vector<std::string> written;
  if (formats.empty()) return written;
  if (report.cells.empty()) throw DataError("report contains no cells");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory: " + out_dir + " (" + ec.message() + ")");

  const bool want_csv =
      std::find(formats.begin(), formats.end(), ReportFormat::CurveCsv) != formats.end();
  const bool want_svg =
      std::find(formats.begin(), formats.end(), ReportFormat::Svg) != formats.end();

  for (const CellResult& cell : report.cells) {
    const std::string stem = cell.labels.cell_id();
    if (want_csv) {
      const std::string path = out_dir + "/curve_" + stem + ".csv";
      write_text_file(path, curve_csv(cell.summary));
      written.push_back(path);
    }
    if (want_svg) {
      const std::string path = out_dir + "/response_" + stem + ".svg";
      write_text_file(path, curve_svg(cell.summary));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace stepsync
