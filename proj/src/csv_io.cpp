#include "stepsync/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace stepsync {

namespace {

std::string format_time(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", value);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, int line_no, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line_no) + ": column '" + column +
                      "' is not a finite number: '" + text + "'");
  }
}

// Reads the optional `# schema_version: N` comment and the header row,
// checking column names. Returns the line number of the header.
int consume_header(std::istream& in, const std::string& expected, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') continue;  // schema comment
    if (line != expected) {
      const auto got = split_fields(line);
      const auto want = split_fields(expected);
      for (std::size_t i = 0; i < want.size(); ++i) {
        if (i >= got.size() || got[i] != want[i]) {
          throw SchemaError("line " + std::to_string(line_no) + ": expected column '" + want[i] +
                            "', got '" + (i < got.size() ? got[i] : "") + "'");
        }
      }
      throw SchemaError("line " + std::to_string(line_no) + ": unexpected extra columns");
    }
    return line_no;
  }
  throw SchemaError("missing header row");
}

Foot parse_foot(const std::string& text, int line_no) {
  if (text == "L") return Foot::Left;
  if (text == "R") return Foot::Right;
  throw SchemaError("line " + std::to_string(line_no) + ": column 'foot' must be L or R, got '" +
                    text + "'");
}

}  // namespace

std::string write_onsets_csv(const OnsetSeries& series) {
  std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "onset_time_s,foot,source\n";
  const std::string source = to_string(series.source());
  for (const Onset& onset : series.onsets()) {
    out += format_time(onset.time_s) + "," + to_string(onset.foot) + "," + source + "\n";
  }
  return out;
}

std::string write_onsets_csv(const OnsetSeries& participant, const OnsetSeries& cue) {
  std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "onset_time_s,foot,source\n";
  // Stable source blocks: cue first, then participant.
  for (const Onset& onset : cue.onsets()) {
    out += format_time(onset.time_s) + "," + to_string(onset.foot) + ",cue\n";
  }
  for (const Onset& onset : participant.onsets()) {
    out += format_time(onset.time_s) + "," + to_string(onset.foot) + ",participant\n";
  }
  return out;
}

OnsetFile read_onsets_csv(std::istream& in) {
  int line_no = 0;
  consume_header(in, "onset_time_s,foot,source", line_no);

  std::vector<Onset> participant;
  std::vector<Onset> cue;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                        std::to_string(fields.size()));
    }
    const double t = parse_double(fields[0], line_no, "onset_time_s");
    const Foot foot = parse_foot(fields[1], line_no);
    if (fields[2] == "participant") {
      participant.push_back({t, foot});
    } else if (fields[2] == "cue") {
      cue.push_back({t, foot});
    } else {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": column 'source' must be participant or cue, got '" + fields[2] + "'");
    }
  }

  OnsetFile file;
  file.has_participant = !participant.empty();
  file.has_cue = !cue.empty();
  file.participant = OnsetSeries(std::move(participant), SourceTag::Participant);
  file.cue = OnsetSeries(std::move(cue), SourceTag::Cue);
  return file;
}

OnsetFile read_onsets_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open onsets file: " + path);
  return read_onsets_csv(in);
}

std::string write_trace_csv(const MarkerTrace& trace) {
  std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "time_s,heel_y_m,foot\n";
  for (std::size_t i = 0; i < trace.timestamps_s.size(); ++i) {
    const std::string t = format_time(trace.timestamps_s[i]);
    out += t + "," + format_time(trace.left_height_m[i]) + ",L\n";
    out += t + "," + format_time(trace.right_height_m[i]) + ",R\n";
  }
  return out;
}

MarkerTrace read_trace_csv(std::istream& in) {
  int line_no = 0;
  consume_header(in, "time_s,heel_y_m,foot", line_no);

  std::vector<double> t_left, t_right;
  MarkerTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                        std::to_string(fields.size()));
    }
    const double t = parse_double(fields[0], line_no, "time_s");
    const double y = parse_double(fields[1], line_no, "heel_y_m");
    if (parse_foot(fields[2], line_no) == Foot::Left) {
      t_left.push_back(t);
      trace.left_height_m.push_back(y);
    } else {
      t_right.push_back(t);
      trace.right_height_m.push_back(y);
    }
  }
  if (t_left.size() != t_right.size()) {
    throw MalformedTrace("left and right channels have different sample counts");
  }
  if (t_left.size() < 2) throw MalformedTrace("trace needs at least 2 samples per foot");
  for (std::size_t i = 0; i < t_left.size(); ++i) {
    if (t_left[i] != t_right[i]) {
      throw MalformedTrace("left and right channels are not on a shared sample grid");
    }
  }
  trace.timestamps_s = std::move(t_left);
  trace.sample_rate_hz = 1.0 / (trace.timestamps_s[1] - trace.timestamps_s[0]);
  return trace;
}

MarkerTrace read_trace_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file: " + path);
  return read_trace_csv(in);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stepsync
