#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "stepsync/simulate.hpp"
#include "stepsync/types.hpp"

namespace stepsync {

inline constexpr int kSchemaVersion = 1;

/// Onsets CSV: one row per onset, header `onset_time_s,foot,source`, preceded
/// by a `# schema_version: N` comment line. foot is L or R, source is
/// participant or cue. Times carry 9 decimal digits.
struct OnsetFile {
  OnsetSeries participant;
  OnsetSeries cue;
  bool has_participant = false;
  bool has_cue = false;
};

std::string write_onsets_csv(const OnsetSeries& series);
std::string write_onsets_csv(const OnsetSeries& participant, const OnsetSeries& cue);
OnsetFile read_onsets_csv(std::istream& in);
OnsetFile read_onsets_csv_file(const std::string& path);

/// Trace CSV: header `time_s,heel_y_m,foot`, rows interleaved L/R per sample.
std::string write_trace_csv(const MarkerTrace& trace);
MarkerTrace read_trace_csv(std::istream& in);
MarkerTrace read_trace_csv_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace stepsync
