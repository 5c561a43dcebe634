#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/evaluation.hpp"
#include "vrec/tracker.hpp"
#include "vrec/triangulation.hpp"

namespace vrec {

// Contents of a --config file. Missing keys keep their defaults; unknown
// keys are rejected.
struct PipelineConfig {
  TrackerConfig tracker;
  TriangulationConfig triangulation;
  std::optional<double> no_object_threshold;
};

PipelineConfig parse_pipeline_config(std::string_view text);

// Fixed-width table of a report, percentages with one decimal.
std::string format_report_table(const EvaluationReport& report);

// Runs the command line (args excludes the program name). Returns the exit
// code; the report goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vrec
