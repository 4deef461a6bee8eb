#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mtl {

/// One CSV line of a sweep. Task 0 holds the task-averaged result of a
/// symmetric problem; tasks 1..T are per-task rows of the general problem.
struct ResultRow {
  double axis_value = 0.0;
  int task = 0;
  std::optional<double> theory_err;
  std::optional<double> sim_err_mean;
  std::optional<double> sim_err_stderr;
  std::optional<double> q_theory;
  std::optional<double> r_theory;
  std::optional<double> q_emp_mean;
  std::optional<double> r_emp_mean;
  int trials = 0;
  std::string status = "ok";
  long long wall_time_ms = 0;
};

inline constexpr const char* kCsvColumns =
    "axis,task,theory_err,sim_err_mean,sim_err_stderr,q_theory,r_theory,"
    "q_emp_mean,r_emp_mean,trials,status,wall_time_ms";

/// "# mtl-asymptotics v<version> schema=1"
std::string csv_version_line();

/// Shortest text that round-trips the double exactly.
std::string format_number(double v);
std::string format_row(const ResultRow& row);
/// Status strings must not break the CSV: commas and newlines are replaced.
std::string sanitize_status(const std::string& text);

struct ParsedCsv {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<ResultRow> rows;
};
/// Throws InvalidArgument on a malformed file or a column mismatch.
ParsedCsv parse_result_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
  bool line = true;         // polyline vs. markers
  std::string color = "#1f77b4";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<double> reference_level;  // dashed horizontal line
  std::string reference_label;
};

/// Self-contained SVG document.
std::string render_svg(const PlotSpec& plot);

}  // namespace mtl
