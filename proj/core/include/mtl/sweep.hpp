#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtl/config_io.hpp"
#include "mtl/model.hpp"
#include "mtl/report.hpp"
#include "mtl/train.hpp"

namespace mtl {

struct SweepSpec {
  ExperimentConfig base;
  std::string name = "sweep";
  std::string axis = "kappa";  // kappa | T | rho | gamma2 | R
  std::vector<double> grid;
  int trials = 25;
  std::filesystem::path output_dir = ".";
  bool emit_theory = true;
  bool emit_simulation = true;
  /// auto | symmetric | infinite | general | separate
  std::string problem = "auto";
  /// Alignment weight for problem = separate when the axis is not R; when
  /// unset the fixed point R(rho) is solved per grid point.
  std::optional<double> separate_R;
  int quad_order = 48;
  int workers = 0;  // 0: default_workers()
  TrainOptions train;

  /// Throws InvalidArgument for an empty or unsorted grid, trials < 1, or an
  /// axis incompatible with the base config.
  void validate() const;
  static SweepSpec from_document(const ConfigDocument& doc);
};

/// MTL_ASY_WORKERS when set to a positive integer, else the hardware
/// concurrency (at least 1).
int default_workers();

/// Base config with the axis value applied.
ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis,
                            double value);

/// Runs the sweep and writes <output_dir>/<name>.csv and <name>.svg. An
/// existing CSV with the same fingerprint is resumed: grid points whose rows
/// all have status ok are kept as they are.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// Runs `count` jobs on up to `workers` threads; job i writes only its own
/// output slot, so results do not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

struct RhoCurvePoint {
  double rho = 0.0;
  double R = 0.0;
  double gen_error = 0.0;
  std::string status = "ok";
};

/// R(rho) over spec.grid (axis must be rho). Writes <name>.csv with columns
/// rho,R,gen_error,status and <name>.svg.
std::vector<RhoCurvePoint> run_rho_curve(const SweepSpec& spec);

struct ComparisonPoint {
  double num_tasks = 0.0;
  double multitask_theory = 0.0;
  double separate_theory = 0.0;
  double gap = 0.0;
  std::optional<double> multitask_sim_mean;
  std::optional<double> multitask_sim_stderr;
  std::optional<double> separate_sim_mean;
  std::optional<double> separate_sim_stderr;
  std::string status = "ok";
};

struct ComparisonReport {
  double R = 0.0;
  double limit_error = 0.0;
  std::vector<ComparisonPoint> points;
  bool gap_shrinks = false;
  std::vector<std::string> notes;
};

/// Multi-task (symmetric problem at each T of spec.grid, axis T) against the
/// separate formulation at R(rho). T = 1 is skipped with a note since the
/// equivalence is a large-T statement. Writes <name>.csv and <name>.svg.
ComparisonReport compare_formulations(const SweepSpec& spec);

}  // namespace mtl
