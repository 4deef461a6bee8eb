#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtl/model.hpp"

namespace mtl {

/// Optional "sweep" block of a configuration document.
struct SweepSettings {
  std::string axis;          // kappa | T | rho | gamma2 | R
  std::vector<double> grid;  // strictly increasing
  int trials = 25;
  /// auto | symmetric | infinite | general | separate
  std::string problem = "auto";
  bool emit_theory = true;
  bool emit_simulation = true;
  int quad_order = 48;
};

/// Optional "series" block: repeat the sweep once per value of `key`
/// (gamma2 or rho), each run writing its own CSV and plot.
struct SeriesSettings {
  std::string key;
  std::vector<double> values;
};

struct ConfigDocument {
  std::string name;
  /// sweep | rho-curve | compare; used by presets.
  std::string command = "sweep";
  ExperimentConfig config;
  std::optional<SweepSettings> sweep;
  std::optional<SeriesSettings> series;
};

/// Parses a JSON document; throws InvalidArgument with the offending key.
ConfigDocument parse_config(const std::string& text);
ConfigDocument load_config(const std::filesystem::path& path);
std::string to_json(const ConfigDocument& doc);

}  // namespace mtl
