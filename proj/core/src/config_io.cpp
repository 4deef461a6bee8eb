#include "mtl/config_io.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "mtl/error.hpp"

namespace mtl {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "name",  "command", "num_tasks", "ambient_dim", "known_dim", "samples_per_task",
    "alpha", "kappa",   "rho",       "gamma1",      "gamma2",    "loss",
    "model", "seed",    "sweep",     "series",      "description"};
const std::set<std::string> kSweepKeys = {"axis",         "grid",  "trials",
                                          "problem",      "emit_theory",
                                          "emit_simulation", "quad_order"};
const std::set<std::string> kAxes = {"kappa", "T", "rho", "gamma2", "R"};
const std::set<std::string> kProblems = {"auto", "symmetric", "infinite",
                                         "general", "separate"};
const std::set<std::string> kCommands = {"sweep", "rho-curve", "compare"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw InvalidArgument("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: bad or missing '") + key + "': " + e.what());
  }
}

std::vector<double> as_list(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_array()) return get<std::vector<double>>(j, key);
  return {get<double>(j, key)};
}

int rounded(double v, const char* what) {
  const double r = std::round(v);
  if (!(r >= 1.0) || r > 2e9) {
    throw InvalidArgument(std::string("config: derived ") + what + " is out of range");
  }
  return static_cast<int>(r);
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  check_keys(j, kTopKeys, "document");

  ConfigDocument doc;
  ExperimentConfig& c = doc.config;
  if (j.contains("name")) doc.name = get<std::string>(j, "name");
  if (j.contains("command")) {
    doc.command = get<std::string>(j, "command");
    if (!kCommands.count(doc.command)) {
      throw InvalidArgument("config: unknown command '" + doc.command + "'");
    }
  }
  c.num_tasks = get<int>(j, "num_tasks");
  c.ambient_dim = get<int>(j, "ambient_dim");

  if (j.contains("samples_per_task")) {
    if (j.contains("alpha")) {
      throw InvalidArgument("config: give either samples_per_task or alpha, not both");
    }
    const json& s = j.at("samples_per_task");
    if (s.is_array()) {
      c.samples_per_task = get<std::vector<int>>(j, "samples_per_task");
    } else {
      c.samples_per_task.assign(c.num_tasks, get<int>(j, "samples_per_task"));
    }
  } else if (j.contains("alpha")) {
    const std::vector<double> alpha = as_list(j, "alpha");
    if (alpha.size() != 1 && static_cast<int>(alpha.size()) != c.num_tasks) {
      throw InvalidArgument("config: alpha list must have one entry per task");
    }
    c.samples_per_task.clear();
    for (int t = 0; t < c.num_tasks; ++t) {
      const double a = alpha.size() == 1 ? alpha[0] : alpha[t];
      c.samples_per_task.push_back(rounded(c.ambient_dim / a, "samples_per_task"));
    }
  } else {
    throw InvalidArgument("config: samples_per_task (or alpha) is required");
  }

  if (j.contains("known_dim")) {
    if (j.contains("kappa")) {
      throw InvalidArgument("config: give either known_dim or kappa, not both");
    }
    c.known_dim = get<int>(j, "known_dim");
  } else if (j.contains("kappa")) {
    // kappa refers to the first task: k = kappa * n_1.
    c.known_dim = rounded(get<double>(j, "kappa") * c.samples_per_task.at(0), "known_dim");
  } else {
    throw InvalidArgument("config: known_dim (or kappa) is required");
  }

  c.rho = get<double>(j, "rho");
  c.gamma1 = j.contains("gamma1") ? get<double>(j, "gamma1") : 0.0;
  c.gamma2 = j.contains("gamma2") ? get<double>(j, "gamma2") : 0.0;
  c.loss = parse_loss_kind(get<std::string>(j, "loss"));
  c.model = parse_model_kind(get<std::string>(j, "model"));
  c.seed = j.contains("seed") ? get<std::uint64_t>(j, "seed") : 0;
  c.validate();

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.is_object()) throw InvalidArgument("config: sweep must be an object");
    check_keys(s, kSweepKeys, "sweep");
    SweepSettings sw;
    sw.axis = get<std::string>(s, "axis");
    if (!kAxes.count(sw.axis)) throw InvalidArgument("config: unknown sweep axis '" + sw.axis + "'");
    sw.grid = get<std::vector<double>>(s, "grid");
    if (s.contains("trials")) sw.trials = get<int>(s, "trials");
    if (s.contains("problem")) sw.problem = get<std::string>(s, "problem");
    if (!kProblems.count(sw.problem)) {
      throw InvalidArgument("config: unknown sweep problem '" + sw.problem + "'");
    }
    if (s.contains("emit_theory")) sw.emit_theory = get<bool>(s, "emit_theory");
    // The gamma2 axis is theory-only unless simulation is asked for.
    sw.emit_simulation = sw.axis != "gamma2";
    if (s.contains("emit_simulation")) sw.emit_simulation = get<bool>(s, "emit_simulation");
    if (s.contains("quad_order")) sw.quad_order = get<int>(s, "quad_order");
    doc.sweep = sw;
  }
  if (j.contains("series")) {
    const json& s = j.at("series");
    check_keys(s, {"key", "values"}, "series");
    SeriesSettings se;
    se.key = get<std::string>(s, "key");
    if (se.key != "gamma2" && se.key != "rho") {
      throw InvalidArgument("config: series key must be gamma2 or rho");
    }
    se.values = get<std::vector<double>>(s, "values");
    doc.series = se;
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ConfigDocument& doc) {
  const ExperimentConfig& c = doc.config;
  json j;
  if (!doc.name.empty()) j["name"] = doc.name;
  j["command"] = doc.command;
  j["num_tasks"] = c.num_tasks;
  j["ambient_dim"] = c.ambient_dim;
  j["known_dim"] = c.known_dim;
  j["samples_per_task"] = c.samples_per_task;
  j["rho"] = c.rho;
  j["gamma1"] = c.gamma1;
  j["gamma2"] = c.gamma2;
  j["loss"] = std::string(to_string(c.loss));
  j["model"] = std::string(to_string(c.model));
  j["seed"] = c.seed;
  if (doc.sweep) {
    const SweepSettings& s = *doc.sweep;
    j["sweep"] = {{"axis", s.axis},
                  {"grid", s.grid},
                  {"trials", s.trials},
                  {"problem", s.problem},
                  {"emit_theory", s.emit_theory},
                  {"emit_simulation", s.emit_simulation},
                  {"quad_order", s.quad_order}};
  }
  if (doc.series) j["series"] = {{"key", doc.series->key}, {"values", doc.series->values}};
  return j.dump(2);
}

}  // namespace mtl
