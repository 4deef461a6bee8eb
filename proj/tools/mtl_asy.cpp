// Command line front end: theory, simulate, sweep, rho-curve, compare, preset.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mtl/config_io.hpp"
#include "mtl/error.hpp"
#include "mtl/generr.hpp"
#include "mtl/sweep.hpp"
#include "mtl/theory.hpp"
#include "mtl/train.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<unsigned long long> seed;
  std::optional<int> workers;
  std::string out = "results";
  std::optional<int> trials;
  bool no_theory = false;
  bool no_sim = false;
  std::optional<int> quad_order;
  std::string problem = "auto";
  std::optional<double> R;
  std::string preset_dir;
};

mtl::ConfigDocument load(const Common& c) {
  if (c.config.empty()) throw mtl::InvalidArgument("--config is required");
  mtl::ConfigDocument doc = mtl::load_config(c.config);
  if (c.seed) doc.config.seed = *c.seed;
  return doc;
}

mtl::SweepSpec make_spec(const mtl::ConfigDocument& doc, const Common& c) {
  mtl::SweepSpec spec = mtl::SweepSpec::from_document(doc);
  spec.output_dir = c.out;
  if (c.trials) spec.trials = *c.trials;
  if (c.workers) spec.workers = *c.workers;
  if (c.quad_order) spec.quad_order = *c.quad_order;
  if (c.no_theory) spec.emit_theory = false;
  if (c.no_sim) spec.emit_simulation = false;
  if (c.problem != "auto") spec.problem = c.problem;
  if (c.R) spec.separate_R = *c.R;
  return spec;
}

void print_solution(const mtl::SaddleSolution& s) {
  std::printf("source     %s\n", std::string(mtl::to_string(s.source)).c_str());
  std::printf("converged  %s\n", s.converged ? "yes" : "no");
  std::printf("residual   %.3e\n", s.residual);
  std::printf("value      %.12g\n", s.value);
  for (Eigen::Index t = 0; t < s.q.size(); ++t) {
    std::printf("task %-3ld  q* = %.10g%s  r* = %.10g%s  eta* = %.10g%s\n",
                static_cast<long>(t + 1), s.q[t], s.q_at_bound[t] ? " (bound)" : "", s.r[t],
                s.r_at_bound[t] ? " (bound)" : "", s.eta[t],
                s.eta_at_bound[t] ? " (bound)" : "");
  }
}

void print_prediction(int task, const mtl::TheoryPrediction& p) {
  std::printf("task %-3d  c0 = %.10g  c1 = %.10g  c2 = %.10g  gen_error = %.10g\n", task,
              p.c0, p.c1, p.c2, p.gen_error);
}

int cmd_theory(const Common& c) {
  const mtl::ConfigDocument doc = load(c);
  const mtl::ExperimentConfig& cfg = doc.config;
  mtl::TheoryOptions o;
  if (c.quad_order) o.quad_order = *c.quad_order;
  std::string problem = c.problem;
  if (problem == "auto") problem = cfg.symmetric() ? "symmetric" : "general";
  if (problem == "general") {
    const auto gp = mtl::GeneralProblem::from_config(cfg);
    const auto sol = mtl::solve_general(gp, o);
    print_solution(sol);
    const auto preds = mtl::predict(sol, gp);
    for (std::size_t t = 0; t < preds.size(); ++t) print_prediction(static_cast<int>(t + 1), preds[t]);
    return sol.converged ? 0 : 2;
  }
  const auto sp = mtl::ScalarProblem::from_config(cfg);
  mtl::SaddleSolution sol;
  if (problem == "symmetric") {
    sol = mtl::solve_symmetric(cfg.num_tasks, sp, o);
  } else if (problem == "infinite") {
    sol = mtl::solve_infinite_T(sp, o);
  } else if (problem == "separate") {
    double R = 0.0;
    if (c.R) {
      R = *c.R;
    } else {
      R = mtl::solve_R_of_rho(sp, o).R;
    }
    std::printf("R          %.10g\n", R);
    sol = mtl::solve_separate_asymptotic(sp, R, o);
  } else {
    throw mtl::InvalidArgument("unknown --problem '" + problem + "'");
  }
  print_solution(sol);
  print_prediction(1, mtl::predict(sol, sp));
  return sol.converged ? 0 : 2;
}

int cmd_simulate(const Common& c) {
  const mtl::ConfigDocument doc = load(c);
  const mtl::ExperimentConfig& cfg = doc.config;
  for (const auto& w : cfg.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const mtl::TaskEnsemble ens = mtl::generate_ensemble(cfg, cfg.seed, 0);
  mtl::TrainedModel m;
  if (c.problem == "separate") {
    const double R = c.R ? *c.R : mtl::solve_R_of_rho(mtl::ScalarProblem::from_config(cfg)).R;
    std::printf("R          %.10g\n", R);
    m = mtl::solve_separate(ens, cfg, R);
  } else {
    m = mtl::solve_multitask(ens, cfg);
  }
  std::printf("objective  %.12g\n", m.objective_value);
  std::printf("grad_norm  %.3e\n", m.grad_norm);
  std::printf("iterations %d\n", m.iterations);
  for (int t = 0; t < ens.num_tasks(); ++t) {
    const auto op = mtl::empirical_order_parameters(m, ens, t);
    std::printf("task %-3d  gen_error = %.10g  q = %.10g  r = %.10g\n", t + 1,
                mtl::empirical_gen_error(m, ens, t, cfg.model), op.q, op.r);
  }
  return 0;
}

int run_document(const mtl::ConfigDocument& doc, const Common& c, const std::string& command) {
  if (command == "rho-curve") {
    mtl::ConfigDocument d = doc;
    if (!d.sweep) {
      d.sweep = mtl::SweepSettings{};
      d.sweep->axis = "rho";
      for (int i = 0; i <= 10; ++i) d.sweep->grid.push_back(i / 10.0);
    }
    const auto pts = mtl::run_rho_curve(make_spec(d, c));
    for (const auto& p : pts) {
      std::printf("rho = %-6g R = %-12.8g gen_error = %-12.8g %s\n", p.rho, p.R, p.gen_error,
                  p.status.c_str());
    }
    return 0;
  }
  if (command == "compare") {
    const auto rep = mtl::compare_formulations(make_spec(doc, c));
    std::printf("R(rho) = %.8g, large-T error = %.8g\n", rep.R, rep.limit_error);
    for (const auto& p : rep.points) {
      std::printf("T = %-5g multitask = %-12.8g separate = %-12.8g gap = %.3e %s\n",
                  p.num_tasks, p.multitask_theory, p.separate_theory, p.gap, p.status.c_str());
    }
    for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
    std::printf("gap shrinks with T: %s\n", rep.gap_shrinks ? "yes" : "no");
    return 0;
  }
  auto run_one = [&](const mtl::ConfigDocument& d) {
    const auto spec = make_spec(d, c);
    const auto rows = mtl::run_sweep(spec);
    int bad = 0;
    for (const auto& r : rows) bad += r.status != "ok";
    std::printf("%s: %zu rows written to %s (%d not ok)\n", spec.name.c_str(), rows.size(),
                (spec.output_dir / (spec.name + ".csv")).string().c_str(), bad);
  };
  if (doc.series) {
    for (double v : doc.series->values) {
      mtl::ConfigDocument d = doc;
      if (doc.series->key == "gamma2") d.config.gamma2 = v;
      if (doc.series->key == "rho") d.config.rho = v;
      d.name = (doc.name.empty() ? "sweep" : doc.name) + "_" + doc.series->key + "_" +
               mtl::format_number(v);
      run_one(d);
    }
  } else {
    run_one(doc);
  }
  return 0;
}

fs::path preset_dir(const Common& c) {
  if (!c.preset_dir.empty()) return c.preset_dir;
  if (const char* env = std::getenv("MTL_ASY_PRESET_DIR")) return env;
  if (fs::exists("configs")) return "configs";
  return MTL_ASY_PRESET_DIR;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task learning asymptotics: saddle-point theory and simulation"};
  app.fallthrough();
  app.require_subcommand(1);
  Common c;
  app.add_option("--config", c.config, "Experiment configuration (JSON)");
  app.add_option("--seed", c.seed, "Override the configuration seed");
  app.add_option("--workers", c.workers, "Worker threads (default: MTL_ASY_WORKERS or cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--trials", c.trials, "Monte-Carlo trials per grid point")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-theory", c.no_theory, "Skip the deterministic solves");
  app.add_flag("--no-sim", c.no_sim, "Skip the Monte-Carlo trials");
  app.add_option("--quad-order", c.quad_order, "Gauss-Hermite order per dimension (>= 8)");
  app.add_option("--problem", c.problem, "auto|symmetric|infinite|general|separate")
      ->capture_default_str();
  app.add_option("--R", c.R, "Alignment weight for the separate formulation");
  app.add_option("--preset-dir", c.preset_dir, "Directory holding the preset configs");

  auto* theory = app.add_subcommand("theory", "Solve one deterministic problem");
  auto* simulate = app.add_subcommand("simulate", "Train on one generated ensemble");
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  auto* rho_curve = app.add_subcommand("rho-curve", "R(rho) over a rho grid");
  auto* compare = app.add_subcommand("compare", "Multi-task against separate formulation");
  auto* preset = app.add_subcommand("preset", "Run a figure preset");
  std::string preset_name;
  preset->add_option("name", preset_name, "fig2a fig2b fig4a fig4b fig5a fig5b fig6 fig7")
      ->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (theory->parsed()) return cmd_theory(c);
    if (simulate->parsed()) return cmd_simulate(c);
    if (sweep->parsed()) return run_document(load(c), c, "sweep");
    if (rho_curve->parsed()) return run_document(load(c), c, "rho-curve");
    if (compare->parsed()) return run_document(load(c), c, "compare");
    if (preset->parsed()) {
      const fs::path path = preset_dir(c) / (preset_name + ".json");
      if (!fs::exists(path)) throw mtl::InvalidArgument("unknown preset '" + preset_name + "'");
      Common pc = c;
      pc.config = path.string();
      const mtl::ConfigDocument doc = load(pc);
      return run_document(doc, pc, doc.command);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
