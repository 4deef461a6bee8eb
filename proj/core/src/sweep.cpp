#include "mtl/sweep.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "mtl/error.hpp"
#include "mtl/generr.hpp"
#include "mtl/rng.hpp"
#include "mtl/theory.hpp"

namespace mtl {

namespace fs = std::filesystem;

int default_workers() {
  if (const char* env = std::getenv("MTL_ASY_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  if (count <= 0) return;
  const int n = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (n == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis,
                            double value) {
  ExperimentConfig c = base;
  if (axis == "kappa") {
    const double k = std::round(value * base.samples_per_task.at(0));
    if (!(k >= 1.0 && k <= base.ambient_dim)) {
      std::ostringstream err;
      err << "kappa = " << value << " gives k = " << k << ", outside [1, p]";
      throw InvalidArgument(err.str());
    }
    c.known_dim = static_cast<int>(k);
  } else if (axis == "T") {
    if (!base.symmetric()) {
      throw InvalidArgument("sweeping T needs equal samples_per_task in the base config");
    }
    const double t = std::round(value);
    if (t != value || t < 1.0) throw InvalidArgument("T grid values must be positive integers");
    c.num_tasks = static_cast<int>(t);
    c.samples_per_task.assign(c.num_tasks, base.samples_per_task.at(0));
  } else if (axis == "rho") {
    c.rho = value;
  } else if (axis == "gamma2") {
    c.gamma2 = value;
  } else if (axis != "R") {
    throw InvalidArgument("unknown sweep axis '" + axis + "'");
  }
  c.validate();
  return c;
}

void SweepSpec::validate() const {
  base.validate();
  if (grid.empty()) throw InvalidArgument("sweep: grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("sweep: grid must be strictly increasing");
  }
  if (trials < 1) throw InvalidArgument("sweep: trials must be >= 1");
  if (quad_order < QuadratureGrid::kMinOrder) {
    throw InvalidArgument("sweep: quad_order must be >= 8");
  }
  if (name.empty() || name.find('/') != std::string::npos) {
    throw InvalidArgument("sweep: name must be a plain file stem");
  }
  if (axis == "R" && problem != "auto" && problem != "separate") {
    throw InvalidArgument("sweep: axis R needs problem = separate");
  }
  if (axis == "R") {
    for (double v : grid) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("sweep: R grid must lie in [0,1]");
    }
  }
  for (double v : grid) apply_axis(base, axis, v);
}

SweepSpec SweepSpec::from_document(const ConfigDocument& doc) {
  if (!doc.sweep) throw InvalidArgument("config has no sweep block");
  SweepSpec s;
  s.base = doc.config;
  s.name = doc.name.empty() ? "sweep" : doc.name;
  s.axis = doc.sweep->axis;
  s.grid = doc.sweep->grid;
  s.trials = doc.sweep->trials;
  s.emit_theory = doc.sweep->emit_theory;
  s.emit_simulation = doc.sweep->emit_simulation;
  s.problem = doc.sweep->problem;
  s.quad_order = doc.sweep->quad_order;
  return s;
}

namespace {

enum class Kind { symmetric, infinite, general, separate };

Kind resolve(const SweepSpec& spec, const ExperimentConfig& cfg) {
  const std::string& p = spec.problem;
  if (p == "symmetric") return Kind::symmetric;
  if (p == "infinite") return Kind::infinite;
  if (p == "general") return Kind::general;
  if (p == "separate" || spec.axis == "R") return Kind::separate;
  if (p != "auto") throw InvalidArgument("sweep: unknown problem '" + p + "'");
  return cfg.symmetric() ? Kind::symmetric : Kind::general;
}

bool scalar(Kind k) { return k != Kind::general; }

std::uint64_t hash_text(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return mix64(h);
}

std::uint64_t point_seed(std::uint64_t seed, double value) {
  return mix64(seed ^ mix64(std::bit_cast<std::uint64_t>(value)));
}

std::string fingerprint(const SweepSpec& s) {
  ConfigDocument doc;
  doc.config = s.base;
  std::ostringstream ss;
  ss << to_json(doc) << '|' << s.axis << '|';
  for (double v : s.grid) ss << format_number(v) << ';';
  ss << '|' << s.trials << '|' << s.problem << '|' << s.emit_theory << s.emit_simulation
     << '|' << s.quad_order << '|'
     << (s.separate_R ? format_number(*s.separate_R) : std::string("-"));
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(hash_text(ss.str())));
  std::ostringstream line;
  line << "sweep axis=" << s.axis << " problem=" << s.problem << " seed=" << s.base.seed
       << " trials=" << s.trials << " hash=" << hex;
  return line.str();
}

ScalarProblem scalar_problem(const ExperimentConfig& cfg) {
  return ScalarProblem::from_config(cfg);
}

TheoryOptions theory_options(const SweepSpec& s) {
  TheoryOptions o;
  o.quad_order = s.quad_order;
  return o;
}

struct Stats {
  double mean = 0.0;
  std::optional<double> stderr_;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  // Welford in a fixed order: the result does not depend on scheduling.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v[i] - mean);
  }
  s.mean = mean;
  if (v.size() >= 2) {
    s.stderr_ = std::sqrt(m2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

struct TrialResult {
  bool ok = false;
  std::string error;
  std::vector<double> err, q, r;  // per task
};

struct TheoryResult {
  bool ok = false;
  bool converged = false;
  std::string error;
  std::vector<double> err, q, r;  // one entry (scalar problems) or per task
};

TheoryResult solve_theory(Kind kind, const ExperimentConfig& cfg, double R,
                          const TheoryOptions& o) {
  TheoryResult out;
  try {
    if (kind == Kind::general) {
      const GeneralProblem gp = GeneralProblem::from_config(cfg);
      const SaddleSolution sol = solve_general(gp, o);
      for (const auto& p : predict(sol, gp)) out.err.push_back(p.gen_error);
      for (int t = 0; t < gp.num_tasks(); ++t) {
        out.q.push_back(sol.q[t]);
        out.r.push_back(sol.r[t]);
      }
      out.converged = sol.converged;
    } else {
      const ScalarProblem sp = scalar_problem(cfg);
      SaddleSolution sol;
      if (kind == Kind::symmetric) sol = solve_symmetric(cfg.num_tasks, sp, o);
      if (kind == Kind::infinite) sol = solve_infinite_T(sp, o);
      if (kind == Kind::separate) sol = solve_separate_asymptotic(sp, R, o);
      out.err.push_back(predict(sol, sp).gen_error);
      out.q.push_back(sol.q[0]);
      out.r.push_back(sol.r[0]);
      out.converged = sol.converged;
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

TrialResult run_trial(Kind kind, const ExperimentConfig& cfg, double R, std::uint64_t seed,
                      int trial, const TrainOptions& train) {
  TrialResult out;
  try {
    const TaskEnsemble ens = generate_ensemble(cfg, seed, static_cast<std::uint64_t>(trial));
    const TrainedModel m = kind == Kind::separate ? solve_separate(ens, cfg, R, train)
                                                  : solve_multitask(ens, cfg, train);
    for (int t = 0; t < ens.num_tasks(); ++t) {
      out.err.push_back(empirical_gen_error(m, ens, t, cfg.model));
      const OrderParameters op = empirical_order_parameters(m, ens, t);
      out.q.push_back(op.q);
      out.r.push_back(op.r);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

double task_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<ResultRow> evaluate_point(const SweepSpec& spec, double value) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = apply_axis(spec.base, spec.axis, value);
  const Kind kind = resolve(spec, cfg);
  const TheoryOptions topt = theory_options(spec);
  const int rows = scalar(kind) ? 1 : cfg.num_tasks;

  auto make_rows = [&](const std::string& status) {
    std::vector<ResultRow> out(rows);
    for (int i = 0; i < rows; ++i) {
      out[i].axis_value = value;
      out[i].task = scalar(kind) ? 0 : i + 1;
      out[i].status = status;
    }
    return out;
  };

  double R = 0.0;
  if (kind == Kind::separate) {
    if (spec.axis == "R") {
      R = value;
    } else if (spec.separate_R) {
      R = *spec.separate_R;
    } else {
      try {
        R = solve_R_of_rho(scalar_problem(cfg), topt).R;
      } catch (const std::exception& e) {
        auto out = make_rows(sanitize_status(std::string("theory_error: ") + e.what()));
        return out;
      }
    }
  }

  const int theory_jobs = spec.emit_theory ? 1 : 0;
  const int trial_jobs = spec.emit_simulation ? spec.trials : 0;
  TheoryResult theory;
  std::vector<TrialResult> trials(trial_jobs);
  const std::uint64_t seed = point_seed(spec.base.seed, value);
  parallel_for(theory_jobs + trial_jobs, spec.workers > 0 ? spec.workers : default_workers(),
               [&](int i) {
                 if (i < theory_jobs) {
                   theory = solve_theory(kind, cfg, R, topt);
                 } else {
                   const int j = i - theory_jobs;
                   trials[j] = run_trial(kind, cfg, R, seed, j, spec.train);
                 }
               });

  std::vector<ResultRow> out = make_rows("ok");
  std::string status = "ok";
  if (spec.emit_theory) {
    if (!theory.ok) {
      status = "theory_error: " + theory.error;
    } else {
      for (int i = 0; i < rows; ++i) {
        out[i].theory_err = theory.err[i];
        out[i].q_theory = theory.q[i];
        out[i].r_theory = theory.r[i];
      }
      if (!theory.converged) status = "theory_unconverged";
    }
  }
  if (spec.emit_simulation) {
    std::vector<std::vector<double>> err(rows), q(rows), r(rows);
    int failed = 0;
    std::string first_error;
    for (const auto& t : trials) {
      if (!t.ok) {
        if (failed++ == 0) first_error = t.error;
        continue;
      }
      for (int i = 0; i < rows; ++i) {
        if (scalar(kind)) {
          err[i].push_back(task_mean(t.err));
          q[i].push_back(task_mean(t.q));
          r[i].push_back(task_mean(t.r));
        } else {
          err[i].push_back(t.err[i]);
          q[i].push_back(t.q[i]);
          r[i].push_back(t.r[i]);
        }
      }
    }
    for (int i = 0; i < rows; ++i) {
      out[i].trials = static_cast<int>(err[i].size());
      if (err[i].empty()) continue;
      const Stats se = stats(err[i]);
      out[i].sim_err_mean = se.mean;
      out[i].sim_err_stderr = se.stderr_;
      out[i].q_emp_mean = stats(q[i]).mean;
      out[i].r_emp_mean = stats(r[i]).mean;
    }
    if (failed == trial_jobs) {
      status = "sim_error: " + first_error;
    } else if (failed > 0 && status == "ok") {
      status = "sim_partial: " + std::to_string(failed) + " trials failed: " + first_error;
    }
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  for (auto& row : out) {
    row.status = sanitize_status(status);
    row.wall_time_ms = ms;
  }
  return out;
}

std::string render_csv(const std::vector<std::string>& comments,
                       const std::vector<ResultRow>& rows) {
  std::ostringstream ss;
  ss << csv_version_line() << '\n';
  for (const auto& c : comments) ss << "# " << c << '\n';
  ss << kCsvColumns << '\n';
  for (const auto& r : rows) ss << format_row(r) << '\n';
  return ss.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string axis_label(const std::string& axis) {
  if (axis == "kappa") return "kappa = k/n";
  if (axis == "T") return "number of tasks T";
  if (axis == "gamma2") return "gamma2";
  if (axis == "rho") return "rho";
  return axis;
}

PlotSpec sweep_plot(const SweepSpec& spec, const std::vector<ResultRow>& rows,
                    std::optional<double> limit) {
  PlotSpec plot;
  plot.title = spec.name;
  plot.x_label = axis_label(spec.axis);
  plot.y_label = "generalization error";
  std::map<int, std::pair<PlotSeries, PlotSeries>> by_task;
  for (const auto& r : rows) {
    auto& [th, sim] = by_task[r.task];
    if (r.theory_err) {
      th.x.push_back(r.axis_value);
      th.y.push_back(*r.theory_err);
    }
    if (r.sim_err_mean) {
      sim.x.push_back(r.axis_value);
      sim.y.push_back(*r.sim_err_mean);
      sim.err.push_back(r.sim_err_stderr.value_or(0.0));
    }
  }
  int c = 0;
  for (auto& [task, pair] : by_task) {
    const std::string suffix = task == 0 ? std::string() : " (task " + std::to_string(task) + ")";
    const std::string color = kPalette[c++ % 8];
    auto& [th, sim] = pair;
    th.label = "theory" + suffix;
    th.color = color;
    th.line = true;
    sim.label = "simulation" + suffix;
    sim.color = color;
    sim.line = false;
    if (!th.x.empty()) plot.series.push_back(th);
    if (!sim.x.empty()) plot.series.push_back(sim);
  }
  if (limit) {
    plot.reference_level = limit;
    plot.reference_label = "T -> infinity";
  }
  return plot;
}

}  // namespace

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::string fp = fingerprint(spec);
  const fs::path csv = spec.output_dir / (spec.name + ".csv");
  const fs::path svg = spec.output_dir / (spec.name + ".svg");

  std::map<double, std::vector<ResultRow>> previous;
  if (fs::exists(csv)) {
    std::string text = read_file(csv);
    // An unterminated last line is a row cut off mid-write; recompute it.
    if (!text.empty() && text.back() != '\n') text.erase(text.rfind('\n') + 1);
    const ParsedCsv old = parse_result_csv(text);
    bool same = false;
    for (const auto& c : old.comments) same = same || c == fp;
    if (!same) {
      throw InvalidArgument("sweep: " + csv.string() +
                            " was written by a different sweep; remove it or pick another --out");
    }
    for (const auto& r : old.rows) previous[r.axis_value].push_back(r);
  }

  std::vector<std::string> comments{fp};
  std::optional<double> limit;
  if (spec.axis == "T" && spec.emit_theory && spec.problem != "general" &&
      spec.problem != "separate") {
    try {
      const ScalarProblem sp = scalar_problem(spec.base);
      const SaddleSolution sol = solve_infinite_T(sp, theory_options(spec));
      limit = predict(sol, sp).gen_error;
      comments.push_back("limit theory_err=" + format_number(*limit));
    } catch (const std::exception& e) {
      comments.push_back("limit unavailable: " + sanitize_status(e.what()));
    }
  }

  fs::create_directories(spec.output_dir);
  std::vector<ResultRow> all;
  for (double value : spec.grid) {
    const ExperimentConfig cfg = apply_axis(spec.base, spec.axis, value);
    const std::size_t expected = scalar(resolve(spec, cfg)) ? 1 : cfg.num_tasks;
    auto it = previous.find(value);
    bool reuse = it != previous.end() && it->second.size() == expected;
    if (reuse) {
      for (const auto& r : it->second) reuse = reuse && r.status == "ok";
    }
    const std::vector<ResultRow> rows = reuse ? it->second : evaluate_point(spec, value);
    all.insert(all.end(), rows.begin(), rows.end());
    write_file_atomic(csv, render_csv(comments, all));
  }
  write_file_atomic(svg, render_svg(sweep_plot(spec, all, limit)));
  return all;
}

std::vector<RhoCurvePoint> run_rho_curve(const SweepSpec& spec) {
  if (spec.axis != "rho") throw InvalidArgument("rho-curve: axis must be rho");
  spec.validate();
  for (double v : spec.grid) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("rho-curve: grid must lie in [0,1]");
  }
  std::vector<RhoCurvePoint> points(spec.grid.size());
  const TheoryOptions topt = theory_options(spec);
  parallel_for(static_cast<int>(points.size()),
               spec.workers > 0 ? spec.workers : default_workers(), [&](int i) {
                 RhoCurvePoint& pt = points[i];
                 pt.rho = spec.grid[i];
                 try {
                   ScalarProblem sp = scalar_problem(spec.base);
                   sp.rho = pt.rho;
                   const RhoFixedPoint fp = solve_R_of_rho(sp, topt);
                   pt.R = fp.R;
                   pt.gen_error = fp.target_error;
                   pt.status = fp.converged ? "ok" : "unconverged";
                 } catch (const std::exception& e) {
                   pt.R = std::nan("");
                   pt.gen_error = std::nan("");
                   pt.status = sanitize_status(std::string("error: ") + e.what());
                 }
               });
  fs::create_directories(spec.output_dir);
  std::ostringstream ss;
  ss << csv_version_line() << '\n' << "# " << fingerprint(spec) << '\n'
     << "rho,R,gen_error,status\n";
  for (const auto& p : points) {
    ss << format_number(p.rho) << ',' << format_number(p.R) << ','
       << format_number(p.gen_error) << ',' << p.status << '\n';
  }
  write_file_atomic(spec.output_dir / (spec.name + ".csv"), ss.str());

  PlotSpec plot;
  plot.title = spec.name;
  plot.x_label = "rho";
  plot.y_label = "R(rho)";
  PlotSeries curve, diag;
  curve.label = "R(rho)";
  diag.label = "R = rho";
  diag.color = "#999999";
  for (const auto& p : points) {
    curve.x.push_back(p.rho);
    curve.y.push_back(p.R);
    diag.x.push_back(p.rho);
    diag.y.push_back(p.rho);
  }
  plot.series = {curve, diag};
  write_file_atomic(spec.output_dir / (spec.name + ".svg"), render_svg(plot));
  return points;
}

ComparisonReport compare_formulations(const SweepSpec& spec) {
  if (spec.axis != "T") throw InvalidArgument("compare: axis must be T");
  spec.validate();
  if (!spec.base.symmetric()) {
    throw InvalidArgument("compare: needs equal samples_per_task (symmetric setting)");
  }
  const TheoryOptions topt = theory_options(spec);
  const ScalarProblem sp = scalar_problem(spec.base);
  ComparisonReport rep;
  const RhoFixedPoint fp = solve_R_of_rho(sp, topt);
  rep.R = fp.R;
  rep.limit_error = fp.target_error;
  const SaddleSolution sep = solve_separate_asymptotic(sp, rep.R, topt);
  const double sep_err = predict(sep, sp).gen_error;
  rep.notes.push_back("the multi-task/separate equivalence is a large-T statement");

  std::vector<double> grid;
  for (double t : spec.grid) {
    if (t < 2.0) {
      rep.notes.push_back("T = 1 excluded: a single task has no coupling to compare");
      continue;
    }
    grid.push_back(t);
  }
  rep.points.resize(grid.size());
  const int workers = spec.workers > 0 ? spec.workers : default_workers();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ComparisonPoint& pt = rep.points[g];
    pt.num_tasks = grid[g];
    const ExperimentConfig cfg = apply_axis(spec.base, "T", grid[g]);
    try {
      const SaddleSolution mt = solve_symmetric(grid[g], sp, topt);
      pt.multitask_theory = predict(mt, sp).gen_error;
      pt.separate_theory = sep_err;
      pt.gap = std::abs(pt.multitask_theory - pt.separate_theory);
      if (!mt.converged) pt.status = "theory_unconverged";
    } catch (const std::exception& e) {
      pt.status = sanitize_status(std::string("theory_error: ") + e.what());
    }
    if (spec.emit_simulation) {
      const std::uint64_t seed = point_seed(spec.base.seed, grid[g]);
      std::vector<TrialResult> mt(spec.trials), st(spec.trials);
      parallel_for(2 * spec.trials, workers, [&](int i) {
        const int j = i / 2;
        if (i % 2 == 0) {
          mt[j] = run_trial(Kind::symmetric, cfg, 0.0, seed, j, spec.train);
        } else {
          st[j] = run_trial(Kind::separate, cfg, rep.R, seed, j, spec.train);
        }
      });
      std::vector<double> me, se;
      for (int j = 0; j < spec.trials; ++j) {
        if (mt[j].ok) me.push_back(task_mean(mt[j].err));
        if (st[j].ok) se.push_back(task_mean(st[j].err));
      }
      if (!me.empty()) {
        const Stats s = stats(me);
        pt.multitask_sim_mean = s.mean;
        pt.multitask_sim_stderr = s.stderr_;
      }
      if (!se.empty()) {
        const Stats s = stats(se);
        pt.separate_sim_mean = s.mean;
        pt.separate_sim_stderr = s.stderr_;
      }
      if ((me.size() < static_cast<std::size_t>(spec.trials) ||
           se.size() < static_cast<std::size_t>(spec.trials)) &&
          pt.status == "ok") {
        pt.status = "sim_partial";
      }
    }
  }
  rep.gap_shrinks = rep.points.size() >= 2;
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const double tol = 1e-9 + 1e-6 * rep.points[i - 1].gap;
    rep.gap_shrinks = rep.gap_shrinks && rep.points[i].gap <= rep.points[i - 1].gap + tol;
  }

  fs::create_directories(spec.output_dir);
  std::ostringstream ss;
  ss << csv_version_line() << '\n' << "# " << fingerprint(spec) << '\n'
     << "# R=" << format_number(rep.R) << " limit_theory_err=" << format_number(rep.limit_error)
     << " gap_shrinks_with_T=" << (rep.gap_shrinks ? "yes" : "no") << '\n';
  for (const auto& n : rep.notes) ss << "# note: " << n << '\n';
  ss << "T,multitask_theory,separate_theory,gap,multitask_sim_mean,multitask_sim_stderr,"
        "separate_sim_mean,separate_sim_stderr,status\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& p : rep.points) {
    ss << format_number(p.num_tasks) << ',' << format_number(p.multitask_theory) << ','
       << format_number(p.separate_theory) << ',' << format_number(p.gap) << ','
       << opt(p.multitask_sim_mean) << ',' << opt(p.multitask_sim_stderr) << ','
       << opt(p.separate_sim_mean) << ',' << opt(p.separate_sim_stderr) << ',' << p.status
       << '\n';
  }
  write_file_atomic(spec.output_dir / (spec.name + ".csv"), ss.str());

  PlotSpec plot;
  plot.title = spec.name;
  plot.x_label = "number of tasks T";
  plot.y_label = "generalization error";
  PlotSeries mt_th, sep_th, mt_sim, sep_sim;
  mt_th.label = "multi-task theory";
  sep_th.label = "separate theory";
  sep_th.color = "#d62728";
  mt_sim.label = "multi-task simulation";
  mt_sim.line = false;
  sep_sim.label = "separate simulation";
  sep_sim.color = "#d62728";
  sep_sim.line = false;
  for (const auto& p : rep.points) {
    mt_th.x.push_back(p.num_tasks);
    mt_th.y.push_back(p.multitask_theory);
    sep_th.x.push_back(p.num_tasks);
    sep_th.y.push_back(p.separate_theory);
    if (p.multitask_sim_mean) {
      mt_sim.x.push_back(p.num_tasks);
      mt_sim.y.push_back(*p.multitask_sim_mean);
      mt_sim.err.push_back(p.multitask_sim_stderr.value_or(0.0));
    }
    if (p.separate_sim_mean) {
      sep_sim.x.push_back(p.num_tasks);
      sep_sim.y.push_back(*p.separate_sim_mean);
      sep_sim.err.push_back(p.separate_sim_stderr.value_or(0.0));
    }
  }
  plot.series = {mt_th, sep_th};
  if (!mt_sim.x.empty()) plot.series.push_back(mt_sim);
  if (!sep_sim.x.empty()) plot.series.push_back(sep_sim);
  write_file_atomic(spec.output_dir / (spec.name + ".svg"), render_svg(plot));
  return rep;
}

}  // namespace mtl
