// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtl/generr.hpp"
#include "mtl/losses.hpp"
#include "mtl/quadrature.hpp"
#include "mtl/report.hpp"
#include "mtl/sweep.hpp"
#include "mtl/theory.hpp"
#include "mtl/train.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mtl;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mtl_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string drop_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + '\n';
  }
  return out;
}

ScalarProblem scalar(double alpha, double kappa, double rho, double g1, double g2,
                     LossKind loss, ModelKind model) {
  ScalarProblem p;
  p.alpha = alpha;
  p.kappa = kappa;
  p.rho = rho;
  p.gamma1 = g1;
  p.gamma2 = g2;
  p.loss = loss;
  p.model = model;
  return p;
}

double symmetric_error(double T, const ScalarProblem& p) {
  const SaddleSolution s = solve_symmetric(T, p);
  if (!s.converged) throw std::runtime_error("unconverged theory solve");
  return predict(s, p).gen_error;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const double alpha = 5.0, rho = 0.8, g1 = 1e-2, g2 = 1.0;
  const int p = 500, n = 100;

  // Locate the theory peak first so the grid can keep clear of it.
  double peak = 0.0, peak_err = -1.0;
  for (int k = 50; k <= 450; k += 2) {
    const double e = symmetric_error(
        3.0, scalar(alpha, k / 100.0, rho, g1, g2, LossKind::squared, ModelKind::linear_regression));
    if (e > peak_err) {
      peak_err = e;
      peak = k / 100.0;
    }
  }
  o.notes.push_back(fmt("theory peak at kappa = %.2f (gamma2 = %.1f)", peak, g2));

  // 12 points on [0.1, 4.8] outside [0.75, 1.33] x peak, split in proportion
  // to the length on each side; values rounded so that k = kappa n is exact.
  const double lo_end = 0.75 * peak, hi_start = 1.33 * peak, top = 4.8;
  const int below = std::clamp(static_cast<int>(std::lround(12.0 * (lo_end - 0.1) /
                                                           ((lo_end - 0.1) + (top - hi_start)))), 2, 10);
  std::vector<double> grid;
  for (int i = 0; i < below; ++i) grid.push_back(std::round(100.0 * (0.1 + (lo_end - 0.1) * i / (below - 1))) / 100.0);
  for (int i = 0; i < 12 - below; ++i) {
    grid.push_back(std::round(100.0 * (hi_start + (top - hi_start) * i / (11 - below))) / 100.0);
  }
  const std::vector<double> near = {std::round(90.0 * peak) / 100.0, peak,
                                    std::round(110.0 * peak) / 100.0};

  SweepSpec s;
  s.base.num_tasks = 3;
  s.base.ambient_dim = p;
  s.base.samples_per_task = {n, n, n};
  s.base.known_dim = n;
  s.base.rho = rho;
  s.base.gamma1 = g1;
  s.base.gamma2 = g2;
  s.base.seed = 2024;
  s.axis = "kappa";
  s.trials = 25;
  s.output_dir = scratch("c1");

  auto gaps = [&](const std::vector<double>& g, const std::string& name) {
    s.grid = g;
    s.name = name;
    std::vector<double> out;
    for (const auto& r : run_sweep(s)) {
      if (r.status != "ok" || !r.theory_err || !r.sim_err_mean) {
        throw std::runtime_error("row at kappa " + format_number(r.axis_value) + ": " + r.status);
      }
      out.push_back(std::abs(*r.sim_err_mean - *r.theory_err) / *r.theory_err);
    }
    return out;
  };
  const auto off = gaps(grid, "off_peak");
  double mean = 0.0;
  for (double g : off) mean += g / off.size();
  o.check(grid.size() == 12, fmt("%.0f off-peak grid points", grid.size()));
  o.check(mean < 0.05, fmt("mean relative gap off the peak %.4f < 0.05", mean));
  const auto at = gaps(near, "near_peak");
  const double worst = *std::max_element(at.begin(), at.end());
  o.check(worst < 0.15, fmt("worst relative gap near the peak %.4f < 0.15", worst));
  return o;
}

// Interior local maximum of err(kappa) with the largest value, refined by
// golden-section search between its grid neighbours.
double interior_peak(const std::function<double(double)>& err, double lo, double hi, double step) {
  std::vector<double> k, e;
  for (double x = lo; x <= hi + 1e-12; x += step) {
    k.push_back(x);
    e.push_back(err(x));
  }
  int best = -1;
  for (std::size_t i = 1; i + 1 < k.size(); ++i) {
    if (e[i] > e[i - 1] && e[i] >= e[i + 1] && (best < 0 || e[i] > e[best])) best = static_cast<int>(i);
  }
  if (best < 0) throw std::runtime_error("no interior maximum on the grid");
  return oracle::golden_min([&](double x) { return -err(x); }, k[best - 1], k[best + 1], 18);
}

Outcome criterion2() {
  Outcome o;
  auto curve = [](double T, double g2) {
    return [T, g2](double kappa) {
      return symmetric_error(T, scalar(1.0, kappa, 0.8, 1e-4, g2, LossKind::logistic,
                                       ModelKind::binary_classification));
    };
  };
  const double single = interior_peak(curve(1.0, 0.0), 0.26, 0.60, 0.02);
  o.check(std::abs(single - 0.41) <= 0.05,
          fmt("traditional peak at kappa = %.4f, |. - 0.41| <= 0.05", single));
  const double coupled = interior_peak(curve(2.0, 10.0), 0.50, 0.96, 0.02);
  const double to_double = std::abs(coupled - 2.0 * single), to_single = std::abs(coupled - single);
  o.check(to_double < to_single,
          fmt("T = 2, gamma2 = 10 peak at kappa = %.4f: distance to 2k* %.4f < distance to k* %.4f",
              coupled, to_double, to_single));
  return o;
}

// Per-task logistic fit by damped Newton, independent of the library solver.
Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  const double n = static_cast<double>(X.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
  auto objective = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    const Eigen::VectorXd m = X * v;
    for (int i = 0; i < m.size(); ++i) s += oracle::loss_value(LossKind::logistic, y[i], m[i]);
    return s / n + 0.5 * lambda * v.squaredNorm();
  };
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd m = X * w;
    Eigen::VectorXd d(m.size()), g_coef(m.size());
    for (int i = 0; i < m.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(y[i] * m[i]));  // sigmoid(-y m)
      g_coef[i] = -y[i] * s;
      d[i] = s * (1.0 - s);
    }
    const Eigen::VectorXd g = X.transpose() * g_coef / n + lambda * w;
    if (g.norm() < 1e-13) break;
    Eigen::MatrixXd H = X.transpose() * d.asDiagonal() * X / n;
    H.diagonal().array() += lambda;
    const Eigen::VectorXd step = H.ldlt().solve(g);
    double t = 1.0;
    const double f0 = objective(w);
    while (objective(w - t * step) > f0 - 1e-4 * t * g.dot(step) && t > 1e-10) t *= 0.5;
    w -= t * step;
  }
  return w;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ridge = 0.0, worst_logistic = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    ExperimentConfig c;
    c.num_tasks = 1 + static_cast<int>(u(gen) * 4);
    c.ambient_dim = 100 + static_cast<int>(u(gen) * 400);
    c.known_dim = std::max(5, static_cast<int>(c.ambient_dim * (0.2 + 0.8 * u(gen))));
    c.samples_per_task.clear();
    for (int t = 0; t < c.num_tasks; ++t) {
      c.samples_per_task.push_back(std::max(10, static_cast<int>(c.ambient_dim * (0.25 + 0.75 * u(gen)))));
    }
    c.rho = 0.1 + 0.9 * u(gen);
    c.gamma1 = std::exp(std::log(1e-2) + u(gen) * std::log(100.0));
    c.gamma2 = 0.0;

    c.loss = LossKind::squared;
    c.model = ModelKind::linear_regression;
    const auto e = generate_ensemble(c, 500 + inst);
    const auto m = solve_multitask(e, c);
    for (int t = 0; t < c.num_tasks; ++t) {
      const Eigen::MatrixXd X = e.features(t);
      const double n = static_cast<double>(X.rows());
      Eigen::MatrixXd A = X.transpose() * X / n;
      A.diagonal().array() += c.gamma1;
      const Eigen::VectorXd w = A.ldlt().solve(X.transpose() * e.tasks[t].labels / n);
      worst_ridge = std::max(worst_ridge, (m.weights[t] - w).cwiseAbs().maxCoeff());
    }

    c.loss = LossKind::logistic;
    c.model = ModelKind::binary_classification;
    const auto ec = generate_ensemble(c, 900 + inst);
    const auto mc = solve_multitask(ec, c);
    for (int t = 0; t < c.num_tasks; ++t) {
      const Eigen::VectorXd w = logistic_fit(ec.features(t), ec.tasks[t].labels, c.gamma1);
      worst_logistic = std::max(worst_logistic, (mc.weights[t] - w).cwiseAbs().maxCoeff());
    }
  }
  o.check(worst_ridge < 1e-8, fmt("max |w - ridge| over 10 instances %.2e < 1e-8", worst_ridge));
  o.check(worst_logistic < 1e-6,
          fmt("max |w - per-task logistic fit| over 10 instances %.2e < 1e-6", worst_logistic));
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (auto [loss, model] : {std::pair{LossKind::squared, ModelKind::linear_regression},
                             std::pair{LossKind::squared, ModelKind::binary_classification},
                             std::pair{LossKind::logistic, ModelKind::linear_regression},
                             std::pair{LossKind::logistic, ModelKind::binary_classification}}) {
    for (int T : {2, 3, 5}) {
      GeneralProblem g;
      g.alpha.assign(T, 2.0);
      g.kappa.assign(T, 0.6);
      g.rho = 0.7;
      g.gamma1 = 0.1;
      g.gamma2 = 0.5;
      g.loss = loss;
      g.model = model;
      const auto gs = solve_general(g);
      const auto ss = solve_symmetric(T, scalar(2.0, 0.6, 0.7, 0.1, 0.5, loss, model));
      double dev = 0.0, spread = 0.0;
      for (int t = 0; t < T; ++t) {
        dev = std::max({dev, std::abs(gs.q[t] - ss.q[0]), std::abs(gs.r[t] - ss.r[0])});
        spread = std::max({spread, std::abs(gs.q[t] - gs.q[0]), std::abs(gs.r[t] - gs.r[0])});
      }
      o.check(gs.converged && ss.converged && dev < 1e-6 && spread < 1e-6,
              std::string(to_string(loss)) + "/" + std::string(to_string(model)) +
                  fmt(" T=%.0f: |general - symmetric| %.2e, spread %.2e", T, dev, spread));
    }
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  struct Fig {
    const char* name;
    ScalarProblem p;
  };
  const Fig figs[] = {
      {"fig4a", scalar(2.0, 0.5, 0.85, 0.1, 0.5, LossKind::squared, ModelKind::linear_regression)},
      {"fig4b", scalar(2.0, 1.0, 0.75, 0.05, 0.2, LossKind::squared, ModelKind::binary_classification)},
  };
  for (const auto& f : figs) {
    const double limit = predict(solve_infinite_T(f.p), f.p).gen_error;
    const double at100 = symmetric_error(100.0, f.p);
    o.check(std::abs(at100 - limit) < 1e-3,
            std::string(f.name) + fmt(": |E(T=100) - E(inf)| = %.2e < 1e-3 (E(inf) = %.6f)",
                                      std::abs(at100 - limit), limit));

    SweepSpec s;
    s.name = f.name;
    s.base.num_tasks = 1;
    s.base.ambient_dim = 500;
    s.base.samples_per_task = {250};
    s.base.known_dim = static_cast<int>(std::lround(f.p.kappa * 250));
    s.base.rho = f.p.rho;
    s.base.gamma1 = f.p.gamma1;
    s.base.gamma2 = f.p.gamma2;
    s.base.loss = f.p.loss;
    s.base.model = f.p.model;
    s.base.seed = 4;
    s.axis = "T";
    s.grid = {1, 2, 3, 5, 10, 20, 50, 80, 100};
    s.trials = 10;
    s.output_dir = scratch("c5");
    const auto rows = run_sweep(s);
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && *rows[i].theory_err < *rows[i - 1].theory_err;
    o.check(monotone, std::string(f.name) + ": theory error strictly decreasing over T in {1,...,100}");
    for (const auto& r : rows) {
      if (r.axis_value != 80.0) continue;
      const double gap = std::abs(*r.sim_err_mean - limit);
      o.check(r.status == "ok" && gap <= 3.0 * *r.sim_err_stderr,
              std::string(f.name) + fmt(": simulated T=80 error %.5f within 3 SE (%.5f) of the limit, gap %.5f",
                                        *r.sim_err_mean, 3.0 * *r.sim_err_stderr, gap));
    }
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  ScalarProblem p = scalar(2.0, 1.0, 0.0, 0.01, 0.6, LossKind::squared, ModelKind::binary_classification);
  std::vector<double> R;
  for (int i = 0; i <= 10; ++i) {
    p.rho = i / 10.0;
    const auto fp = solve_R_of_rho(p);
    if (!fp.converged) throw std::runtime_error(fmt("R(rho) unconverged at rho = %.1f", p.rho));
    R.push_back(fp.R);
  }
  o.check(std::abs(R.front()) < 1e-4, fmt("R(0) = %.2e", R.front()));
  o.check(std::abs(R.back() - 1.0) < 1e-4, fmt("R(1) = %.8f", R.back()));
  bool nondecreasing = true, above = true;
  std::string list;
  for (int i = 0; i <= 10; ++i) {
    if (i > 0) nondecreasing = nondecreasing && R[i] >= R[i - 1] - 1e-9;
    above = above && R[i] >= i / 10.0 - 1e-9;
    list += fmt(" %.4f", R[i]);
  }
  o.check(nondecreasing, "R(rho) non-decreasing:" + list);
  o.check(above, "R(rho) >= rho on the grid");
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // (a) logistic prox against dense grid search.
  {
    const LossKernel lg(LossKind::logistic);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double y = u(gen) < 0.5 ? -1.0 : 1.0;
      const double a = -10.0 + 20.0 * u(gen);
      const double b = std::exp(std::log(0.01) + u(gen) * std::log(1000.0));
      worst = std::max(worst, std::abs(lg.prox(y, a, b) - oracle::prox_grid(LossKind::logistic, y, a, b)));
    }
    o.check(worst < 1e-5, fmt("(a) max |prox - grid search| over 1000 triples %.2e < 1e-5", worst));
  }

  // (b) saddle values against brute-force search.
  {
    auto draw = [&](int i) {
      const double alpha = 1.0 + 3.0 * u(gen);
      ScalarProblem p = scalar(alpha, alpha * (0.15 + 0.55 * u(gen)), 0.3 + 0.65 * u(gen),
                               0.05 + 0.45 * u(gen), 0.1 + 1.9 * u(gen), LossKind::squared,
                               i % 2 ? ModelKind::binary_classification : ModelKind::linear_regression);
      if (i == 0) {
        p.loss = LossKind::logistic;
        p.model = ModelKind::binary_classification;
      }
      return p;
    };
    auto params = [](const ScalarProblem& p) {
      return oracle::ScalarParams{p.alpha, p.kappa, p.rho, p.gamma1, p.gamma2, p.loss, p.model};
    };
    auto box = [](const SaddleSolution& s) { return std::max(8.0, 3.0 * std::max(s.q.maxCoeff(), s.r.maxCoeff())); };
    double worst[4] = {0, 0, 0, 0};
    bool converged = true;
    for (int i = 0; i < 5; ++i) {
      const ScalarProblem p = draw(i);
      const auto o_p = params(p);
      const double T = 2.0 + std::floor(9.0 * u(gen));
      const auto sym = solve_symmetric(T, p);
      worst[0] = std::max(worst[0], std::abs(sym.value - oracle::scalar_saddle_value(
          [&](double q, double r, double e) { return oracle::symmetric_phi(o_p, T, q, r, e); }, box(sym))));
      const auto inf = solve_infinite_T(p);
      worst[1] = std::max(worst[1], std::abs(inf.value - oracle::scalar_saddle_value(
          [&](double q, double r, double e) { return oracle::infinite_phi(o_p, q, r, e); }, box(inf))));
      const double R = u(gen);
      const auto sep = solve_separate_asymptotic(p, R);
      worst[2] = std::max(worst[2], std::abs(sep.value - oracle::scalar_saddle_value(
          [&](double q, double r, double e) { return oracle::separate_phi(o_p, R, q, r, e); }, box(sep))));
      converged = converged && sym.converged && inf.converged && sep.converged;

      GeneralProblem g;
      g.alpha = {1.0 + 3.0 * u(gen), 1.0 + 3.0 * u(gen)};
      g.kappa = {g.alpha[0] * (0.15 + 0.55 * u(gen)), g.alpha[1] * (0.15 + 0.55 * u(gen))};
      g.rho = 0.3 + 0.65 * u(gen);
      g.gamma1 = 0.05 + 0.45 * u(gen);
      g.gamma2 = 0.1 + 1.9 * u(gen);
      g.model = i % 2 ? ModelKind::binary_classification : ModelKind::linear_regression;
      const auto gs = solve_general(g);
      converged = converged && gs.converged;
      worst[3] = std::max(worst[3], std::abs(gs.value - oracle::general_saddle_value(
          {g.alpha, g.kappa, g.rho, g.gamma1, g.gamma2, g.model}, box(gs))));
    }
    const char* names[4] = {"symmetric", "infinite-T", "separate", "general"};
    for (int k = 0; k < 4; ++k) {
      o.check(worst[k] < 1e-3, std::string("(b) ") + names[k] +
                                   fmt(": max |value - brute force| over 5 sets %.2e < 1e-3", worst[k]));
    }
    o.check(converged, "(b) all solver runs converged");
  }

  // (c) generalization error closed forms.
  {
    double worst_quad = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double c0 = 1.0 + u(gen), c1 = -1.0 + 3.0 * u(gen), c2 = 0.05 + 2.0 * u(gen);
      for (ModelKind m : {ModelKind::linear_regression, ModelKind::binary_classification}) {
        worst_quad = std::max(worst_quad, std::abs(theory_gen_error(c0, c1, c2, m) -
                                                   oracle::gen_error_quadrature(c0, c1, c2, m)));
      }
    }
    o.check(worst_quad < 1e-8, fmt("(c) max |closed form - quadrature| %.2e < 1e-8", worst_quad));
    std::normal_distribution<double> nd;
    for (ModelKind m : {ModelKind::linear_regression, ModelKind::binary_classification}) {
      for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd xi(20), beta(20);
        for (int j = 0; j < 20; ++j) {
          xi[j] = nd(gen) / 4.0;
          beta[j] = xi[j] + 0.15 * nd(gen);
        }
        const auto [mean, se] = oracle::gen_error_monte_carlo(xi, beta, m, 400000, 1000 + i);
        const double gap = std::abs(exact_gen_error(xi, beta, m) - mean);
        o.check(gap < 3.0 * se, std::string("(c) ") + std::string(to_string(m)) +
                                    fmt(": |exact - Monte Carlo| %.2e < 3 SE = %.2e", gap, 3.0 * se));
      }
    }
  }

  // (d) quadrature under order doubling.
  {
    const QuadratureGrid g1(96), g2(192);
    double worst = 0.0;
    for (LossKind loss : {LossKind::squared, LossKind::logistic})
      for (ModelKind m : {ModelKind::linear_regression, ModelKind::binary_classification})
        for (int i = 0; i < 10; ++i) {
          const LabelChannel ch{m, 0.1 + 0.9 * u(gen), 0.2 + 0.8 * u(gen)};
          const double q = 5.0 * u(gen), r = 5.0 * u(gen), b = std::exp(std::log(0.01) + u(gen) * std::log(1e4));
          const LossKernel k(loss);
          const auto a = expected_envelope(k, ch, q, r, b, g1);
          const auto c = expected_envelope(k, ch, q, r, b, g2);
          worst = std::max({worst, std::abs(a.value - c.value), std::abs(a.d_q - c.d_q),
                            std::abs(a.d_r - c.d_r), std::abs(a.d_b - c.d_b)});
        }
    o.check(worst < 1e-8, fmt("(d) max change from order 96 to 192 over 40 points %.2e < 1e-8", worst));
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const fs::path a = scratch("c8a"), b = scratch("c8b");
  SweepSpec s;
  s.name = "determinism";
  s.base.num_tasks = 2;
  s.base.ambient_dim = 120;
  s.base.samples_per_task = {60, 60};
  s.base.known_dim = 30;
  s.base.rho = 0.7;
  s.base.gamma1 = 0.05;
  s.base.gamma2 = 0.5;
  s.base.loss = LossKind::logistic;
  s.base.model = ModelKind::binary_classification;
  s.base.seed = 8;
  s.axis = "kappa";
  s.grid = {0.25, 0.5, 1.0, 1.5};
  s.trials = 4;

  s.output_dir = a;
  s.workers = 1;
  run_sweep(s);
  s.output_dir = b;
  s.workers = 3;
  run_sweep(s);
  const std::string first = read_file(a / "determinism.csv");
  o.check(drop_timing(first) == drop_timing(read_file(b / "determinism.csv")),
          "same seed, 1 vs 3 workers: CSVs identical apart from timing");
  o.check(read_file(a / "determinism.svg") == read_file(b / "determinism.svg"), "SVG plots identical");

  // Interrupt: keep two complete rows and a row cut off mid-write.
  std::string cut = first;
  std::size_t pos = cut.size() - 1;
  for (int i = 0; i < 2; ++i) pos = cut.rfind('\n', pos - 1);
  cut = cut.substr(0, pos + 1) + cut.substr(pos + 1, 7);
  write_file_atomic(a / "determinism.csv", cut);
  s.output_dir = a;
  run_sweep(s);
  const std::string resumed = read_file(a / "determinism.csv");
  o.check(drop_timing(resumed) == drop_timing(first), "interrupted sweep resumes to identical results");
  run_sweep(s);
  o.check(read_file(a / "determinism.csv") == resumed, "re-running a finished sweep leaves the CSV byte-identical");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"theory vs simulation, symmetric regression sweep", criterion1},
      {"interpolation peak location", criterion2},
      {"uncoupled training equals per-task fits", criterion3},
      {"general problem collapses to the symmetric one", criterion4},
      {"large-T limit", criterion5},
      {"R(rho) endpoints and shape", criterion6},
      {"oracle suites", criterion7},
      {"determinism and resume", criterion8},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && out.pass;
    std::printf("criterion %d: %s  %s (%.0f s)\n", id, out.pass ? "PASS" : "FAIL", criteria[i].first, secs);
    for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
