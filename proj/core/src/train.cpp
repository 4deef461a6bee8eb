#include "mtl/train.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "mtl/error.hpp"
#include "mtl/losses.hpp"

namespace mtl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Weights = std::vector<VectorXd>;

namespace {

void check_inputs(const TaskEnsemble& ens, const ExperimentConfig& config) {
  config.validate();
  if (ens.num_tasks() != config.num_tasks || ens.known_dim != config.known_dim ||
      ens.ambient_dim() != config.ambient_dim) {
    throw InvalidArgument("ensemble does not match the experiment config");
  }
  for (int t = 0; t < ens.num_tasks(); ++t) {
    if (ens.tasks[t].full_features.rows() != config.samples_per_task[t]) {
      throw InvalidArgument("ensemble sample counts do not match the config");
    }
  }
}

double dot(const Weights& a, const Weights& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t].dot(b[t]);
  return s;
}

double norm(const Weights& a) { return std::sqrt(dot(a, a)); }

VectorXd mean(const Weights& w) {
  VectorXd m = VectorXd::Zero(w.front().size());
  for (const auto& v : w) m += v;
  return m / static_cast<double>(w.size());
}

Weights axpy(const Weights& x, double a, const Weights& d) {
  Weights out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t] + a * d[t];
  return out;
}

// (1/n) B^T diag(d) B, or (1/n) B^T B when d is empty.
MatrixXd weighted_gram(const FeatureView& b, const VectorXd& d) {
  const double inv_n = 1.0 / static_cast<double>(b.rows());
  MatrixXd g = MatrixXd::Zero(b.cols(), b.cols());
  if (d.size() == 0) {
    g.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose(), inv_n);
  } else {
    const MatrixXd scaled = d.cwiseSqrt().asDiagonal() * b;
    g.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), inv_n);
  }
  return g.selfadjointView<Eigen::Lower>();
}

// Solves M_t x_t - gamma2 x_bar = rhs_t for all t, where M_t are given by
// their Cholesky factors. Eliminating x_t leaves a k x k system for x_bar:
//   (T I - gamma2 sum_t M_t^{-1}) x_bar = sum_t M_t^{-1} rhs_t.
Weights coupled_solve(const std::vector<Eigen::LLT<MatrixXd>>& m,
                      const Weights& rhs, double gamma2) {
  const std::size_t t_count = m.size();
  Weights x(t_count);
  if (gamma2 == 0.0) {
    for (std::size_t t = 0; t < t_count; ++t) x[t] = m[t].solve(rhs[t]);
    return x;
  }
  const auto k = rhs.front().size();
  MatrixXd a = MatrixXd::Identity(k, k) * static_cast<double>(t_count);
  VectorXd s = VectorXd::Zero(k);
  for (std::size_t t = 0; t < t_count; ++t) {
    a.noalias() -= gamma2 * m[t].solve(MatrixXd::Identity(k, k));
    s += m[t].solve(rhs[t]);
  }
  const VectorXd bar = a.partialPivLu().solve(s);
  for (std::size_t t = 0; t < t_count; ++t) x[t] = m[t].solve(rhs[t] + gamma2 * bar);
  return x;
}

Eigen::LLT<MatrixXd> factor(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + ": system matrix is not positive definite");
  }
  return llt;
}

// Data term of one task: (1/n) sum_i l(y_i; z_i) with z = B w.
double data_term(const LossKernel& loss, const VectorXd& y, const VectorXd& z,
                 VectorXd* dz, VectorXd* d2z) {
  const double inv_n = 1.0 / static_cast<double>(y.size());
  double f = 0.0;
  if (dz) dz->resize(y.size());
  if (d2z) d2z->resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    f += loss.value(y[i], z[i]);
    if (dz) (*dz)[i] = loss.derivative(y[i], z[i]) * inv_n;
    if (d2z) (*d2z)[i] = loss.second_derivative(y[i], z[i]);
  }
  return f * inv_n;
}

void embed(const TaskEnsemble& ens, TrainedModel& model) {
  model.embedded.clear();
  for (const auto& w : model.weights) {
    VectorXd beta = VectorXd::Zero(ens.ambient_dim());
    beta.head(w.size()) = w;
    model.embedded.push_back(std::move(beta));
  }
}

Weights zeros(int tasks, int k) { return Weights(tasks, VectorXd::Zero(k)); }

// Smooth convex objective over stacked per-task weights, with a Newton
// system solver for its Hessian.
struct Problem {
  virtual ~Problem() = default;
  virtual double eval(const Weights& w, Weights* g) const = 0;
  /// Solves H(w) d = rhs.
  virtual Weights newton_solve(const Weights& w, const Weights& rhs) const = 0;
};

struct MultiTask final : Problem {
  const TaskEnsemble& ens;
  const ExperimentConfig& config;
  LossKernel loss;

  MultiTask(const TaskEnsemble& e, const ExperimentConfig& c)
      : ens(e), config(c), loss(c.loss) {}

  double eval(const Weights& w, Weights* g) const override {
    return multitask_objective(ens, config, w, g);
  }

  Weights newton_solve(const Weights& w, const Weights& rhs) const override {
    std::vector<Eigen::LLT<MatrixXd>> m;
    for (int t = 0; t < ens.num_tasks(); ++t) {
      const auto b = ens.features(t);
      VectorXd d2;
      data_term(loss, ens.tasks[t].labels, b * w[t], nullptr, &d2);
      MatrixXd h = weighted_gram(b, d2);
      h.diagonal().array() += config.gamma1 + config.gamma2;
      m.push_back(factor(h, "solve_multitask"));
    }
    return coupled_solve(m, rhs, config.gamma2);
  }
};

struct Separate final : Problem {
  const TaskEnsemble& ens;
  const ExperimentConfig& config;
  double R;
  int task;
  LossKernel loss;
  VectorXd u;

  Separate(const TaskEnsemble& e, const ExperimentConfig& c, double r, int t)
      : ens(e), config(c), R(r), task(t), loss(c.loss) {
    u = e.restricted_hidden(t);
    u /= u.norm();
  }

  double eval(const Weights& w, Weights* g) const override {
    VectorXd grad;
    const double f = separate_training_objective(ens, config, R, task, w[0],
                                                 g ? &grad : nullptr);
    if (g) *g = Weights{grad};
    return f;
  }

  MatrixXd hessian(const VectorXd& w) const {
    const auto b = ens.features(task);
    VectorXd d2;
    data_term(loss, ens.tasks[task].labels, b * w, nullptr, &d2);
    MatrixXd h = weighted_gram(b, d2);
    h.diagonal().array() += config.gamma1 + config.gamma2;
    h.noalias() -= config.gamma2 * R * u * u.transpose();
    return h;
  }

  Weights newton_solve(const Weights& w, const Weights& rhs) const override {
    return {factor(hessian(w[0]), "solve_separate").solve(rhs[0])};
  }
};

struct Outcome {
  Weights w;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

Outcome newton(const Problem& prob, Weights w, const TrainOptions& o,
               const char* what) {
  Outcome out;
  Weights g;
  double f = prob.eval(w, &g);
  double gn = norm(g);
  int it = 0;
  for (; it < o.max_newton_iterations && gn >= o.grad_tolerance; ++it) {
    Weights neg(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) neg[t] = -g[t];
    const Weights d = prob.newton_solve(w, neg);
    const double slope = dot(g, d);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const Weights trial = axpy(w, step, d);
      const double ft = prob.eval(trial, nullptr);
      if (ft <= f + 1e-4 * step * slope) {
        w = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // at machine precision; the gradient check decides
    f = prob.eval(w, &g);
    gn = norm(g);
  }
  if (!(gn < o.grad_tolerance)) {
    std::ostringstream err;
    err << what << ": Newton stopped after " << it << " iterations with |grad| = " << gn;
    throw ConvergenceError(err.str(), it, gn);
  }
  out.w = std::move(w);
  out.f = f;
  out.grad_norm = gn;
  out.iterations = it;
  return out;
}

Outcome lbfgs(const Problem& prob, Weights w, const TrainOptions& o,
              const char* what) {
  Outcome out;
  Weights g;
  double f = prob.eval(w, &g);
  double gn = norm(g);
  std::deque<std::pair<Weights, Weights>> history;  // (s, y)
  int it = 0;
  for (; it < o.max_lbfgs_iterations && gn >= o.grad_tolerance; ++it) {
    // Two-loop recursion for d = -H g.
    Weights q = g;
    std::vector<double> alpha(history.size());
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = history[i];
      alpha[i] = dot(s, q) / dot(y, s);
      q = axpy(q, -alpha[i], y);
    }
    double gamma = 1.0;
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      gamma = dot(s, y) / dot(y, y);
    }
    for (auto& v : q) v *= gamma;
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = dot(y, q) / dot(y, s);
      q = axpy(q, alpha[i] - beta, s);
    }
    Weights d(q.size());
    for (std::size_t t = 0; t < q.size(); ++t) d[t] = -q[t];
    double slope = dot(g, d);
    if (slope >= 0.0) {
      for (std::size_t t = 0; t < g.size(); ++t) d[t] = -g[t];
      slope = -gn * gn;
      history.clear();
    }
    double step = 1.0;
    bool accepted = false;
    Weights trial, gt;
    double ft = 0.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = axpy(w, step, d);
      ft = prob.eval(trial, &gt);
      if (ft <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    Weights s(w.size()), y(w.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
      s[t] = trial[t] - w[t];
      y[t] = gt[t] - g[t];
    }
    if (dot(s, y) > 1e-16 * norm(s) * norm(y)) {
      history.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(history.size()) > o.lbfgs_memory) history.pop_front();
    }
    w = std::move(trial);
    g = std::move(gt);
    f = ft;
    gn = norm(g);
  }
  if (!(gn < o.grad_tolerance)) {
    std::ostringstream err;
    err << what << ": L-BFGS stopped after " << it << " iterations with |grad| = " << gn;
    throw ConvergenceError(err.str(), it, gn);
  }
  out.w = std::move(w);
  out.f = f;
  out.grad_norm = gn;
  out.iterations = it;
  return out;
}

Outcome squared_direct(const TaskEnsemble& ens, const ExperimentConfig& config) {
  std::vector<Eigen::LLT<MatrixXd>> m;
  Weights rhs;
  for (int t = 0; t < ens.num_tasks(); ++t) {
    const auto b = ens.features(t);
    MatrixXd h = weighted_gram(b, VectorXd());
    h.diagonal().array() += config.gamma1 + config.gamma2;
    m.push_back(factor(h, "solve_multitask"));
    rhs.push_back(b.transpose() * ens.tasks[t].labels / static_cast<double>(b.rows()));
  }
  Outcome out;
  out.w = coupled_solve(m, rhs, config.gamma2);
  out.iterations = 1;
  return out;
}

Outcome squared_cg(const TaskEnsemble& ens, const ExperimentConfig& config,
                   const TrainOptions& o) {
  const int tasks = ens.num_tasks();
  auto apply = [&](const Weights& v) {
    const VectorXd bar = mean(v);
    Weights out(tasks);
    for (int t = 0; t < tasks; ++t) {
      const auto b = ens.features(t);
      out[t] = b.transpose() * (b * v[t]) / static_cast<double>(b.rows()) +
               (config.gamma1 + config.gamma2) * v[t] - config.gamma2 * bar;
    }
    return out;
  };
  Weights rhs(tasks);
  for (int t = 0; t < tasks; ++t) {
    const auto b = ens.features(t);
    rhs[t] = b.transpose() * ens.tasks[t].labels / static_cast<double>(b.rows());
  }
  const double rhs_norm = norm(rhs);
  Weights x = zeros(tasks, ens.known_dim);
  Weights r = rhs;
  Weights p = r;
  double rr = dot(r, r);
  int it = 0;
  while (std::sqrt(rr) > o.cg_tolerance * rhs_norm) {
    if (it >= o.max_cg_iterations) {
      const double rel = std::sqrt(rr) / rhs_norm;
      throw ConvergenceError("solve_multitask: conjugate gradient hit its iteration cap",
                             it, rel);
    }
    const Weights ap = apply(p);
    const double a = rr / dot(p, ap);
    x = axpy(x, a, p);
    r = axpy(r, -a, ap);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (int t = 0; t < tasks; ++t) p[t] = r[t] + beta * p[t];
    ++it;
  }
  Outcome out;
  out.w = std::move(x);
  out.iterations = it;
  return out;
}

TrainedModel finish(const TaskEnsemble& ens, Outcome out, double f, double gn) {
  TrainedModel model;
  model.weights = std::move(out.w);
  model.objective_value = f;
  model.grad_norm = gn;
  model.iterations = out.iterations;
  embed(ens, model);
  return model;
}

}  // namespace

double multitask_objective(const TaskEnsemble& ens, const ExperimentConfig& config,
                           const Weights& w, Weights* gradient) {
  const LossKernel loss(config.loss);
  const int tasks = ens.num_tasks();
  if (static_cast<int>(w.size()) != tasks) {
    throw InvalidArgument("multitask_objective: one weight vector per task expected");
  }
  const VectorXd bar = mean(w);
  if (gradient) gradient->resize(tasks);
  double f = 0.0;
  for (int t = 0; t < tasks; ++t) {
    const auto b = ens.features(t);
    VectorXd dz;
    f += data_term(loss, ens.tasks[t].labels, b * w[t], gradient ? &dz : nullptr, nullptr);
    const VectorXd dev = w[t] - bar;
    f += 0.5 * config.gamma1 * w[t].squaredNorm() + 0.5 * config.gamma2 * dev.squaredNorm();
    if (gradient) {
      (*gradient)[t] = b.transpose() * dz + config.gamma1 * w[t] + config.gamma2 * dev;
    }
  }
  return f;
}

double separate_training_objective(const TaskEnsemble& ens,
                                   const ExperimentConfig& config, double R,
                                   int task, const VectorXd& w,
                                   VectorXd* gradient) {
  const LossKernel loss(config.loss);
  const auto b = ens.features(task);
  VectorXd u = ens.restricted_hidden(task);
  u /= u.norm();
  VectorXd dz;
  double f = data_term(loss, ens.tasks[task].labels, b * w, gradient ? &dz : nullptr, nullptr);
  const double a = u.dot(w);
  f += 0.5 * (config.gamma1 + config.gamma2) * w.squaredNorm() -
       0.5 * config.gamma2 * R * a * a;
  if (gradient) {
    *gradient = b.transpose() * dz + (config.gamma1 + config.gamma2) * w -
                config.gamma2 * R * a * u;
  }
  return f;
}

TrainedModel solve_multitask(const TaskEnsemble& ens, const ExperimentConfig& config,
                             const TrainOptions& o) {
  check_inputs(ens, config);
  const int k = config.known_dim;
  Outcome out;
  if (config.loss == LossKind::squared) {
    const bool direct = o.squared == SquaredSolver::direct ||
                        (o.squared == SquaredSolver::automatic && k <= o.direct_max_dim);
    out = direct ? squared_direct(ens, config) : squared_cg(ens, config, o);
  } else {
    const MultiTask prob(ens, config);
    const bool use_newton =
        o.logistic == LogisticSolver::newton ||
        (o.logistic == LogisticSolver::automatic &&
         static_cast<long>(config.num_tasks) * k <= o.newton_max_size);
    Weights w0 = zeros(config.num_tasks, k);
    out = use_newton ? newton(prob, std::move(w0), o, "solve_multitask")
                     : lbfgs(prob, std::move(w0), o, "solve_multitask");
  }
  Weights g;
  const double f = multitask_objective(ens, config, out.w, &g);
  return finish(ens, std::move(out), f, norm(g));
}

TrainedModel solve_separate(const TaskEnsemble& ens, const ExperimentConfig& config,
                            double R, const TrainOptions& o) {
  check_inputs(ens, config);
  if (!(R >= 0.0 && R <= 1.0)) throw InvalidArgument("solve_separate: R must lie in [0,1]");
  const double margin = config.gamma1 + config.gamma2 - config.gamma2 * R;
  if (!(margin > 0.0)) {
    std::ostringstream err;
    err << "solve_separate: gamma1 + gamma2 - gamma2 R = " << margin << " must be > 0";
    throw InvalidArgument(err.str());
  }
  Outcome all;
  double f_total = 0.0;
  double g2 = 0.0;
  for (int t = 0; t < ens.num_tasks(); ++t) {
    const Separate prob(ens, config, R, t);
    VectorXd w;
    if (config.loss == LossKind::squared) {
      const auto b = ens.features(t);
      const VectorXd rhs = b.transpose() * ens.tasks[t].labels / static_cast<double>(b.rows());
      w = factor(prob.hessian(VectorXd::Zero(config.known_dim)), "solve_separate").solve(rhs);
      all.iterations = std::max(all.iterations, 1);
    } else {
      Outcome o1 = newton(prob, zeros(1, config.known_dim), o, "solve_separate");
      w = std::move(o1.w[0]);
      all.iterations = std::max(all.iterations, o1.iterations);
    }
    VectorXd g;
    f_total += separate_training_objective(ens, config, R, t, w, &g);
    g2 += g.squaredNorm();
    all.w.push_back(std::move(w));
  }
  return finish(ens, std::move(all), f_total, std::sqrt(g2));
}

}  // namespace mtl
