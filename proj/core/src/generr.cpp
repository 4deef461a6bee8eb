#include "mtl/generr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mtl/error.hpp"
#include "mtl/train.hpp"

namespace mtl {

double theory_gen_error(double c0, double c1, double c2, ModelKind model) {
  if (!(c2 >= 0.0)) throw InvalidArgument("theory_gen_error: c2 must be >= 0");
  if (model == ModelKind::linear_regression) {
    return (c0 - c1) * (c0 - c1) + c2 * c2;
  }
  const double norm = std::hypot(c1, c2);
  if (norm == 0.0) return 0.5;
  return std::acos(std::clamp(c1 / norm, -1.0, 1.0)) / std::numbers::pi;
}

TheoryPrediction predict(const SaddleSolution& s, double alpha, double kappa,
                         double rho, ModelKind model, int task) {
  if (task < 0 || task >= s.q.size()) {
    throw InvalidArgument("predict: task index out of range");
  }
  const double ratio = std::min(1.0, kappa / alpha);
  const double q = s.q[task];
  const double r = s.r[task];
  TheoryPrediction p;
  p.c0 = rho > 0.0 ? 1.0 / std::sqrt(rho) : std::numeric_limits<double>::infinity();
  p.c1 = q * std::sqrt(ratio);
  p.c2 = std::sqrt((1.0 - ratio) * q * q + r * r);
  p.gen_error = theory_gen_error(p.c0, p.c1, p.c2, model);
  p.source = s.source;
  return p;
}

TheoryPrediction predict(const SaddleSolution& s, const ScalarProblem& problem) {
  return predict(s, problem.alpha, problem.kappa, problem.rho, problem.model, 0);
}

std::vector<TheoryPrediction> predict(const SaddleSolution& s,
                                      const GeneralProblem& problem) {
  std::vector<TheoryPrediction> out;
  for (int t = 0; t < problem.num_tasks(); ++t) {
    out.push_back(predict(s, problem.alpha[t], problem.kappa[t], problem.rho,
                          problem.model, t));
  }
  return out;
}

double exact_gen_error(const Eigen::VectorXd& xi, const Eigen::VectorXd& beta,
                       ModelKind model) {
  if (xi.size() != beta.size()) {
    throw InvalidArgument("exact_gen_error: dimension mismatch");
  }
  if (model == ModelKind::linear_regression) return (xi - beta).squaredNorm();
  const double nb = beta.norm();
  const double nx = xi.norm();
  if (nb == 0.0 || nx == 0.0) return 0.5;
  const double cosine = std::clamp(xi.dot(beta) / (nx * nb), -1.0, 1.0);
  return std::acos(cosine) / std::numbers::pi;
}

double empirical_gen_error(const TrainedModel& model, const TaskEnsemble& ens,
                           int task, ModelKind kind) {
  if (task < 0 || task >= ens.num_tasks() ||
      task >= static_cast<int>(model.embedded.size())) {
    throw InvalidArgument("empirical_gen_error: task index out of range");
  }
  return exact_gen_error(ens.tasks[task].hidden_vector, model.embedded[task], kind);
}

OrderParameters empirical_order_parameters(const TrainedModel& model,
                                           const TaskEnsemble& ens, int task) {
  if (task < 0 || task >= ens.num_tasks() ||
      task >= static_cast<int>(model.weights.size())) {
    throw InvalidArgument("empirical_order_parameters: task index out of range");
  }
  const Eigen::VectorXd xs = ens.restricted_hidden(task);
  const double nx = xs.norm();
  const Eigen::VectorXd& w = model.weights[task];
  OrderParameters op;
  op.q = nx > 0.0 ? xs.dot(w) / nx : 0.0;
  op.r = std::sqrt(std::max(0.0, w.squaredNorm() - op.q * op.q));
  return op;
}

RhoFixedPoint solve_R_of_rho(const ScalarProblem& problem,
                             const TheoryOptions& options, double gap_tol) {
  validate(problem);
  const SaddleSolution limit = solve_infinite_T(problem, options);
  RhoFixedPoint out;
  out.target_error = predict(limit, problem).gen_error;

  // With gamma1 = 0 the separate problem loses strong convexity at R = 1.
  const double r_max = problem.gamma1 > 0.0 || problem.gamma2 == 0.0 ? 1.0 : 1.0 - 1e-9;
  auto gap = [&](double R) {
    const SaddleSolution s = solve_separate_asymptotic(problem, R, options);
    return predict(s, problem).gen_error - out.target_error;
  };

  double lo = 0.0, hi = r_max;
  double g_lo = gap(lo);
  if (std::abs(g_lo) <= gap_tol) {
    out.R = lo;
    out.gap = g_lo;
    out.converged = true;
    return out;
  }
  double g_hi = gap(hi);
  if (std::abs(g_hi) <= gap_tol) {
    out.R = hi;
    out.gap = g_hi;
    out.converged = true;
    return out;
  }
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    std::ostringstream err;
    err << "solve_R_of_rho: no sign change on [0,1] (gap(0) = " << g_lo
        << ", gap(1) = " << g_hi << ")";
    throw ConvergenceError(err.str(), 0, std::min(std::abs(g_lo), std::abs(g_hi)));
  }
  for (int it = 1; it <= 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    out.iterations = it;
    out.R = mid;
    out.gap = g;
    if (std::abs(g) <= gap_tol || hi - lo < 1e-12) {
      out.converged = std::abs(g) <= gap_tol;
      return out;
    }
    if ((g > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  return out;
}

}  // namespace mtl
