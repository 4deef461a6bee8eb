#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mtl/model.hpp"

namespace mtl {

/// Per-task fitted weights and their embedding into R^p (zeros off S).
struct TrainedModel {
  std::vector<Eigen::VectorXd> weights;   // length k each
  std::vector<Eigen::VectorXd> embedded;  // length p each
  double objective_value = 0.0;
  /// Euclidean norm of the stacked gradient at the returned point.
  double grad_norm = 0.0;
  int iterations = 0;
};

enum class SquaredSolver {
  automatic,  // direct when k <= direct_max_dim, else conjugate gradient
  direct,     // per-task Cholesky plus a k x k Schur complement for the mean
  conjugate_gradient,
};

enum class LogisticSolver {
  automatic,  // Newton when T k <= newton_max_size, else L-BFGS
  newton,
  lbfgs,
};

struct TrainOptions {
  SquaredSolver squared = SquaredSolver::automatic;
  LogisticSolver logistic = LogisticSolver::automatic;
  int direct_max_dim = 2000;
  int newton_max_size = 2000;
  int max_newton_iterations = 500;
  int max_cg_iterations = 10000;
  int max_lbfgs_iterations = 10000;
  int lbfgs_memory = 10;
  double cg_tolerance = 1e-10;   // relative residual
  double grad_tolerance = 1e-8;  // logistic stopping rule
};

/// Minimizes
///   sum_t (1/n_t) sum_i l(y_ti; b_ti . w_t) + gamma1/2 sum_t |w_t|^2
///     + gamma2/2 sum_t |w_t - w_bar|^2
/// starting from zero. Throws ConvergenceError when the iteration cap is hit.
TrainedModel solve_multitask(const TaskEnsemble& ensemble,
                             const ExperimentConfig& config,
                             const TrainOptions& options = {});

/// Per task: (1/n) sum_i l + (gamma1+gamma2)/2 |w|^2 - gamma2 R/2 (u . w)^2,
/// u the normalized restriction of xi_t to S. Requires
/// gamma1 + gamma2 - gamma2 R > 0.
TrainedModel solve_separate(const TaskEnsemble& ensemble,
                            const ExperimentConfig& config, double R,
                            const TrainOptions& options = {});

/// Value and stacked gradient of the multi-task objective at `weights`.
double multitask_objective(const TaskEnsemble& ensemble,
                           const ExperimentConfig& config,
                           const std::vector<Eigen::VectorXd>& weights,
                           std::vector<Eigen::VectorXd>* gradient = nullptr);
double separate_training_objective(const TaskEnsemble& ensemble,
                                   const ExperimentConfig& config, double R,
                                   int task, const Eigen::VectorXd& w,
                                   Eigen::VectorXd* gradient = nullptr);

}  // namespace mtl
