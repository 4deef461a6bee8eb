#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mtl/model.hpp"
#include "mtl/theory.hpp"

namespace mtl {

struct TrainedModel;

/// Asymptotic generalization error of one task, together with the constants
/// of the Gaussian equivalent predictor c1 G1 + c2 G2 against c0 G1.
struct TheoryPrediction {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double gen_error = 0.0;
  TheorySource source = TheorySource::symmetric;
};

/// Regression: (c0 - c1)^2 + c2^2. Classification: arccos(c1 / |(c1,c2)|)/pi,
/// and 1/2 when c1 = c2 = 0. Throws InvalidArgument for c2 < 0.
double theory_gen_error(double c0, double c1, double c2, ModelKind model);

/// Builds the prediction for task `task` of a solved problem.
TheoryPrediction predict(const SaddleSolution& solution, double alpha,
                         double kappa, double rho, ModelKind model,
                         int task = 0);
TheoryPrediction predict(const SaddleSolution& solution,
                         const ScalarProblem& problem);
std::vector<TheoryPrediction> predict(const SaddleSolution& solution,
                                      const GeneralProblem& problem);

/// Exact test error of beta against xi under standard Gaussian test points.
/// Regression: |xi - beta|^2. Classification: arccos(cos angle)/pi, 1/2 for
/// beta = 0.
double exact_gen_error(const Eigen::VectorXd& xi, const Eigen::VectorXd& beta,
                       ModelKind model);
double empirical_gen_error(const TrainedModel& model,
                           const TaskEnsemble& ensemble, int task,
                           ModelKind kind);

/// Order parameters of a trained task: q = xi_S_bar . w and r = |w - q xi_S_bar|.
struct OrderParameters {
  double q = 0.0;
  double r = 0.0;
};
OrderParameters empirical_order_parameters(const TrainedModel& model,
                                           const TaskEnsemble& ensemble,
                                           int task);

struct RhoFixedPoint {
  double R = 0.0;
  double gap = 0.0;  // gen error (separate at R) - gen error (large-T limit)
  double target_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Solves gen_error(separate, R) = gen_error(large-T limit) for R in [0,1] by
/// bisection on the error gap. Throws ConvergenceError when the gap has no
/// sign change on [0,1].
RhoFixedPoint solve_R_of_rho(const ScalarProblem& problem,
                             const TheoryOptions& options = {},
                             double gap_tol = 1e-6);

}  // namespace mtl
