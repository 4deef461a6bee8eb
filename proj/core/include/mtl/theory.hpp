#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string_view>
#include <vector>

#include "mtl/losses.hpp"
#include "mtl/model.hpp"
#include "mtl/quadrature.hpp"
#include "mtl/saddle.hpp"

namespace mtl {

/// Scalars shared by the symmetric, infinite-T and separate problems.
struct ScalarProblem {
  double alpha = 1.0;
  double kappa = 0.5;
  double rho = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  LossKind loss = LossKind::squared;
  ModelKind model = ModelKind::linear_regression;

  /// Requires ExperimentConfig::symmetric().
  static ScalarProblem from_config(const ExperimentConfig& config);
};

/// Per-task ratios for the general problem.
struct GeneralProblem {
  std::vector<double> alpha;
  std::vector<double> kappa;
  double rho = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  LossKind loss = LossKind::squared;
  ModelKind model = ModelKind::linear_regression;

  int num_tasks() const { return static_cast<int>(alpha.size()); }
  static GeneralProblem from_config(const ExperimentConfig& config);
};

struct TheoryOptions {
  int quad_order = QuadratureGrid::kDefaultOrder;
  double variable_tol = 1e-7;
  double residual_tol = 1e-6;
  saddle::Method method = saddle::Method::newton;
  int max_outer = 100;
};

enum class TheorySource { symmetric, infinite_tasks, general, separate };
std::string_view to_string(TheorySource source);

/// Optimal (q, r, eta): one entry each for the scalar problems, T entries for
/// the general problem. Bound flags mark coordinates resting on q = 0, r = 0
/// or on the eta search limits (eta -> inf happens when r* = 0).
struct SaddleSolution {
  Eigen::VectorXd q;
  Eigen::VectorXd r;
  Eigen::VectorXd eta;
  double value = 0.0;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  TheorySource source = TheorySource::symmetric;
  Eigen::Array<bool, Eigen::Dynamic, 1> q_at_bound;
  Eigen::Array<bool, Eigen::Dynamic, 1> r_at_bound;
  Eigen::Array<bool, Eigen::Dynamic, 1> eta_at_bound;
};

/// Search box for eta in the scalar problems.
inline constexpr double kEtaMin = 1e-10;
inline constexpr double kEtaMax = 1e10;

/// q^2 coefficient (per task, doubled) of the symmetric problem:
/// (gamma2 + eta) / (1 + (1 - rho) gamma2 / (eta T)) * G(T, eta).
/// Pass T = infinity for the large-T limit.
double symmetric_q_coefficient(double num_tasks, double eta, double gamma2,
                               double rho);
/// Moreau parameter (kappa / (gamma2 + eta)) (1 + gamma2 / (eta T)).
double symmetric_moreau_parameter(double num_tasks, double eta, double kappa,
                                  double gamma2);

/// Objective values, exposed for oracles and diagnostics.
double symmetric_objective(double num_tasks, const ScalarProblem& problem,
                           double q, double r, double eta,
                           const QuadratureGrid& grid);
double separate_objective(const ScalarProblem& problem, double R, double q,
                          double r, double eta, const QuadratureGrid& grid);
/// Throws NotPositiveDefinite outside C(eta) > 0.
double general_objective(const GeneralProblem& problem,
                         const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                         const Eigen::VectorXd& eta,
                         const QuadratureGrid& grid);

/// Symmetric problem for T tasks (T may be fractional or very large).
SaddleSolution solve_symmetric(double num_tasks, const ScalarProblem& problem,
                               const TheoryOptions& options = {});
/// T -> infinity limit of the symmetric problem.
SaddleSolution solve_infinite_T(const ScalarProblem& problem,
                                const TheoryOptions& options = {});
/// Deterministic problem of the separate formulation with alignment weight R.
SaddleSolution solve_separate_asymptotic(const ScalarProblem& problem, double R,
                                         const TheoryOptions& options = {});
/// General problem with per-task sample ratios.
SaddleSolution solve_general(const GeneralProblem& problem,
                             const TheoryOptions& options = {});

/// Throws InvalidArgument when the scalar problem is outside the supported
/// domain (kappa > alpha, regression at rho = 0, unregularized logistic...).
void validate(const ScalarProblem& problem);
void validate(const GeneralProblem& problem);

}  // namespace mtl
