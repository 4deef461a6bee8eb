#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtl/rng.hpp"

namespace mtl {

enum class LossKind { squared, logistic };
enum class ModelKind { linear_regression, binary_classification };

std::string_view to_string(LossKind kind);
std::string_view to_string(ModelKind kind);
LossKind parse_loss_kind(std::string_view text);
ModelKind parse_model_kind(std::string_view text);

/// Full description of one multi-task experiment.
///
/// Derived ratios (alpha_t = p / n_t, kappa_t = k / n_t, sigma) are computed
/// on demand and never stored. Over-parameterized settings with k > n_t are
/// legal.
struct ExperimentConfig {
  int num_tasks = 1;
  int ambient_dim = 1;
  int known_dim = 1;
  std::vector<int> samples_per_task{1};
  double rho = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  LossKind loss = LossKind::squared;
  ModelKind model = ModelKind::linear_regression;
  std::uint64_t seed = 0;

  double alpha(int task) const;
  double kappa(int task) const;
  /// sqrt(1/rho - 1); infinite at rho = 0.
  double sigma() const;
  bool symmetric() const;

  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
  /// Non-fatal issues, e.g. an unregularized logistic fit.
  std::vector<std::string> warnings() const;
};

/// Contiguous column block of the feature matrix.
using FeatureView = Eigen::Block<const Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true>;

/// One task's data. The learner sees only the first k feature columns;
/// labels were produced from all p columns.
struct TaskData {
  Eigen::VectorXd task_vector;    // v_t, unit norm
  Eigen::VectorXd hidden_vector;  // xi_t = sigma v_t + v_0
  Eigen::MatrixXd full_features;  // n_t x p
  Eigen::VectorXd labels;         // n_t

  /// n_t x k view of the observed columns (S = first k indices).
  FeatureView features(int known_dim) const {
    return full_features.leftCols(known_dim);
  }
};

struct TaskEnsemble {
  int known_dim = 0;
  double sigma = 0.0;
  Eigen::VectorXd shared_vector;  // v_0, unit norm
  std::vector<TaskData> tasks;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  int ambient_dim() const { return static_cast<int>(shared_vector.size()); }
  FeatureView features(int task) const {
    return tasks[task].features(known_dim);
  }
  /// Restriction of xi_t to the observed subset S.
  Eigen::VectorXd restricted_hidden(int task) const {
    return tasks[task].hidden_vector.head(known_dim);
  }
};

/// Uniform draw from the unit sphere in R^dim (normalized Gaussian).
Eigen::VectorXd unit_sphere_vector(int dim, CounterRng& rng);

/// Deterministic in (config, seed, trial). The seed argument overrides
/// config.seed so Monte-Carlo drivers can key trials independently.
TaskEnsemble generate_ensemble(const ExperimentConfig& config,
                               std::uint64_t seed, std::uint64_t trial = 0);

}  // namespace mtl
