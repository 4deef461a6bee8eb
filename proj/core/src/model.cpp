#include "mtl/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mtl/error.hpp"

namespace mtl {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::squared ? "squared" : "logistic";
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::linear_regression ? "linear_regression"
                                              : "binary_classification";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "squared") return LossKind::squared;
  if (text == "logistic") return LossKind::logistic;
  throw InvalidArgument("unknown loss kind '" + std::string(text) + "'");
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "linear_regression" || text == "regression") {
    return ModelKind::linear_regression;
  }
  if (text == "binary_classification" || text == "classification") {
    return ModelKind::binary_classification;
  }
  throw InvalidArgument("unknown model kind '" + std::string(text) + "'");
}

double ExperimentConfig::alpha(int task) const {
  return static_cast<double>(ambient_dim) / samples_per_task.at(task);
}

double ExperimentConfig::kappa(int task) const {
  return static_cast<double>(known_dim) / samples_per_task.at(task);
}

double ExperimentConfig::sigma() const {
  if (rho <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 / rho - 1.0);
}

bool ExperimentConfig::symmetric() const {
  for (int n : samples_per_task) {
    if (n != samples_per_task.front()) return false;
  }
  return true;
}

void ExperimentConfig::validate() const {
  std::ostringstream err;
  if (num_tasks < 1) err << "num_tasks must be >= 1; ";
  if (ambient_dim < 1) err << "ambient_dim must be >= 1; ";
  if (known_dim < 1 || known_dim > ambient_dim) {
    err << "known_dim must satisfy 1 <= k <= p (k=" << known_dim
        << ", p=" << ambient_dim << "); ";
  }
  if (static_cast<int>(samples_per_task.size()) != num_tasks) {
    err << "samples_per_task has " << samples_per_task.size()
        << " entries, expected " << num_tasks << "; ";
  }
  for (int n : samples_per_task) {
    if (n < 1) {
      err << "every samples_per_task entry must be >= 1; ";
      break;
    }
  }
  if (!(rho >= 0.0 && rho <= 1.0)) err << "rho must lie in [0,1]; ";
  if (!(gamma1 >= 0.0)) err << "gamma1 must be >= 0; ";
  if (!(gamma2 >= 0.0)) err << "gamma2 must be >= 0; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw InvalidArgument("invalid ExperimentConfig: " + msg);
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  if (gamma1 == 0.0 && loss == LossKind::logistic) {
    out.emplace_back(
        "gamma1 = 0 with logistic loss: the minimizer may not exist on "
        "separable data");
  }
  if (loss == LossKind::logistic && model == ModelKind::linear_regression) {
    out.emplace_back(
        "logistic loss with real-valued regression labels is not a validated "
        "combination");
  }
  return out;
}

Eigen::VectorXd unit_sphere_vector(int dim, CounterRng& rng) {
  if (dim < 1) throw InvalidArgument("unit_sphere_vector: dim must be >= 1");
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  // A zero draw has probability zero but would make the direction undefined.
  while (norm == 0.0) {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    norm = v.norm();
  }
  return v / norm;
}

TaskEnsemble generate_ensemble(const ExperimentConfig& config,
                               std::uint64_t seed, std::uint64_t trial) {
  config.validate();
  if (config.rho <= 0.0) {
    throw InvalidArgument(
        "generate_ensemble: rho = 0 makes sigma infinite; use rho > 0");
  }
  const int p = config.ambient_dim;

  TaskEnsemble ens;
  ens.known_dim = config.known_dim;
  ens.sigma = config.sigma();
  {
    CounterRng rng({seed, trial, stream_tag::shared_vector, 0});
    ens.shared_vector = unit_sphere_vector(p, rng);
  }

  ens.tasks.resize(config.num_tasks);
  for (int t = 0; t < config.num_tasks; ++t) {
    TaskData& task = ens.tasks[t];
    const auto idx = static_cast<std::uint64_t>(t);
    {
      CounterRng rng({seed, trial, stream_tag::task_vector, idx});
      task.task_vector = unit_sphere_vector(p, rng);
    }
    task.hidden_vector = ens.sigma * task.task_vector + ens.shared_vector;

    const int n = config.samples_per_task[t];
    CounterRng rng({seed, trial, stream_tag::features, idx});
    std::normal_distribution<double> normal;
    task.full_features.resize(n, p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) task.full_features(i, j) = normal(rng);
    }
    task.labels = task.full_features * task.hidden_vector;
    if (config.model == ModelKind::binary_classification) {
      task.labels = task.labels.unaryExpr(
          [](double z) { return z >= 0.0 ? 1.0 : -1.0; });
    }
  }
  return ens;
}

}  // namespace mtl
