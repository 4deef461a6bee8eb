#pragma once

#include <Eigen/Dense>

#include <optional>

namespace mtl::saddle {

/// Convex-concave objective Phi(x, y) with x = [q; r] in R^{2m}_+ (minimized)
/// and dual y in R^d (maximized). The dual parameterization is chosen by the
/// implementation (e.g. log eta for the symmetric problems).
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int pairs() const = 0;
  virtual int duals() const = 0;

  virtual double value(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) const = 0;
  virtual void gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        Eigen::VectorXd& gx, Eigen::VectorXd& gy) const = 0;

  virtual bool dual_feasible(const Eigen::VectorXd& /*y*/) const { return true; }
  virtual Eigen::VectorXd dual_lower() const;
  virtual Eigen::VectorXd dual_upper() const;
  virtual Eigen::VectorXd initial_dual() const = 0;
};

enum class Method {
  newton,   // nested: inner Newton ascent, outer projected Newton on V(x)
  simplex,  // nested: inner Newton ascent, outer Nelder-Mead on V(x)
};

struct Options {
  Method method = Method::newton;
  double variable_tol = 1e-7;
  double residual_tol = 1e-6;
  /// Internal stopping threshold on the projected gradient; iterations keep
  /// going until this or stagnation, well past residual_tol.
  double gradient_tol = 1e-11;
  int max_outer = 100;
  int max_inner = 100;
  int max_evaluations = 40000;  // simplex only
};

struct Result {
  Eigen::VectorXd x;  // [q; r]
  Eigen::VectorXd y;  // dual, implementation parameterization
  double value = 0.0;
  double residual = 0.0;  // max of projected |grad_x| and free |grad_y|
  bool converged = false;
  int outer_iterations = 0;
  Eigen::Array<bool, Eigen::Dynamic, 1> x_at_bound;
  Eigen::Array<bool, Eigen::Dynamic, 1> y_at_bound;
};

struct InnerResult {
  Eigen::VectorXd y;
  Eigen::VectorXd gy;
  double value = 0.0;
  bool converged = false;
  Eigen::Array<bool, Eigen::Dynamic, 1> at_bound;
};

/// max_y Phi(x, y) by damped Newton with a negative-definite correction,
/// box projection and step halving into the feasible region.
InnerResult maximize_dual(const Objective& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y0, const Options& opts);

/// min_{x >= 0} max_y Phi(x, y).
Result solve(const Objective& f, const Options& opts,
             const std::optional<Eigen::VectorXd>& x0 = std::nullopt);

}  // namespace mtl::saddle
