#include "mtl/theory.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

#include "mtl/coupling.hpp"
#include "mtl/error.hpp"

namespace mtl {

using Eigen::VectorXd;

std::string_view to_string(TheorySource source) {
  switch (source) {
    case TheorySource::symmetric: return "symmetric";
    case TheorySource::infinite_tasks: return "infinite_tasks";
    case TheorySource::general: return "general";
    case TheorySource::separate: return "separate";
  }
  return "unknown";
}

ScalarProblem ScalarProblem::from_config(const ExperimentConfig& config) {
  config.validate();
  if (!config.symmetric()) {
    throw InvalidArgument("ScalarProblem: samples_per_task must be equal across tasks");
  }
  ScalarProblem p;
  p.alpha = config.alpha(0);
  p.kappa = config.kappa(0);
  p.rho = config.rho;
  p.gamma1 = config.gamma1;
  p.gamma2 = config.gamma2;
  p.loss = config.loss;
  p.model = config.model;
  return p;
}

GeneralProblem GeneralProblem::from_config(const ExperimentConfig& config) {
  config.validate();
  GeneralProblem p;
  for (int t = 0; t < config.num_tasks; ++t) {
    p.alpha.push_back(config.alpha(t));
    p.kappa.push_back(config.kappa(t));
  }
  p.rho = config.rho;
  p.gamma1 = config.gamma1;
  p.gamma2 = config.gamma2;
  p.loss = config.loss;
  p.model = config.model;
  return p;
}

namespace {

void check_common(std::ostringstream& err, double rho, double gamma1,
                  double gamma2, LossKind loss, ModelKind model) {
  if (!(rho >= 0.0 && rho <= 1.0)) err << "rho must lie in [0,1]; ";
  if (model == ModelKind::linear_regression && !(rho > 0.0)) {
    err << "regression labels need rho > 0; ";
  }
  if (!(gamma1 >= 0.0)) err << "gamma1 must be >= 0; ";
  if (!(gamma2 >= 0.0)) err << "gamma2 must be >= 0; ";
  if (loss == LossKind::logistic && gamma1 == 0.0 && gamma2 == 0.0) {
    err << "logistic loss needs gamma1 or gamma2 > 0; ";
  }
}

void check_ratio(std::ostringstream& err, double alpha, double kappa) {
  if (!(alpha > 0.0)) err << "alpha must be > 0; ";
  if (!(kappa > 0.0)) err << "kappa must be > 0; ";
  if (kappa > alpha * (1.0 + 1e-12)) {
    err << "kappa (" << kappa << ") must not exceed alpha (" << alpha << "); ";
  }
}

void raise(const std::ostringstream& err, const char* what) {
  const std::string msg = err.str();
  if (!msg.empty()) throw InvalidArgument(std::string(what) + ": " + msg);
}

LabelChannel channel_for(ModelKind model, double alpha, double kappa, double rho) {
  return {model, std::min(1.0, kappa / alpha), rho};
}

double eta_of(double u) { return std::exp(u); }

}  // namespace

void validate(const ScalarProblem& p) {
  std::ostringstream err;
  check_ratio(err, p.alpha, p.kappa);
  check_common(err, p.rho, p.gamma1, p.gamma2, p.loss, p.model);
  raise(err, "invalid scalar problem");
}

void validate(const GeneralProblem& p) {
  std::ostringstream err;
  if (p.alpha.empty()) err << "at least one task is required; ";
  if (p.alpha.size() != p.kappa.size()) err << "alpha and kappa lengths differ; ";
  for (std::size_t t = 0; t < std::min(p.alpha.size(), p.kappa.size()); ++t) {
    check_ratio(err, p.alpha[t], p.kappa[t]);
  }
  check_common(err, p.rho, p.gamma1, p.gamma2, p.loss, p.model);
  raise(err, "invalid general problem");
}

double symmetric_q_coefficient(double num_tasks, double eta, double gamma2,
                               double rho) {
  if (std::isinf(num_tasks)) return (gamma2 + eta) * eta / (eta + gamma2 * rho);
  const double et = eta * num_tasks;
  return (gamma2 + eta) * et / (et + gamma2 * (1.0 - rho + rho * num_tasks));
}

double symmetric_moreau_parameter(double num_tasks, double eta, double kappa,
                                  double gamma2) {
  const double extra = std::isinf(num_tasks) ? 0.0 : gamma2 / (eta * num_tasks);
  return kappa / (gamma2 + eta) * (1.0 + extra);
}

namespace {

// d/d eta of the two helpers above.
double q_coefficient_derivative(double num_tasks, double eta, double gamma2,
                                double rho) {
  if (std::isinf(num_tasks)) {
    const double d = eta + gamma2 * rho;
    return ((gamma2 + 2.0 * eta) * d - (gamma2 + eta) * eta) / (d * d);
  }
  const double t = num_tasks;
  const double d = eta * t + gamma2 * (1.0 - rho + rho * t);
  return ((gamma2 + 2.0 * eta) * t * d - (gamma2 + eta) * eta * t * t) / (d * d);
}

double moreau_parameter_derivative(double num_tasks, double eta, double kappa,
                                   double gamma2) {
  const double g = gamma2 + eta;
  if (std::isinf(num_tasks)) return -kappa / (g * g);
  const double extra = gamma2 / (eta * num_tasks);
  return -kappa / (g * g) * (1.0 + extra) -
         kappa / g * gamma2 / (eta * eta * num_tasks);
}

// Scalar problems share one structure in (q, r, eta):
//   0.5 (gamma1 - eta) r^2 + 0.5 Aq(eta) q^2 + E[M(rH + qS; b(eta))]
// with the dual parameterized as u = log eta.
class ScalarObjective : public saddle::Objective {
 public:
  enum class Kind { symmetric, separate };

  ScalarObjective(Kind kind, double num_tasks, const ScalarProblem& p, double R,
                  const QuadratureGrid& grid)
      : kind_(kind),
        num_tasks_(num_tasks),
        p_(p),
        R_(R),
        grid_(grid),
        loss_(p.loss),
        channel_(channel_for(p.model, p.alpha, p.kappa, p.rho)) {}

  int pairs() const override { return 1; }
  int duals() const override { return 1; }

  double value(const VectorXd& x, const VectorXd& y) const override {
    return eval(x, y).value;
  }

  void gradient(const VectorXd& x, const VectorXd& y, VectorXd& gx,
                VectorXd& gy) const override {
    const Eval& e = eval(x, y);
    gx.resize(2);
    gy.resize(1);
    gx << e.dq, e.dr;
    gy << e.du;
  }

  VectorXd dual_lower() const override {
    return VectorXd::Constant(1, std::log(kEtaMin));
  }
  VectorXd dual_upper() const override {
    return VectorXd::Constant(1, std::log(kEtaMax));
  }
  VectorXd initial_dual() const override { return VectorXd::Zero(1); }

 private:
  struct Eval {
    double q = std::numeric_limits<double>::quiet_NaN();
    double r = 0.0, u = 0.0;
    double value = 0.0, dq = 0.0, dr = 0.0, du = 0.0;
  };

  const Eval& eval(const VectorXd& x, const VectorXd& y) const {
    const double q = x[0], r = x[1], u = y[0];
    if (q == cache_.q && r == cache_.r && u == cache_.u) return cache_;
    const double eta = eta_of(u);
    double b = 0.0, db = 0.0, aq = 0.0, daq = 0.0, ar = 0.0;
    if (kind_ == Kind::symmetric) {
      b = symmetric_moreau_parameter(num_tasks_, eta, p_.kappa, p_.gamma2);
      db = moreau_parameter_derivative(num_tasks_, eta, p_.kappa, p_.gamma2);
      const double k = symmetric_q_coefficient(num_tasks_, eta, p_.gamma2, p_.rho);
      aq = p_.gamma1 - eta + k;
      daq = -1.0 + q_coefficient_derivative(num_tasks_, eta, p_.gamma2, p_.rho);
    } else {
      b = p_.kappa / (p_.gamma2 + eta);
      db = -p_.kappa / ((p_.gamma2 + eta) * (p_.gamma2 + eta));
      aq = p_.gamma1 + p_.gamma2 - p_.gamma2 * R_;
      daq = 0.0;
    }
    ar = p_.gamma1 - eta;
    const ExpectedEnvelope env = expected_envelope(loss_, channel_, q, r, b, grid_);
    cache_.q = q;
    cache_.r = r;
    cache_.u = u;
    cache_.value = 0.5 * ar * r * r + 0.5 * aq * q * q + env.value;
    cache_.dq = aq * q + env.d_q;
    cache_.dr = ar * r + env.d_r;
    const double deta = -0.5 * r * r + 0.5 * daq * q * q + env.d_b * db;
    cache_.du = eta * deta;
    return cache_;
  }

  Kind kind_;
  double num_tasks_;
  ScalarProblem p_;
  double R_;
  const QuadratureGrid& grid_;
  LossKernel loss_;
  LabelChannel channel_;
  mutable Eval cache_;
};

// General problem. C(eta) = diag(eta + gamma2) - (gamma2/T) 11^T is positive
// definite iff s_t = 1/(eta_t + gamma2) > 0 and sum_t s_t < T/gamma2, so the
// dual u maps onto that set through s = (T/gamma2) softmax(u, 0). The
// boundary, where the supremum over eta can sit for x far from the saddle,
// is then at infinity instead of a wall the ascent runs into. Without
// coupling the map is plain eta = exp(u).
class GeneralObjective : public saddle::Objective {
 public:
  GeneralObjective(const GeneralProblem& p, const QuadratureGrid& grid)
      : p_(p), grid_(grid), loss_(p.loss), t_(p.num_tasks()) {
    kappa_.resize(t_);
    for (int t = 0; t < t_; ++t) {
      kappa_[t] = p.kappa[t];
      channels_.push_back(channel_for(p.model, p.alpha[t], p.kappa[t], p.rho));
    }
  }

  int pairs() const override { return t_; }
  int duals() const override { return t_; }

  double value(const VectorXd& x, const VectorXd& y) const override {
    return eval(x, y, false).value;
  }

  void gradient(const VectorXd& x, const VectorXd& y, VectorXd& gx,
                VectorXd& gy) const override {
    const Eval& e = eval(x, y, true);
    gx = e.gx;
    gy = e.gy;
  }

  bool dual_feasible(const VectorXd& y) const override {
    return coupling_positive_definite(eta(y), p_.gamma2);
  }
  VectorXd initial_dual() const override { return dual_of(VectorXd::Ones(t_)); }

  /// Inverse of eta(u); eta must satisfy C(eta) > 0.
  VectorXd dual_of(const VectorXd& eta) const {
    if (!coupling_positive_definite(eta, p_.gamma2)) {
      throw NotPositiveDefinite("general problem: C(eta) is not positive definite");
    }
    if (p_.gamma2 == 0.0) return eta.array().log().matrix();
    const double c = t_ / p_.gamma2;
    const VectorXd s = (eta.array() + p_.gamma2).inverse().matrix();
    const double slack = 1.0 - s.sum() / c;
    return ((s / c).array().log() - std::log(slack)).matrix();
  }

  VectorXd eta(const VectorXd& u) const {
    if (p_.gamma2 == 0.0) return u.array().exp().matrix();
    const VectorXd s = shares(u);
    return (s.array().inverse() - p_.gamma2).matrix();
  }

 private:
  struct Eval {
    VectorXd x, y;
    bool has_gradient = false;
    double value = 0.0;
    VectorXd gx, gy;
  };

  VectorXd shares(const VectorXd& u) const {
    const double m = std::max(0.0, u.maxCoeff());
    const VectorXd w = (u.array() - m).exp().matrix();
    const double denom = std::exp(-m) + w.sum();
    return (t_ / p_.gamma2 / denom) * w;
  }

  // Chain rule from d/deta to d/du.
  VectorXd pull_back(const VectorXd& u, const VectorXd& g_eta) const {
    if (p_.gamma2 == 0.0) return g_eta.cwiseProduct(u.array().exp().matrix());
    const VectorXd s = shares(u);
    const double c = t_ / p_.gamma2;
    const double sum = g_eta.cwiseQuotient(s).sum();
    VectorXd g(t_);
    for (int j = 0; j < t_; ++j) g[j] = -g_eta[j] / s[j] + s[j] / c * sum;
    return g;
  }

  const Eval& eval(const VectorXd& x, const VectorXd& u, bool need_grad) const {
    if (cache_.x.size() == x.size() && cache_.x == x && cache_.y == u &&
        (cache_.has_gradient || !need_grad)) {
      return cache_;
    }
    const VectorXd y = eta(u);
    const CouplingMatrices m = coupling_matrices(y, p_.gamma2, p_.rho, kappa_);
    const VectorXd q = x.head(t_);
    const VectorXd r = x.tail(t_);
    Eigen::LLT<Eigen::MatrixXd> llt(m.B);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("general problem: B(eta) is not positive definite");
    }
    const VectorXd z = llt.solve(q);
    double value = 0.5 * q.dot(z);
    VectorXd gx(2 * t_), gy(t_);
    VectorXd eb(t_);
    for (int t = 0; t < t_; ++t) {
      const double a = p_.gamma1 - y[t];
      const ExpectedEnvelope env =
          expected_envelope(loss_, channels_[t], q[t], r[t], m.V[t], grid_);
      value += 0.5 * a * (q[t] * q[t] + r[t] * r[t]) + env.value;
      gx[t] = a * q[t] + z[t] + env.d_q;
      gx[t_ + t] = a * r[t] + env.d_r;
      eb[t] = env.d_b;
    }
    for (int t = 0; t < t_; ++t) {
      const VectorXd zc = z.cwiseProduct(m.C_inv.col(t));
      double g = -0.5 * (q[t] * q[t] + r[t] * r[t]) + 0.5 * zc.dot(m.L * zc);
      for (int s = 0; s < t_; ++s) {
        g -= eb[s] * kappa_[s] * m.C_inv(s, t) * m.C_inv(s, t);
      }
      gy[t] = g;
    }
    gy = pull_back(u, gy);
    cache_.x = x;
    cache_.y = u;
    cache_.value = value;
    cache_.gx = gx;
    cache_.gy = gy;
    cache_.has_gradient = true;
    return cache_;
  }

  GeneralProblem p_;
  const QuadratureGrid& grid_;
  LossKernel loss_;
  int t_;
  VectorXd kappa_;
  std::vector<LabelChannel> channels_;
  mutable Eval cache_;
};

saddle::Options saddle_options(const TheoryOptions& o) {
  saddle::Options s;
  s.method = o.method;
  s.variable_tol = o.variable_tol;
  s.residual_tol = o.residual_tol;
  s.max_outer = o.max_outer;
  return s;
}

SaddleSolution solve_scalar(ScalarObjective::Kind kind, double num_tasks,
                            const ScalarProblem& p, double R,
                            const TheoryOptions& o, TheorySource source) {
  const QuadratureGrid grid(o.quad_order);
  const ScalarObjective f(kind, num_tasks, p, R, grid);
  const saddle::Result res = saddle::solve(f, saddle_options(o));
  SaddleSolution s;
  s.q = res.x.head(1);
  s.r = res.x.tail(1);
  s.eta = res.y.array().exp().matrix();
  s.value = res.value;
  s.converged = res.converged;
  s.residual = res.residual;
  s.iterations = res.outer_iterations;
  s.source = source;
  s.q_at_bound = res.x_at_bound.head(1);
  s.r_at_bound = res.x_at_bound.tail(1);
  s.eta_at_bound = res.y_at_bound;
  return s;
}

}  // namespace

double symmetric_objective(double num_tasks, const ScalarProblem& p, double q,
                           double r, double eta, const QuadratureGrid& grid) {
  validate(p);
  const ScalarObjective f(ScalarObjective::Kind::symmetric, num_tasks, p, 0.0, grid);
  return f.value(VectorXd{{q, r}}, VectorXd::Constant(1, std::log(eta)));
}

double separate_objective(const ScalarProblem& p, double R, double q, double r,
                          double eta, const QuadratureGrid& grid) {
  validate(p);
  const ScalarObjective f(ScalarObjective::Kind::separate, 0.0, p, R, grid);
  return f.value(VectorXd{{q, r}}, VectorXd::Constant(1, std::log(eta)));
}

double general_objective(const GeneralProblem& p, const VectorXd& q,
                         const VectorXd& r, const VectorXd& eta,
                         const QuadratureGrid& grid) {
  validate(p);
  const int t = p.num_tasks();
  if (q.size() != t || r.size() != t || eta.size() != t) {
    throw InvalidArgument("general_objective: q, r, eta must have one entry per task");
  }
  const GeneralObjective f(p, grid);
  VectorXd x(2 * t);
  x << q, r;
  return f.value(x, f.dual_of(eta));
}

SaddleSolution solve_symmetric(double num_tasks, const ScalarProblem& p,
                               const TheoryOptions& o) {
  validate(p);
  if (!(num_tasks >= 1.0)) throw InvalidArgument("solve_symmetric: T must be >= 1");
  return solve_scalar(ScalarObjective::Kind::symmetric, num_tasks, p, 0.0, o,
                      std::isinf(num_tasks) ? TheorySource::infinite_tasks
                                            : TheorySource::symmetric);
}

SaddleSolution solve_infinite_T(const ScalarProblem& p, const TheoryOptions& o) {
  validate(p);
  return solve_scalar(ScalarObjective::Kind::symmetric,
                      std::numeric_limits<double>::infinity(), p, 0.0, o,
                      TheorySource::infinite_tasks);
}

SaddleSolution solve_separate_asymptotic(const ScalarProblem& p, double R,
                                         const TheoryOptions& o) {
  validate(p);
  if (!(R >= 0.0 && R <= 1.0)) {
    throw InvalidArgument("solve_separate_asymptotic: R must lie in [0,1]");
  }
  const double margin = p.gamma1 + p.gamma2 - p.gamma2 * R;
  if (!(margin > 0.0)) {
    std::ostringstream err;
    err << "solve_separate_asymptotic: gamma1 + gamma2 - gamma2 R = " << margin
        << " must be > 0";
    throw InvalidArgument(err.str());
  }
  return solve_scalar(ScalarObjective::Kind::separate, 0.0, p, R, o,
                      TheorySource::separate);
}

SaddleSolution solve_general(const GeneralProblem& p, const TheoryOptions& o) {
  validate(p);
  const QuadratureGrid grid(o.quad_order);
  const GeneralObjective f(p, grid);
  const int t = p.num_tasks();
  const saddle::Result res = saddle::solve(f, saddle_options(o));
  SaddleSolution s;
  s.q = res.x.head(t);
  s.r = res.x.tail(t);
  s.eta = f.eta(res.y);
  s.value = res.value;
  s.converged = res.converged;
  s.residual = res.residual;
  s.iterations = res.outer_iterations;
  s.source = TheorySource::general;
  s.q_at_bound = res.x_at_bound.head(t);
  s.r_at_bound = res.x_at_bound.tail(t);
  s.eta_at_bound = res.y_at_bound;
  // A supremum over eta found only in the limit C(eta) -> singular is not a
  // stationary point.
  const Eigen::VectorXd kappa = Eigen::Map<const Eigen::VectorXd>(p.kappa.data(), t);
  const CouplingMatrices m = coupling_matrices(s.eta, p.gamma2, p.rho, kappa);
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.C).eigenvalues()[0];
  if (lo <= 1e-9 * (1.0 + p.gamma2 + s.eta.cwiseAbs().maxCoeff())) {
    s.eta_at_bound.setConstant(true);
    s.converged = false;
  }
  return s;
}

}  // namespace mtl
